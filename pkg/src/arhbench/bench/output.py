"""Result tables: CSV emit and re-ingest, SVG figures, JSON run metadata."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path

COLUMNS = (
    "scenario", "method", "n", "k_n", "f_num", "f_den",
    "mean_err", "median_err", "mean_ub", "failures", "wall_ms",
)


@dataclass(frozen=True)
class ResultRow:
    """One (method, n) cell. Blank cells are ``None``."""

    scenario: str
    method: str
    n: int
    k_n: int
    f_num: int | None
    f_den: int
    mean_err: float | None
    median_err: float | None
    mean_ub: float | None
    failures: int
    wall_ms: float | None = None

    @property
    def f_value(self) -> float | None:
        return None if self.f_num is None else self.f_num / self.f_den


@dataclass(frozen=True)
class ResultTable:
    rows: tuple = ()

    def select(self, method: str) -> list[ResultRow]:
        return [r for r in self.rows if r.method == method]

    @property
    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.rows))


_INT_FIELDS = {"n", "k_n", "f_num", "f_den", "failures"}
_FLOAT_FIELDS = {"mean_err", "median_err", "mean_ub", "wall_ms"}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        # repr is the shortest string that round-trips exactly
        return repr(value)
    return str(value)


def _parse(name: str, text: str):
    if name in _INT_FIELDS:
        return None if text == "" else int(text)
    if name in _FLOAT_FIELDS:
        return None if text == "" else float(text)
    return text


def write_csv(table: ResultTable, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in table.rows:
            w.writerow([_fmt(v) for v in astuple(row)])
    return path


def read_csv(path) -> ResultTable:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        names = [f.name for f in fields(ResultRow)]
        rows = [ResultRow(*(_parse(nm, v) for nm, v in zip(names, rec))) for rec in reader if rec]
    return ResultTable(tuple(rows))


def write_svg(table: ResultTable, path, threshold=None, title: str = "") -> Path:
    """Two panels: exceedance share against ``n`` and mean error against ``n``.

    The threshold curve ``xi(n)`` is drawn on the error panel when given.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from ..metrics import xi

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": "arhbench", "svg.fonttype": "path"}):
        fig, (ax_f, ax_e) = plt.subplots(1, 2, figsize=(10, 4))
        markers = "o*Ds^vP<>x"
        for i, method in enumerate(table.methods):
            rows = sorted(table.select(method), key=lambda r: r.n)
            ns = [r.n for r in rows if r.f_num is not None]
            ax_f.plot(ns, [r.f_value for r in rows if r.f_num is not None], ":",
                      marker=markers[i % len(markers)], label=method)
            ns_e = [r.n for r in rows if r.mean_err is not None]
            ax_e.plot(ns_e, [r.mean_err for r in rows if r.mean_err is not None], ":",
                      marker=markers[i % len(markers)], label=method)
        all_n = sorted({r.n for r in table.rows})
        if threshold is not None and all_n:
            ax_e.plot(all_n, [xi(threshold, n) for n in all_n], "g--",
                      label=f"xi (beta={threshold.beta:g})")
        ax_f.set_xlabel("n")
        ax_f.set_ylabel("F (exceedance share)")
        ax_e.set_xlabel("n")
        ax_e.set_ylabel("mean error norm")
        for ax in (ax_f, ax_e):
            if table.rows:
                ax.legend(fontsize="small")
            ax.grid(alpha=0.3)
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_metadata(path, metadata: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(metadata), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
