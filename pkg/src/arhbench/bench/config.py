"""Benchmark configuration: TOML loading, validation and serialization.

A config file has four tables and a method array::

    [scenario]           # ScenarioSpec fields: regime, delta1, delta2, c1, c2, W, invK, M, burn_in
    id = "scenario2-desk"
    regime = "diagonal"
    delta1 = 2.4

    [truncation]         # rule = "log" | "power" | "root" | "pinned"
    rule = "log"
    rounding = "floor"   # "ceil" (default) or "floor"
    # alpha = 6.5, e_prime = 1.7, offset = 0
    # pinned = { 2000 = 7, 8000 = 8 }   (overrides the rule at those n)

    [threshold]
    beta = 0.65
    rate = "half"        # "half" | "third"

    [run]
    sample_sizes = [2000, 8000]
    replications = 100
    seed_base = 1
    workers = 1
    out_dir = "results"
    error_norm = "auto"  # "auto" | "truncated" | "full"
    kernel_error_mode = "literal"   # "literal" | "applied"
    grid_step = 0.01

    [[methods]]
    name = "bosq"        # label used in the output
    kind = "bosq"        # diag | diag_known | bosq | guillas | wavelet | besse | kernel
    # per-kind parameters: beta_u; h, smooth_penalty; ell, q; family, j0, J, lam
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..componentwise import DEFAULT_BETA_U, TruncationKind, TruncationRule, k_of
from ..errors import ARHError, ConfigError
from ..metrics import KernelErrorMode, ThresholdCurve
from ..scenario import Regime, ScenarioSpec, validate

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

METHOD_KINDS = ("diag", "diag_known", "bosq", "guillas", "wavelet", "besse", "kernel")
COMPONENTWISE_KINDS = ("diag", "diag_known", "bosq", "guillas")
CURVE_KINDS = ("wavelet", "besse", "kernel")
ERROR_NORMS = ("auto", "truncated", "full")

_METHOD_PARAMS = {
    "diag": set(),
    "diag_known": set(),
    "bosq": set(),
    "guillas": {"beta_u"},
    "wavelet": {"family", "j0", "J", "lam", "M_spec"},
    "besse": {"ell", "q"},
    "kernel": {"h", "smooth_penalty"},
}


@dataclass(frozen=True)
class MethodSpec:
    name: str
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ConfigError(f"unknown method kind {self.kind!r}; expected one of {METHOD_KINDS}")
        unknown = set(self.params) - _METHOD_PARAMS[self.kind]
        if unknown:
            raise ConfigError(f"method {self.name!r}: unknown parameters {sorted(unknown)}")
        if self.kind == "guillas" and not 0 < self.params.get("beta_u", DEFAULT_BETA_U) < 1:
            raise ConfigError("beta_u must lie in (0, 1)")
        if self.kind == "kernel" and not self.params.get("h", 1.0) > 0:
            raise ConfigError("kernel bandwidth h must be positive")


@dataclass(frozen=True)
class Truncation:
    """A truncation rule plus optional per-``n`` pinned values."""

    rule: TruncationRule | None = None
    pinned: tuple = ()

    def k(self, n: int, delta1: float) -> int:
        table = dict(self.pinned)
        if n in table:
            return int(table[n])
        if self.rule is None:
            raise ConfigError(f"no pinned k_n for n = {n} and no rule to fall back on")
        return k_of(self.rule, n, delta1)


@dataclass(frozen=True)
class BenchConfig:
    scenario_id: str
    scenario: ScenarioSpec
    methods: tuple
    sample_sizes: tuple
    replications: int
    threshold: ThresholdCurve
    truncation: Truncation
    seed_base: int = 0
    workers: int = 1
    out_dir: str = "results"
    error_norm: str = "auto"
    kernel_error_mode: KernelErrorMode = KernelErrorMode.PAPER_LITERAL
    grid_step: float = 0.01

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.sample_sizes:
            raise ConfigError("sample_sizes must be nonempty")
        if any(int(n) != n or n < 3 for n in self.sample_sizes):
            raise ConfigError("sample sizes must be integers >= 3")
        if not self.methods:
            raise ConfigError("at least one method is required")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate method names in {names}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.error_norm not in ERROR_NORMS:
            raise ConfigError(f"error_norm must be one of {ERROR_NORMS}")
        if self.seed_base < 0:
            raise ConfigError("seed_base must be nonnegative")
        for m in self.methods:
            if m.kind in ("diag", "diag_known") and self.scenario.regime is not Regime.DIAGONAL:
                raise ConfigError(f"method {m.name!r} needs a diagonal scenario")

    def k_n(self, n: int) -> int:
        return self.truncation.k(n, self.scenario.delta1)

    def with_overrides(self, **kw) -> "BenchConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "sample_sizes" in kw:
            kw["sample_sizes"] = tuple(int(n) for n in kw["sample_sizes"])
        return replace(self, **kw)

    def to_dict(self) -> dict:
        rule = self.truncation.rule
        trunc = {"pinned": {str(n): k for n, k in self.truncation.pinned}}
        if rule is not None:
            trunc.update(
                rule=rule.kind.value,
                rounding=rule.rounding,
                e_prime=rule.e_prime,
                alpha=rule.alpha,
                offset=rule.offset,
            )
        else:
            trunc["rule"] = "pinned"
        scenario = self.scenario.to_dict()
        # replication seeds come from seed_base, not the scenario seed
        scenario.pop("seed")
        return {
            "scenario": {"id": self.scenario_id, **scenario},
            "truncation": trunc,
            "threshold": {"beta": self.threshold.beta, "rate": self.threshold.rate.value},
            "run": {
                "sample_sizes": list(self.sample_sizes),
                "replications": self.replications,
                "seed_base": self.seed_base,
                "workers": self.workers,
                "out_dir": self.out_dir,
                "error_norm": self.error_norm,
                "kernel_error_mode": self.kernel_error_mode.value,
                "grid_step": self.grid_step,
            },
            "methods": [{"name": m.name, "kind": m.kind, **m.params} for m in self.methods],
        }


_SCENARIO_KEYS = {"regime", "delta1", "delta2", "c1", "c2", "W", "invK", "M", "burn_in", "noise_offdiag"}
_RUN_KEYS = {
    "sample_sizes", "replications", "seed_base", "workers", "out_dir",
    "error_norm", "kernel_error_mode", "grid_step",
}


def _check_keys(table: dict, allowed: set, where: str):
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"[{where}] has unknown keys {sorted(unknown)}")


def _truncation(t: dict) -> Truncation:
    _check_keys(t, {"rule", "rounding", "alpha", "e_prime", "offset", "pinned"}, "truncation")
    pinned = tuple(sorted((int(n), int(k)) for n, k in t.get("pinned", {}).items()))
    if any(k < 1 for _, k in pinned):
        raise ConfigError("pinned k_n values must be >= 1")
    kind = t.get("rule", "log")
    if kind == "pinned":
        if not pinned:
            raise ConfigError("rule = 'pinned' needs a pinned table")
        return Truncation(None, pinned)
    try:
        rule = TruncationRule(
            kind=TruncationKind(kind),
            e_prime=float(t.get("e_prime", 1.7)),
            alpha=t.get("alpha"),
            rounding=t.get("rounding", "ceil"),
            offset=int(t.get("offset", 0)),
        )
    except ValueError as exc:
        raise ConfigError(f"[truncation]: {exc}") from None
    return Truncation(rule, pinned)


def config_from_dict(d: dict) -> BenchConfig:
    """Build and validate a :class:`BenchConfig` from parsed TOML."""
    _check_keys(d, {"scenario", "truncation", "threshold", "run", "methods"}, "top level")
    try:
        sc = dict(d.get("scenario", {}))
        scenario_id = str(sc.pop("id", "custom"))
        _check_keys(sc, _SCENARIO_KEYS, "scenario")
        spec = ScenarioSpec(**sc)
        th = d.get("threshold", {})
        _check_keys(th, {"beta", "rate"}, "threshold")
        threshold = ThresholdCurve(float(th.get("beta", 0.65)), th.get("rate", "half"))
        run = d.get("run", {})
        _check_keys(run, _RUN_KEYS, "run")
        methods = []
        for m in d.get("methods", []):
            m = dict(m)
            kind = m.pop("kind", None)
            name = str(m.pop("name", kind))
            methods.append(MethodSpec(name, kind, m))
        return BenchConfig(
            scenario_id=scenario_id,
            scenario=spec,
            methods=tuple(methods),
            sample_sizes=tuple(int(n) for n in run.get("sample_sizes", ())),
            replications=int(run.get("replications", 100)),
            threshold=threshold,
            truncation=_truncation(d.get("truncation", {})),
            seed_base=int(run.get("seed_base", 0)),
            workers=int(run.get("workers", 1)),
            out_dir=str(run.get("out_dir", "results")),
            error_norm=run.get("error_norm", "auto"),
            kernel_error_mode=KernelErrorMode(run.get("kernel_error_mode", "literal")),
            grid_step=float(run.get("grid_step", 0.01)),
        )
    except ConfigError:
        raise
    except (ARHError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> BenchConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def check_config(cfg: BenchConfig) -> list[str]:
    """Validate the scenario operators and every ``k_n``; returns summary lines."""
    try:
        validate(cfg.scenario)
    except ARHError as exc:
        raise ConfigError(f"scenario {cfg.scenario_id}: {exc}") from exc
    lines = [f"scenario {cfg.scenario_id}: {cfg.scenario.regime.value}, delta1={cfg.scenario.delta1}"]
    for n in cfg.sample_sizes:
        k = cfg.k_n(n)
        if k > cfg.scenario.M:
            raise ConfigError(f"k_n = {k} at n = {n} exceeds M = {cfg.scenario.M}")
        lines.append(f"n={n} k_n={k}")
    lines.append("methods: " + ", ".join(f"{m.name} ({m.kind})" for m in cfg.methods))
    return lines
