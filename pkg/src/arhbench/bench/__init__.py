"""Comparative-study harness: configs, catalog, parallel runner, outputs, CLI."""
