"""Packaged experiment configs reproducing the benchmark studies."""

from __future__ import annotations

from pathlib import Path

_HERE = Path(__file__).parent


def list_packaged_configs() -> list[str]:
    return sorted(p.stem for p in _HERE.glob("*.json"))


def packaged_config_path(name: str) -> Path:
    """Filesystem path of a packaged config, e.g. ``ishigami-g7``."""
    path = _HERE / f"{name}.json"
    if not path.exists():
        raise KeyError(f"no packaged config {name!r}; available: {list_packaged_configs()}")
    return path
