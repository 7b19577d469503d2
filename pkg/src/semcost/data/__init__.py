"""Bundled scenario and fixture files."""
from __future__ import annotations

from importlib import resources

BUILTIN_SCENARIOS = ("workzone", "mep", "cement")


def scenario_text(name: str) -> str:
    """Source text of a bundled scenario."""
    if name not in BUILTIN_SCENARIOS:
        raise KeyError(f"unknown bundled scenario '{name}' (have {', '.join(BUILTIN_SCENARIOS)})")
    return resources.files(__package__).joinpath(f"scenarios/{name}.json").read_text(encoding="utf-8")


def fixture_path(name: str):
    return resources.files(__package__).joinpath(f"fixtures/{name}.json")
