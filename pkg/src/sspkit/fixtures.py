"""Small instances shipped with the package (``chain``, ``coin``, ``fig1``, ``fig2``, ``negloop``)."""

from __future__ import annotations

from importlib import resources

from .io import loads_instance
from .model import SspInstance

NAMES = ("chain", "coin", "fig1", "fig2", "negloop")


def fixture_path(name: str):
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {NAMES}")
    return resources.files("sspkit") / "data" / f"{name}.json"


def load_fixture(name: str) -> SspInstance:
    return loads_instance(fixture_path(name).read_text())
