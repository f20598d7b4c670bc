"""Example systems shipped with the package."""

from __future__ import annotations

from importlib import resources

from ptast.ptrs import PTRS, parse_ptrs


def names() -> list[str]:
    files = resources.files(__name__).iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".ptrs"))


def text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.ptrs").read_text(encoding="utf-8")


def load(name: str) -> PTRS:
    return parse_ptrs(text(name), name)
