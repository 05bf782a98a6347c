"""Bundled example models."""

from __future__ import annotations

from importlib import resources

from .modelfile import Model, parse_model


def data_path(name: str):
    return resources.files("respgames") / "data" / name


def junction_text() -> str:
    return data_path("junction.csg").read_text(encoding="utf-8")


def load_junction() -> Model:
    """The two-vehicle junction game with rewards r1/r2 and profiles
    ``p_nb`` (nobody brakes), ``p_brake`` (both brake) and ``p_half``."""
    return parse_model(junction_text())
