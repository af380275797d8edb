"""Bundled example inputs."""

from __future__ import annotations

from pathlib import Path

TOY_DIR = Path(__file__).resolve().parent / "toy"


def toy_scenario_path() -> Path:
    """Path of the three-bus toy scenario config."""
    return TOY_DIR / "scenario.json"
