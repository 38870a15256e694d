"""Shared fixtures: shipped configurations and their origin samples."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from finsleroid.background import load_config, sample

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def config_path(name: str) -> str:
    return str(CONFIG_DIR / f"{name}.cfg")


@pytest.fixture(scope="session")
def desk_field():
    return load_config(config_path("desk"))


@pytest.fixture(scope="session")
def desk(desk_field):
    """Origin sample of the constant reference background."""
    return sample(desk_field, np.zeros(4))


@pytest.fixture(scope="session")
def c09_field():
    return load_config(config_path("desk_c09"))


@pytest.fixture(scope="session")
def c09(c09_field):
    """Origin sample of the sub-unit preferred-norm background."""
    return sample(c09_field, np.zeros(4))
