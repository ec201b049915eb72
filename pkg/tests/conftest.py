import math

import pytest

from src.graph_models import parse_model


@pytest.fixture
def tree4():
    return parse_model("fixed-end-tree:k=4")


@pytest.fixture
def oriented():
    return parse_model("oriented-tree-112")


@pytest.fixture
def product():
    return parse_model("tree-x-lattice:k=4,d=1")


@pytest.fixture
def grandparent():
    return parse_model("grandparent:k=3")


@pytest.fixture
def within_se():
    """Check a Monte Carlo mean against an exact value with an SE tolerance"""

    def check(mean: float, se: float, exact: float, k: float = 4.0, floor: float = 1e-12) -> None:
        assert math.isfinite(mean)
        assert abs(mean - exact) <= k * se + floor, f"{mean} +- {se} vs {exact}"

    return check


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    """Keep TILTLAB_* variables and stray .env files out of every test"""
    import os

    for name in list(os.environ):
        if name.startswith("TILTLAB_"):
            monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
