"""Shared fixtures: reference markets and the utility catalog."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from superhedge import (build_market, build_utility, conjugate,
                        exponential_utility)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

TRINOMIAL_CONFIG = {
    "assets": 1,
    "tree": [
        {"id": "root", "parent": None, "p": 1.0, "prices": [1.0]},
        {"id": "up", "parent": "root", "p": 1.0 / 3.0, "prices": [2.0]},
        {"id": "mid", "parent": "root", "p": 1.0 / 3.0, "prices": [1.0]},
        {"id": "down", "parent": "root", "p": 1.0 / 3.0, "prices": [0.5]},
    ],
}


def load_fixture(relpath):
    with open(FIXTURES / relpath, "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def trinomial():
    """One period, one asset, states (2, 1, 1/2) from spot 1, uniform P."""
    return build_market(TRINOMIAL_CONFIG)


@pytest.fixture(scope="session")
def binomial2():
    return build_market(load_fixture("binomial2.json"))


@pytest.fixture(scope="session")
def complete_binomial():
    return build_market(load_fixture("complete_binomial.json"))


@pytest.fixture(scope="session")
def catalog():
    """kind -> (utility, conjugate pair) for the whole shipped catalog."""
    out = {}
    for kind in ("exponential", "log", "power", "glued_unbounded",
                 "slow_loss"):
        u = build_utility({"kind": kind, "params": {}})
        out[kind] = (u, conjugate(u))
    return out


@pytest.fixture(scope="session")
def exp_pair():
    return conjugate(exponential_utility())
