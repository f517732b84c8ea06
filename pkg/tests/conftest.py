"""Shared fixtures and helpers for the test suite."""

import re
from pathlib import Path

import numpy as np
import pytest

from flexarb.pricing import PriceSignal
from flexarb.storage import StorageParams

GOLDEN_DIR = Path(__file__).parent / "golden"


def parse_lp_dump(path):
    """Parse the plain-text LP dump format into a dict of arrays."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    m_match = re.fullmatch(r"lp rows=(\d+) cols=(\d+)", lines[0])
    if not m_match:
        raise ValueError(f"bad header line: {lines[0]!r}")
    rows, cols = int(m_match.group(1)), int(m_match.group(2))
    out = {"rows": rows, "cols": cols}
    i = 1
    for name in ("f", "b", "lb", "ub"):
        tag, rest = lines[i].split(" ", 1)
        if tag != name:
            raise ValueError(f"expected {name} line, got {lines[i]!r}")
        out[name] = np.array([float(v) for v in rest.split()])
        i += 1
    if lines[i] != "A":
        raise ValueError(f"expected A marker, got {lines[i]!r}")
    i += 1
    out["A"] = np.array([[float(v) for v in lines[i + r].split()]
                         for r in range(rows)])
    i += rows
    out["row_labels"] = out["col_labels"] = None
    while i < len(lines):
        tag, rest = lines[i].split(" ", 1)
        out[tag[:-1] + "_labels" if tag in ("rows", "cols") else tag] = \
            tuple(rest.split())
        i += 1
    return out


def two_step_prices(p1=0.1, p2=0.5, h=0.25, kappa=1.0):
    p = np.array([p1, p2])
    return PriceSignal(p_buy=p, p_sell=kappa * p, h=h)


def simple_battery(**overrides):
    """A lossless 1 kWh battery able to swing fully each step."""
    fields = dict(b_min=0.0, b_max=1.0, b_0=0.0, delta_min=-4.0,
                  delta_max=4.0)
    fields.update(overrides)
    return StorageParams(**fields)


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN_DIR


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
