"""Electricity price signals: CSV/JSON ingestion, validation and synthetic days.

The on-disk CSV schema is ``index,p_buy,p_sell`` with prices in $/kWh.  The
sampling period ``h`` (hours) is not stored in the file and must be supplied
by the caller (CLI flag or config key).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

__all__ = [
    "PriceSignal",
    "PriceSignalError",
    "MissingColumnError",
    "NonNumericCellError",
    "KappaViolationError",
    "EmptySignalError",
    "PriceShape",
    "load_price_csv",
    "save_price_csv",
    "load_price_json",
    "save_price_json",
    "derive_sell_prices",
    "synthetic_day",
    "sample_day",
]


class PriceSignalError(ValueError):
    """Base class for malformed price data."""


class MissingColumnError(PriceSignalError):
    pass


class NonNumericCellError(PriceSignalError):
    pass


class KappaViolationError(PriceSignalError):
    """Sell price exceeds buy price somewhere (sell/buy ratio must stay <= 1)."""


class EmptySignalError(PriceSignalError):
    pass


@dataclass(frozen=True)
class PriceSignal:
    """Per-step buy/sell prices in $/kWh sampled every ``h`` hours."""

    p_buy: np.ndarray
    p_sell: np.ndarray
    h: float
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        p_buy = np.ascontiguousarray(self.p_buy, dtype=np.float64)
        p_sell = np.ascontiguousarray(self.p_sell, dtype=np.float64)
        p_buy.setflags(write=False)
        p_sell.setflags(write=False)
        object.__setattr__(self, "p_buy", p_buy)
        object.__setattr__(self, "p_sell", p_sell)
        if p_buy.ndim != 1 or p_sell.ndim != 1:
            raise PriceSignalError("price sequences must be one-dimensional")
        if len(p_buy) == 0:
            raise EmptySignalError("price signal has no steps")
        if len(p_sell) != len(p_buy):
            raise PriceSignalError(
                f"p_buy has {len(p_buy)} steps but p_sell has {len(p_sell)}"
            )
        if not self.h > 0:
            raise PriceSignalError(f"sampling period must be positive, got {self.h}")
        if not np.all(np.isfinite(p_buy)) or not np.all(np.isfinite(p_sell)):
            raise PriceSignalError("prices must be finite")
        if np.any(p_buy < 0) or np.any(p_sell < 0):
            raise PriceSignalError("prices must be non-negative")
        bad = np.nonzero(p_sell > p_buy)[0]
        if bad.size:
            i = int(bad[0])
            raise KappaViolationError(
                f"p_sell > p_buy at row {i} ({p_sell[i]} > {p_buy[i]}); "
                "the sell/buy ratio must not exceed 1"
            )
        if self.labels is not None and len(self.labels) != len(p_buy):
            raise PriceSignalError("labels length does not match price length")

    def __len__(self) -> int:
        return len(self.p_buy)

    @property
    def n_steps(self) -> int:
        return len(self.p_buy)

    @property
    def hours(self) -> float:
        """Total span covered by the signal, in hours."""
        return len(self.p_buy) * self.h


def load_price_csv(path, h: float) -> PriceSignal:
    """Read a ``index,p_buy,p_sell`` CSV into a validated :class:`PriceSignal`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptySignalError(f"{path}: file is empty") from None
        header = [col.strip() for col in header]
        for col in ("index", "p_buy", "p_sell"):
            if col not in header:
                raise MissingColumnError(f"{path}: missing column {col!r}")
        i_buy = header.index("p_buy")
        i_sell = header.index("p_sell")
        p_buy, p_sell = [], []
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                p_buy.append(float(row[i_buy]))
                p_sell.append(float(row[i_sell]))
            except (ValueError, IndexError):
                raise NonNumericCellError(
                    f"{path}: non-numeric cell in data row {lineno}: {row!r}"
                ) from None
    if not p_buy:
        raise EmptySignalError(f"{path}: no data rows below the header")
    return PriceSignal(np.array(p_buy), np.array(p_sell), h=h)


def save_price_csv(signal: PriceSignal, path) -> None:
    """Write a signal back to the CSV schema (9 significant digits)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "p_buy", "p_sell"])
        for i in range(len(signal)):
            writer.writerow([i, f"{signal.p_buy[i]:.9g}", f"{signal.p_sell[i]:.9g}"])


def load_price_json(path) -> PriceSignal:
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("h_hours", "p_buy", "p_sell"):
        if key not in doc:
            raise MissingColumnError(f"{path}: missing field {key!r}")
    return PriceSignal(np.array(doc["p_buy"], dtype=float),
                       np.array(doc["p_sell"], dtype=float),
                       h=float(doc["h_hours"]))


def save_price_json(signal: PriceSignal, path) -> None:
    doc = {
        "h_hours": signal.h,
        "p_buy": [float(v) for v in signal.p_buy],
        "p_sell": [float(v) for v in signal.p_sell],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def derive_sell_prices(p_buy, kappa: float) -> np.ndarray:
    """Scale buy prices by the sell/buy ratio ``kappa`` (must lie in [0, 1])."""
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    return np.asarray(p_buy, dtype=np.float64) * kappa


@dataclass(frozen=True)
class PriceShape:
    """Knobs for the synthetic two-peak day generator.

    Amplitudes act on the log of the price, so the generated signal is
    lognormal around a smooth double-peaked daily profile.
    """

    base: float = 0.045          # $/kWh floor of the daily profile
    peak1_time: float = 8.5      # morning peak centre, hours
    peak1_width: float = 1.8     # hours
    peak1_amp: float = 0.85      # log-scale amplitude
    peak2_time: float = 18.5     # evening peak centre, hours
    peak2_width: float = 2.2
    peak2_amp: float = 1.05
    noise_sigma: float = 0.22    # iid lognormal noise
    kappa: float = 1.0           # sell/buy ratio


def synthetic_day(seed: int, n_steps: int = 96, h: float = 0.25,
                  shape: PriceShape | None = None) -> PriceSignal:
    """Generate a deterministic synthetic price day with two intraday peaks."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    shape = shape or PriceShape()
    rng = np.random.default_rng(seed)
    t = (np.arange(n_steps) + 0.5) * h
    log_profile = (
        shape.peak1_amp * np.exp(-0.5 * ((t - shape.peak1_time) / shape.peak1_width) ** 2)
        + shape.peak2_amp * np.exp(-0.5 * ((t - shape.peak2_time) / shape.peak2_width) ** 2)
    )
    noise = rng.normal(0.0, shape.noise_sigma, size=n_steps)
    p_buy = shape.base * np.exp(log_profile + noise)
    p_sell = derive_sell_prices(p_buy, shape.kappa)
    return PriceSignal(p_buy, p_sell, h=h)


def sample_day() -> PriceSignal:
    """Bundled sample day: 96 steps at 15-minute resolution, sell = buy.

    A hand-shaped synthetic profile committed as package data (flat night,
    expensive morning plateau with a few cheap dips, a declining afternoon,
    an evening peak).  Shipped so case-study runs and their output files are
    reproducible; it is not measured market data.
    """
    ref = resources.files("flexarb.data").joinpath("sample_day.csv")
    with resources.as_file(ref) as path:
        return load_price_csv(path, h=0.25)
