"""Price-signal ingestion, validation, and generator tests."""

import json

import numpy as np
import pytest

from flexarb.pricing import (EmptySignalError, KappaViolationError,
                             MissingColumnError, NonNumericCellError,
                             PriceShape, PriceSignal, PriceSignalError,
                             derive_sell_prices, load_price_csv,
                             load_price_json, sample_day, save_price_csv,
                             save_price_json, synthetic_day)


def write_csv(path, rows, header="index,p_buy,p_sell"):
    path.write_text(header + "\n" + "\n".join(rows) + ("\n" if rows else ""))


def test_load_96_row_file(tmp_path):
    f = tmp_path / "day.csv"
    write_csv(f, [f"{i},{0.1 + i * 0.001},{0.05 + i * 0.001}"
                  for i in range(96)])
    signal = load_price_csv(f, h=0.25)
    assert signal.n_steps == 96
    assert signal.hours == pytest.approx(24.0)
    assert signal.p_buy[0] == pytest.approx(0.1)


def test_missing_column_named(tmp_path):
    f = tmp_path / "bad.csv"
    write_csv(f, ["0,0.1"], header="index,p_buy")
    with pytest.raises(MissingColumnError, match="p_sell"):
        load_price_csv(f, h=0.25)


def test_non_numeric_cell_rejected(tmp_path):
    f = tmp_path / "bad.csv"
    write_csv(f, ["0,0.1,0.1", "1,oops,0.1"])
    with pytest.raises(NonNumericCellError, match="row 2"):
        load_price_csv(f, h=0.25)


def test_kappa_violation_names_row(tmp_path):
    f = tmp_path / "bad.csv"
    write_csv(f, ["0,0.2,0.1", "1,0.2,0.3"])
    with pytest.raises(KappaViolationError, match="row 1"):
        load_price_csv(f, h=0.25)


def test_header_only_file_is_empty_signal(tmp_path):
    f = tmp_path / "empty.csv"
    write_csv(f, [])
    with pytest.raises(EmptySignalError):
        load_price_csv(f, h=0.25)


def test_fully_empty_file_is_empty_signal(tmp_path):
    f = tmp_path / "zero.csv"
    f.write_text("")
    with pytest.raises(EmptySignalError):
        load_price_csv(f, h=0.25)


def test_csv_roundtrip_exact_to_nine_digits(tmp_path):
    rng = np.random.default_rng(4)
    p_buy = rng.uniform(0.01, 0.5, 96)
    signal = PriceSignal(p_buy=p_buy, p_sell=0.8 * p_buy, h=0.25)
    f = tmp_path / "rt.csv"
    save_price_csv(signal, f)
    back = load_price_csv(f, h=0.25)
    assert np.abs(back.p_buy - signal.p_buy).max() <= 1e-9 * 0.5
    assert np.abs(back.p_sell - signal.p_sell).max() <= 1e-9 * 0.5


def test_json_roundtrip_is_exact(tmp_path):
    signal = synthetic_day(8, n_steps=24)
    f = tmp_path / "rt.json"
    save_price_json(signal, f)
    back = load_price_json(f)
    assert back.h == signal.h
    assert np.array_equal(back.p_buy, signal.p_buy)
    assert np.array_equal(back.p_sell, signal.p_sell)
    doc = json.loads(f.read_text())
    assert set(doc) == {"h_hours", "p_buy", "p_sell"}


def test_json_missing_field_named(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps({"h_hours": 0.25, "p_buy": [0.1]}))
    with pytest.raises(MissingColumnError, match="p_sell"):
        load_price_json(f)


def test_derive_sell_prices_scaling():
    p = np.array([0.2, 0.4])
    assert np.array_equal(derive_sell_prices(p, 1.0), p)
    assert np.array_equal(derive_sell_prices(p, 0.0), np.zeros(2))
    assert np.allclose(derive_sell_prices(p, 0.5), [0.1, 0.2])
    with pytest.raises(ValueError):
        derive_sell_prices(p, 1.2)
    with pytest.raises(ValueError):
        derive_sell_prices(p, -0.1)


def test_synthetic_day_deterministic_and_valid():
    a = synthetic_day(42)
    b = synthetic_day(42)
    assert np.array_equal(a.p_buy, b.p_buy)
    assert np.array_equal(a.p_sell, b.p_sell)
    c = synthetic_day(43)
    assert not np.array_equal(a.p_buy, c.p_buy)
    assert a.n_steps == 96 and a.hours == pytest.approx(24.0)
    assert (a.p_buy > 0).all()


def test_synthetic_day_kappa_respected():
    shape = PriceShape(kappa=0.8)
    signal = synthetic_day(1, shape=shape)
    assert np.allclose(signal.p_sell, 0.8 * signal.p_buy)
    assert (signal.p_sell <= signal.p_buy).all()


def test_signal_invariants_rejected():
    with pytest.raises(PriceSignalError):
        PriceSignal(p_buy=[0.1], p_sell=[0.1], h=0.0)
    with pytest.raises(PriceSignalError):
        PriceSignal(p_buy=[0.1, 0.2], p_sell=[0.1], h=0.25)
    with pytest.raises(PriceSignalError):
        PriceSignal(p_buy=[-0.1], p_sell=[-0.2], h=0.25)
    with pytest.raises(PriceSignalError):
        PriceSignal(p_buy=[np.nan], p_sell=[0.0], h=0.25)
    with pytest.raises(KappaViolationError):
        PriceSignal(p_buy=[0.1], p_sell=[0.2], h=0.25)
    with pytest.raises(EmptySignalError):
        PriceSignal(p_buy=[], p_sell=[], h=0.25)
    with pytest.raises(PriceSignalError):
        PriceSignal(p_buy=[0.1], p_sell=[0.1], h=0.25, labels=("a", "b"))


def test_prices_are_immutable():
    signal = synthetic_day(2, n_steps=8)
    with pytest.raises(ValueError):
        signal.p_buy[0] = 99.0


def test_sample_day_shape():
    signal = sample_day()
    assert signal.n_steps == 96
    assert signal.h == 0.25
    assert (signal.p_sell <= signal.p_buy).all()
    assert (signal.p_buy > 0).all()
    # the committed file must stay byte-stable across loads
    again = sample_day()
    assert np.array_equal(signal.p_buy, again.p_buy)
