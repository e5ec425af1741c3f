import dataclasses
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tecrepeater.chain import (
    CapExceeded,
    ChainSpec,
    cg_rate,
    chain_rate,
    count_compositions,
    fg_rate_exact,
    fg_rate_monte_carlo,
    fg_rate_multinomial,
    select_fg_method,
)
from tecrepeater.core import ChannelParams, CodeParams, ErrorPair, binary_entropy, compose_errors, iterate_error
from tecrepeater.station import StationStats, StationTable, build_station_table, table_key

C22 = CodeParams(2, 2)
T22 = build_station_table(C22, ChannelParams(0.9, 5e-4))


def synthetic(w, ez, ex, code=C22):
    base = build_station_table(code, ChannelParams(0.9, 0.0))
    rows = tuple(
        StationStats(base.rows[i % len(base.rows)].pattern, wi, ErrorPair(zi, xi))
        for i, (wi, zi, xi) in enumerate(zip(w, ez, ex))
    )
    return StationTable(code, ChannelParams(0.9, 0.0), rows)


def test_cg_examples():
    t0 = build_station_table(C22, ChannelParams(0.9, 0.0))
    assert cg_rate(ChainSpec(t0, 7)).k_logical == pytest.approx(t0.p0**7)
    one = cg_rate(ChainSpec(T22, 1)).k_logical
    assert one == pytest.approx(T22.p0 * max(1 - 2 * binary_entropy(T22.e0), 0))
    noisy = synthetic([0.9], [0.2], [0.2])
    assert cg_rate(ChainSpec(noisy, 3)).k_logical == 0.0


def test_rate_result_per_mode():
    r = cg_rate(ChainSpec(T22, 50))
    assert r.r_per_mode == pytest.approx(r.k_logical / 8)
    assert 0 <= r.k_logical <= 1
    d = r.to_dict()
    assert d["method"] == "CG" and d["n_stations"] == 50


def test_fg_exact_single_station_and_zero_error():
    assert fg_rate_exact(ChainSpec(T22, 1)).k_logical == pytest.approx(table_key(T22), rel=1e-14)
    t0 = build_station_table(CodeParams(3, 2), ChannelParams(0.8, 0.0))
    assert fg_rate_exact(ChainSpec(t0, 5)).k_logical == pytest.approx(t0.p0**5, rel=1e-12)


def test_fg_exact_hand_expansion():
    (w1, w2), (z1, z2), (x1, x2) = T22.arrays()
    w, ez, ex = [w1, w2], [z1, z2], [x1, x2]
    total = 0.0
    for i, j in itertools.product(range(2), repeat=2):
        b = 1 - binary_entropy(compose_errors(ez[i], ez[j])) - binary_entropy(compose_errors(ex[i], ex[j]))
        total += w[i] * w[j] * max(b, 0.0)
    assert fg_rate_exact(ChainSpec(T22, 2)).k_logical == pytest.approx(total, rel=1e-14)


def test_fg_exact_cap():
    with pytest.raises(CapExceeded):
        fg_rate_exact(ChainSpec(T22, 30))
    with pytest.raises(CapExceeded):
        fg_rate_multinomial(ChainSpec(build_station_table(CodeParams(4, 3), ChannelParams(0.9, 1e-3)), 300))


def _tables_up_to_l4():
    out = []
    for code in (CodeParams(2, 2), CodeParams(3, 2), CodeParams(2, 3), CodeParams(4, 2)):
        for eta, e in ((0.9, 5e-4), (0.8, 0.01), (0.95, 0.08)):
            t = build_station_table(code, ChannelParams(eta, e))
            out.append(t)
    out.append(dataclasses.replace(T22, rows=T22.rows[:1]))
    return out


@pytest.mark.parametrize("table", _tables_up_to_l4(), ids=lambda t: f"{t.code.n}x{t.code.m}-{t.channel.eta0}-{t.channel.e}-l{len(t)}")
def test_exact_equals_multinomial(table):
    assert len(table) <= 4
    for n in range(1, 7):
        spec = ChainSpec(table, n)
        assert fg_rate_exact(spec).k_logical == pytest.approx(fg_rate_multinomial(spec).k_logical, abs=1e-12)


def test_multinomial_concentrated_counts_reduce_to_iterate():
    t = synthetic([0.7], [0.002], [0.004])
    k = fg_rate_multinomial(ChainSpec(t, 9)).k_logical
    assert k > 0
    expected = 0.7**9 * (1 - binary_entropy(iterate_error(0.002, 9)) - binary_entropy(iterate_error(0.004, 9)))
    assert k == pytest.approx(expected, rel=1e-12)


def test_multinomial_weights_sum():
    # all-zero errors make every bracket 1, leaving only the weights
    t = synthetic([0.5, 0.3, 0.1], [0, 0, 0], [0, 0, 0])
    assert fg_rate_multinomial(ChainSpec(t, 40)).k_logical == pytest.approx(0.9**40, rel=1e-12)


@given(st.lists(st.tuples(st.floats(0.01, 0.5), st.floats(0, 0.3), st.floats(0, 0.3)), min_size=1, max_size=4),
       st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_product_form_equals_iterated_compose(rows, n):
    w = [r[0] for r in rows]
    ez = [r[1] for r in rows]
    ex = [r[2] for r in rows]
    t = synthetic(w, ez, ex)
    spec = ChainSpec(t, n)
    assert fg_rate_exact(spec).k_logical == pytest.approx(fg_rate_multinomial(spec).k_logical, abs=1e-12)
    for seq in itertools.islice(itertools.product(range(len(rows)), repeat=n), 50):
        folded = 0.0
        for i in seq:
            folded = compose_errors(folded, ez[i])
        counts = np.bincount(seq, minlength=len(rows))
        prod_form = 0.5 * (1 - np.prod((1 - 2 * np.array(ez)) ** counts))
        assert prod_form == pytest.approx(folded, abs=1e-12)


def test_monte_carlo_zero_error_no_variance():
    t0 = build_station_table(C22, ChannelParams(0.9, 0.0))
    r = fg_rate_monte_carlo(ChainSpec(t0, 25), samples=1000, seed=1)
    assert r.k_logical == pytest.approx(t0.p0**25)
    assert r.std_err == pytest.approx(0.0, abs=1e-18)


def test_monte_carlo_deterministic():
    spec = ChainSpec(T22, 120)
    a = fg_rate_monte_carlo(spec, 20_000, seed=4)
    b = fg_rate_monte_carlo(spec, 20_000, seed=4)
    assert a == b
    assert fg_rate_monte_carlo(spec, 20_000, seed=5).k_logical != a.k_logical
    with pytest.raises(ValueError):
        fg_rate_monte_carlo(spec, 0)


@pytest.mark.parametrize("n", [10, 50, 150])
def test_monte_carlo_matches_multinomial_small_grid(n):
    t = build_station_table(CodeParams(3, 2), ChannelParams(0.85, 1e-3))
    spec = ChainSpec(t, n)
    exact = fg_rate_multinomial(spec).k_logical
    mc = fg_rate_monte_carlo(spec, 50_000, seed=n)
    assert abs(mc.k_logical - exact) <= 3 * mc.std_err


@pytest.mark.parametrize("code", [CodeParams(2, 2), CodeParams(3, 2), CodeParams(3, 3)])
@pytest.mark.parametrize("e", [1e-4, 1e-3, 5e-3])
def test_fg_never_below_cg(code, e):
    t = build_station_table(code, ChannelParams(0.9, e))
    for n in (1, 5, 20, 80, 200):
        spec = ChainSpec(t, n)
        fg = chain_rate(spec, "auto", samples=20_000, seed=n)
        cg = cg_rate(spec)
        assert fg.k_logical + 3 * (fg.std_err or 0.0) >= cg.k_logical * (1 - 1e-12)
        assert 0 <= cg.r_per_mode <= 1 / (2 * code.n_p())
        assert 0 <= fg.r_per_mode <= 1 / (2 * code.n_p()) + 3 * (fg.r_per_mode_se or 0)


def test_rate_decreases_with_n():
    prev_fg = prev_cg = math.inf
    for n in range(1, 60):
        spec = ChainSpec(T22, n)
        fg = fg_rate_multinomial(spec).k_logical
        cg = cg_rate(spec).k_logical
        assert fg < prev_fg and cg <= prev_cg
        prev_fg, prev_cg = fg, cg


def test_auto_selection():
    assert select_fg_method(ChainSpec(T22, 10)) == "FG_exact"
    assert select_fg_method(ChainSpec(T22, 500)) == "FG_multinomial"
    t43 = build_station_table(CodeParams(4, 3), ChannelParams(0.97, 1e-3))
    assert len(t43) == 10
    assert select_fg_method(ChainSpec(t43, 500)) == "FG_monte_carlo"
    assert count_compositions(500, 10) > 10**7
    with pytest.raises(ValueError):
        chain_rate(ChainSpec(T22, 3), "bogus")
    with pytest.raises(ValueError):
        ChainSpec(T22, 0)
