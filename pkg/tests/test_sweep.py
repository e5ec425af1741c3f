import csv
import io
import json
import math

import numpy as np
import pytest

from tecrepeater.bounds import plob, tgw
from tecrepeater.chain import ChainSpec, cg_rate, fg_rate
from tecrepeater.core import ChannelParams, CodeParams
from tecrepeater.station import build_station_table
from tecrepeater.sweep import (
    CSV_COLUMNS,
    GridSpec,
    MCSpec,
    cell_seed,
    crossing_range,
    positive_key_cutoff,
    ratio_contours,
    scan_region,
)

C22 = CodeParams(2, 2)
SMALL = GridSpec.ranges((0.85, 0.95, 0.05), (100.0, 700.0, 150.0))


def test_default_grid_shape():
    g = GridSpec()
    assert len(g.eta0) == 60 and len(g.l_tot_km) == 136
    assert g.eta0[0] == 0.7 and g.eta0[-1] == 0.995
    with pytest.raises(ValueError):
        GridSpec((1.0,), (10.0,))
    with pytest.raises(ValueError):
        GridSpec((0.9,), (0.0,))


def test_one_cell_matches_direct_calls():
    grid = GridSpec((0.9,), (442.0,))
    region = scan_region(C22, 5e-4, grid=grid, mc=MCSpec(2000, 3), dx_form="literal")
    n = int(region.n[0, 0])
    assert n == 210
    assert region.l_real_km[0, 0] == pytest.approx(-210 * 20 * math.log(0.9))
    table = build_station_table(C22, ChannelParams(0.9, 5e-4), "literal")
    spec = ChainSpec(table, n)
    assert region.r_cg[0, 0] == cg_rate(spec).r_per_mode
    fg = fg_rate(spec, "auto", 2000, cell_seed(3, 0, 0))
    assert region.r_fg[0, 0] == fg.r_per_mode
    assert region.fg_method[0, 0] == fg.method
    assert region.r_plob[0, 0] == pytest.approx(plob(0.9**n))
    assert region.r_tgw[0, 0] == pytest.approx(tgw(0.9**n))


def test_coupling_changes_rates_not_distance():
    grid = GridSpec((0.9,), (300.0,))
    a = scan_region(C22, 0.0, 1.0, grid, compute_fg=False)
    b = scan_region(C22, 0.0, 0.98, grid, compute_fg=False)
    assert a.n[0, 0] == b.n[0, 0]
    assert a.r_plob[0, 0] == b.r_plob[0, 0]
    assert b.r_cg[0, 0] < a.r_cg[0, 0]


def test_csv_and_json_outputs():
    region = scan_region(C22, 1e-3, grid=SMALL, mc=MCSpec(500, 1))
    text = region.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + region.n.size
    assert all(r[8] in ("true", "false") for r in rows[1:])
    assert "\r" not in text
    doc = json.loads(region.to_json())
    assert doc["metadata"]["code"] == {"n": 2, "m": 2}
    assert len(doc["cells"]) == region.n.size
    again = scan_region(C22, 1e-3, grid=SMALL, mc=MCSpec(500, 1))
    assert again.to_csv() == text


def test_workers_do_not_change_output():
    kw = dict(grid=SMALL, mc=MCSpec(500, 9))
    a = scan_region(CodeParams(3, 2), 1e-3, **kw)
    b = scan_region(CodeParams(3, 2), 1e-3, workers=3, **kw)
    assert a.to_csv() == b.to_csv()


def test_cg_only_leaves_fg_nan():
    region = scan_region(C22, 1e-3, grid=SMALL, compute_fg=False)
    assert np.all(np.isnan(region.r_fg))
    assert not region.fg_beats.any()


def test_ratio_contours():
    clean = scan_region(C22, 0.0, grid=SMALL, mc=MCSpec(200, 0))
    assert np.allclose(clean.ratio_r, 1.0)
    cs = ratio_contours(clean)
    assert not any(cs.nonempty(lv) for lv in cs.levels)
    noisy = scan_region(C22, 1e-3, grid=GridSpec.ranges((0.9, 0.95, 0.05), (900.0, 1300.0, 200.0)), mc=MCSpec(2000, 0))
    # far beyond the CG cutoff the map has FG-only cells
    assert noisy.fg_only.any()
    assert np.all(np.isnan(noisy.ratio_r[noisy.fg_only]))
    cs = ratio_contours(noisy, levels=(2.0,))
    assert np.all(cs.boundaries[2.0] <= cs.masks[2.0])
    empty = scan_region(C22, 0.0, grid=GridSpec((), ()))
    with pytest.raises(ValueError):
        ratio_contours(empty)


def test_cutoff_limits():
    assert positive_key_cutoff(C22, ChannelParams(0.9, 0.0), "CG", n_max=5000) == 5000
    assert positive_key_cutoff(C22, ChannelParams(0.9, 0.0), "FG", samples=200, n_max=3000) == 3000
    assert positive_key_cutoff(C22, ChannelParams(0.5, 0.2), "CG") == 0
    with pytest.raises(ValueError):
        positive_key_cutoff(C22, ChannelParams(0.9, 0.0), "XX")


def test_cutoff_is_the_boundary():
    ch = ChannelParams(0.9, 1e-3)
    n_star = positive_key_cutoff(C22, ch, "CG")
    table = build_station_table(C22, ch)
    assert cg_rate(ChainSpec(table, n_star)).k_logical > 0
    assert cg_rate(ChainSpec(table, n_star + 1)).k_logical == 0


def test_cutoff_monotone_in_noise_and_coupling():
    cuts = [positive_key_cutoff(C22, ChannelParams(0.9, e), "CG") for e in (2e-4, 5e-4, 1e-3, 2e-3)]
    assert cuts == sorted(cuts, reverse=True)
    cuts = [positive_key_cutoff(C22, ChannelParams(0.9, 5e-4, ec), "CG") for ec in (1.0, 0.99, 0.98)]
    assert cuts == sorted(cuts, reverse=True)


def test_crossing_range_shapes():
    n, beats, ratio = crossing_range(C22, ChannelParams(0.9, 5e-4), "CG", range(10, 200, 10), dx_form="literal")
    assert len(n) == len(beats) == len(ratio) == 19
    assert beats.any()
    assert np.all(beats == (ratio > 1))
