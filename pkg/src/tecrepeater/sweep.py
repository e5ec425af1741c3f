"""Region maps over unit transmission and total distance.

Each grid cell ``(eta0, L_tot)`` is evaluated with ``N = round(L_tot / L0)``
stations, where ``L0 = -L_att ln(eta0)``.  Coupling loss enters the station
statistics through ``eta_c * eta0`` but never the distance.  Cells whose FG
rate comes from Monte Carlo only count as beating PLOB when the estimate
minus three standard errors still exceeds the bound.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from tecrepeater.bounds import plob, stations_for_distance, tgw
from tecrepeater.chain import DEFAULT_SAMPLES, ChainSpec, cg_rate, fg_rate, fg_rate_monte_carlo
from tecrepeater.core import ChannelParams, CodeParams
from tecrepeater.station import DEFAULT_DX_FORM, build_station_table

SIGMA = 3.0
CSV_COLUMNS = (
    "eta0", "l_tot_km", "N", "r_fg", "r_fg_se", "r_cg", "r_plob", "r_tgw", "fg_beats", "cg_beats", "ratio_r",
)


def _frange(lo, hi, step):
    k = int(round((hi - lo) / step))
    return tuple(round(lo + i * step, 10) for i in range(k + 1))


@dataclass(frozen=True)
class GridSpec:
    eta0: tuple = _frange(0.70, 0.995, 0.005)
    l_tot_km: tuple = _frange(50.0, 1400.0, 10.0)

    @classmethod
    def ranges(cls, eta0=(0.70, 0.995, 0.005), l_tot_km=(50.0, 1400.0, 10.0)) -> "GridSpec":
        """Grid from ``(lo, hi, step)`` triples, both ends included."""
        return cls(_frange(*eta0), _frange(*l_tot_km))

    def __post_init__(self):
        for v in self.eta0:
            if not 0.0 < v < 1.0:
                raise ValueError(f"eta0 grid values must lie in (0, 1), got {v}")
        for v in self.l_tot_km:
            if not v > 0.0:
                raise ValueError(f"l_tot_km grid values must be positive, got {v}")

    def to_dict(self) -> dict:
        return {"eta0": list(self.eta0), "l_tot_km": list(self.l_tot_km)}


@dataclass(frozen=True)
class MCSpec:
    samples: int = DEFAULT_SAMPLES
    seed: int = 0

    def to_dict(self) -> dict:
        return {"samples": self.samples, "seed": self.seed}


def cell_seed(seed: int, i: int, j: int) -> int:
    """Seed of grid cell ``(i, j)``; independent of evaluation order."""
    return int(np.random.SeedSequence([seed, i, j]).generate_state(1, np.uint64)[0])


def _bound(fn, eta_tot):
    if eta_tot <= 0.0:
        return 0.0
    return fn(eta_tot)


@dataclass
class RegionMap:
    code: CodeParams
    e: float
    eta_c: float
    l_att_km: float
    dx_form: str
    grid: GridSpec
    mc: MCSpec
    n: np.ndarray
    l_real_km: np.ndarray
    r_fg: np.ndarray
    r_fg_se: np.ndarray
    r_cg: np.ndarray
    r_plob: np.ndarray
    r_tgw: np.ndarray
    fg_method: np.ndarray
    version: str = field(default="")

    def __post_init__(self):
        if not self.version:
            from tecrepeater import __version__

            self.version = __version__

    @property
    def shape(self):
        return self.n.shape

    @property
    def fg_beats(self) -> np.ndarray:
        se = np.nan_to_num(self.r_fg_se, nan=0.0)
        return (self.r_fg - SIGMA * se) > self.r_plob

    @property
    def cg_beats(self) -> np.ndarray:
        return self.r_cg > self.r_plob

    @property
    def ratio_r(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.r_cg > 0.0, self.r_fg / self.r_cg, np.nan)

    @property
    def fg_only(self) -> np.ndarray:
        """Cells with an FG key but no CG key (ratio undefined)."""
        return (self.r_cg <= 0.0) & (self.r_fg > 0.0)

    def metadata(self) -> dict:
        return {
            "tool": "tecrepeater",
            "version": self.version,
            "code": self.code.to_dict(),
            "e": self.e,
            "eta_c": self.eta_c,
            "l_att_km": self.l_att_km,
            "dx_form": self.dx_form,
            "grid": self.grid.to_dict(),
            "mc": self.mc.to_dict(),
        }

    def records(self):
        """One dict per cell in canonical order (eta0 index, then distance)."""
        fgb, cgb, ratio = self.fg_beats, self.cg_beats, self.ratio_r
        for i, eta0 in enumerate(self.grid.eta0):
            for j in range(len(self.grid.l_tot_km)):
                yield {
                    "eta0": eta0,
                    "l_tot_km": float(self.l_real_km[i, j]),
                    "N": int(self.n[i, j]),
                    "r_fg": float(self.r_fg[i, j]),
                    "r_fg_se": float(self.r_fg_se[i, j]),
                    "r_cg": float(self.r_cg[i, j]),
                    "r_plob": float(self.r_plob[i, j]),
                    "r_tgw": float(self.r_tgw[i, j]),
                    "fg_beats": bool(fgb[i, j]),
                    "cg_beats": bool(cgb[i, j]),
                    "ratio_r": float(ratio[i, j]),
                }

    def to_csv(self, fh=None) -> str:
        """Write the cell table; floats carry 9 significant digits."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in self.records():
            row = []
            for col in CSV_COLUMNS:
                v = rec[col]
                if isinstance(v, bool):
                    row.append("true" if v else "false")
                elif isinstance(v, int):
                    row.append(str(v))
                else:
                    row.append(format(v, ".9g"))
            writer.writerow(row)
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    def to_dict(self) -> dict:
        def clean(v):
            return None if isinstance(v, float) and math.isnan(v) else v

        return {
            "metadata": self.metadata(),
            "cells": [{k: clean(v) for k, v in rec.items()} for rec in self.records()],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def fg_components(self) -> int:
        """Number of 4-connected regions of FG-beating cells."""
        return int(ndimage.label(self.fg_beats)[1])


def _scan_row(args):
    code, e, eta_c, l_att, dx_form, eta0, i, l_values, mc, compute_fg, fg_method = args
    channel = ChannelParams(eta0, e, eta_c, l_att)
    table = build_station_table(code, channel, dx_form)
    l0 = channel.unit_distance_km()
    cols = len(l_values)
    out = {
        "n": np.zeros(cols, dtype=np.int64),
        "l_real": np.zeros(cols),
        "r_fg": np.full(cols, np.nan),
        "r_fg_se": np.full(cols, np.nan),
        "r_cg": np.zeros(cols),
        "r_plob": np.zeros(cols),
        "r_tgw": np.zeros(cols),
        "fg_method": np.full(cols, "", dtype=object),
    }
    for j, l_tot in enumerate(l_values):
        n = stations_for_distance(eta0, l_tot, l_att)
        spec = ChainSpec(table, n)
        eta_tot = math.exp(n * math.log(eta0))
        out["n"][j] = n
        out["l_real"][j] = n * l0
        out["r_cg"][j] = cg_rate(spec).r_per_mode
        out["r_plob"][j] = _bound(plob, eta_tot)
        out["r_tgw"][j] = _bound(tgw, eta_tot)
        if compute_fg:
            res = fg_rate(spec, fg_method, mc.samples, cell_seed(mc.seed, i, j))
            out["r_fg"][j] = res.r_per_mode
            out["r_fg_se"][j] = res.r_per_mode_se if res.std_err is not None else 0.0
            out["fg_method"][j] = res.method
    return i, out


def scan_region(
    code: CodeParams,
    e: float,
    eta_c: float = 1.0,
    grid: GridSpec = GridSpec(),
    mc: MCSpec = MCSpec(),
    dx_form: str = DEFAULT_DX_FORM,
    l_att_km: float = 20.0,
    compute_fg: bool = True,
    fg_method: str = "auto",
    workers: int = 1,
) -> RegionMap:
    """Evaluate FG, CG, PLOB and TGW rates on every grid cell.

    Args:
        compute_fg: Skip the fine-grained rate (left as NaN) when only CG
            regions are needed.
        fg_method: ``"auto"`` or a specific FG method name.
        workers: Processes to spread grid rows over; output does not depend on it.
    """
    shape = (len(grid.eta0), len(grid.l_tot_km))
    arrays = {
        "n": np.zeros(shape, dtype=np.int64),
        "l_real": np.zeros(shape),
        "r_fg": np.full(shape, np.nan),
        "r_fg_se": np.full(shape, np.nan),
        "r_cg": np.zeros(shape),
        "r_plob": np.zeros(shape),
        "r_tgw": np.zeros(shape),
        "fg_method": np.full(shape, "", dtype=object),
    }
    jobs = [
        (code, e, eta_c, l_att_km, dx_form, eta0, i, grid.l_tot_km, mc, compute_fg, fg_method)
        for i, eta0 in enumerate(grid.eta0)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_row, jobs))
    else:
        rows = [_scan_row(job) for job in jobs]
    for i, out in rows:
        for key, arr in arrays.items():
            arr[i] = out[key]
    return RegionMap(
        code=code,
        e=e,
        eta_c=eta_c,
        l_att_km=l_att_km,
        dx_form=dx_form,
        grid=grid,
        mc=mc,
        n=arrays["n"],
        l_real_km=arrays["l_real"],
        r_fg=arrays["r_fg"],
        r_fg_se=arrays["r_fg_se"],
        r_cg=arrays["r_cg"],
        r_plob=arrays["r_plob"],
        r_tgw=arrays["r_tgw"],
        fg_method=arrays["fg_method"],
    )


def _positive(code, channel, dx_form, method, n, samples, seed):
    table = build_station_table(code, channel, dx_form)
    spec = ChainSpec(table, n)
    if method == "CG":
        return cg_rate(spec).k_logical > 0.0
    res = fg_rate_monte_carlo(spec, samples, cell_seed(seed, n, 0))
    return res.k_logical - SIGMA * res.std_err > 0.0


def positive_key_cutoff(
    code: CodeParams,
    channel: ChannelParams,
    method: str = "CG",
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    dx_form: str = DEFAULT_DX_FORM,
    n_max: int = 1 << 20,
) -> int:
    """Largest station count with a positive key.

    CG uses the closed form; FG requires the Monte Carlo estimate to sit more
    than three standard errors above zero (seed derived from ``(seed, N)``).
    Doubling scan followed by bisection.  Returns 0 if even one station gives
    no key and ``n_max`` if the key never vanishes below it.
    """
    if method not in ("CG", "FG"):
        raise ValueError(f"method must be 'CG' or 'FG', got {method!r}")

    def ok(n):
        return _positive(code, channel, dx_form, method, n, samples, seed)

    if not ok(1):
        return 0
    lo = 1
    hi = 2
    while hi <= n_max and ok(hi):
        lo, hi = hi, hi * 2
    if hi > n_max:
        if ok(n_max):
            return n_max
        hi = n_max
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def crossing_range(code: CodeParams, channel: ChannelParams, which: str = "FG", n_values=None,
                   samples: int = DEFAULT_SAMPLES, seed: int = 0, dx_form: str = DEFAULT_DX_FORM):
    """Station counts at which the CG or FG per-mode rate beats PLOB.

    Returns ``(n_values, beats, ratio)`` where ``ratio`` is rate / PLOB.
    """
    table = build_station_table(code, channel, dx_form)
    if n_values is None:
        n_values = range(1, 1001)
    n_values = np.asarray(list(n_values))
    beats = np.zeros(len(n_values), dtype=bool)
    ratio = np.zeros(len(n_values))
    for k, n in enumerate(n_values):
        spec = ChainSpec(table, int(n))
        bound = _bound(plob, math.exp(n * math.log(channel.eta0)))
        if which == "CG":
            r, se = cg_rate(spec).r_per_mode, 0.0
        else:
            res = fg_rate(spec, "auto", samples, cell_seed(seed, int(n), 1))
            r, se = res.r_per_mode, res.r_per_mode_se or 0.0
        beats[k] = r - SIGMA * se > bound
        ratio[k] = r / bound if bound > 0 else math.inf
    return n_values, beats, ratio


@dataclass
class ContourSet:
    levels: tuple
    masks: dict
    boundaries: dict
    fg_only: np.ndarray

    def nonempty(self, level) -> bool:
        return bool(self.masks[level].any())


def ratio_contours(region: RegionMap, levels=(2.0, 4.0, 10.0)) -> ContourSet:
    """Cells at or above each ratio level, plus their boundary cells.

    The ratio FG/CG is only defined where the CG rate is positive; cells with
    an FG key but no CG key are returned separately in ``fg_only``.
    """
    if region.n.size == 0:
        raise ValueError("region map is empty")
    ratio = region.ratio_r
    masks, boundaries = {}, {}
    for level in levels:
        mask = np.nan_to_num(ratio, nan=-np.inf) >= level
        inner = ndimage.binary_erosion(mask, border_value=0)
        masks[level] = mask
        boundaries[level] = mask & ~inner
    return ContourSet(tuple(levels), masks, boundaries, region.fg_only)
