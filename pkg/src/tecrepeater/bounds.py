"""Repeaterless benchmarks and the distance mapping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from tecrepeater.core import ChannelParams, CodeParams, binary_entropy

# 2 * 1.44, the small-transmission slope of the PLOB bound per photon pair
PLOB_SLOPE_X2 = 2.88


def _check_open(eta):
    a = np.asarray(eta, dtype=float)
    if np.any(a <= 0.0) or np.any(a >= 1.0):
        raise ValueError(f"transmission must lie in (0, 1), got {eta}")
    return a


def tgw(eta):
    """TGW bound ``log2((1 + eta) / (1 - eta))`` per mode."""
    a = _check_open(eta)
    out = (np.log1p(a) - np.log1p(-a)) / math.log(2.0)
    return float(out) if out.ndim == 0 else out


def plob(eta):
    """PLOB bound ``-log2(1 - eta)`` per mode.

    Evaluated with ``log1p`` so it stays accurate for the tiny overall
    transmissions of long chains.
    """
    a = _check_open(eta)
    out = -np.log1p(-a) / math.log(2.0)
    return float(out) if out.ndim == 0 else out


def direct_rate(eta):
    """Single-photon BB84 over the bare line, per mode (two modes per photon)."""
    a = np.asarray(eta, dtype=float)
    if np.any(a <= 0.0) or np.any(a > 1.0):
        raise ValueError(f"transmission must lie in (0, 1], got {eta}")
    out = 0.5 * a
    return float(out) if out.ndim == 0 else out


def total_distance_km(eta0: float, n_stations, l_att_km: float = 20.0):
    return -np.asarray(n_stations) * l_att_km * math.log(eta0)


def stations_for_distance(eta0: float, l_tot_km, l_att_km: float = 20.0):
    """Nearest station count (at least one) covering ``l_tot_km``."""
    n = np.rint(np.asarray(l_tot_km, dtype=float) / (-l_att_km * math.log(eta0))).astype(np.int64)
    n = np.maximum(n, 1)
    return int(n) if n.ndim == 0 else n


@dataclass(frozen=True)
class DistanceGrid:
    eta0: float
    n_values: tuple
    l_att_km: float = 20.0
    l_tot_km: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(
            self, "l_tot_km", tuple(float(x) for x in total_distance_km(self.eta0, self.n_values, self.l_att_km))
        )


def beat_plob_threshold(code: CodeParams, channel: ChannelParams, n_stations: int, q_n: float) -> float:
    """Station success probability needed to beat PLOB at long distance.

    ``eta0 * (2.88 N_p / (1 - 2 h(Q_N)))**(1/N)``; tends to ``eta0`` as the
    chain grows.

    Raises:
        ValueError: if ``1 - 2 h(q_n) <= 0`` (no key at all).
    """
    gain = 1.0 - 2.0 * binary_entropy(q_n)
    if gain <= 0.0:
        raise ValueError(f"no key at Q_N={q_n}: 1 - 2h(Q_N) = {gain}")
    if n_stations < 1:
        raise ValueError("n_stations must be positive")
    return channel.eta0 * (PLOB_SLOPE_X2 * code.n_p() / gain) ** (1.0 / n_stations)
