"""Parameters and elementary functions shared by every other module."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CodeParams:
    """The (n, m) parity block code: ``n`` sub-blocks of ``m`` photons each."""

    n: int
    m: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.m) != self.m:
            raise ValueError(f"n and m must be integers, got ({self.n}, {self.m})")
        if self.n < 2 or self.m < 2:
            raise ValueError(f"code requires n >= 2 and m >= 2, got ({self.n}, {self.m})")

    def n_p(self) -> int:
        """Physical qubits (photons) per logical qubit."""
        return self.n * self.m

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m}


@dataclass(frozen=True)
class ChannelParams:
    """Per-segment channel between neighbouring stations.

    Attributes:
        eta0: Transmission of one segment, in (0, 1).
        e: Physical bit- and phase-flip rate of every qubit, in [0, 0.5).
        eta_c: Coupling efficiency of each station, in (0, 1].
        l_att_km: Fibre attenuation length.
    """

    eta0: float
    e: float = 0.0
    eta_c: float = 1.0
    l_att_km: float = 20.0

    def __post_init__(self):
        if not 0.0 < self.eta0 < 1.0:
            raise ValueError(f"eta0 must lie in (0, 1), got {self.eta0}")
        if not 0.0 <= self.e < 0.5:
            raise ValueError(f"e must lie in [0, 0.5), got {self.e}")
        if not 0.0 < self.eta_c <= 1.0:
            raise ValueError(f"eta_c must lie in (0, 1], got {self.eta_c}")
        if not self.l_att_km > 0.0:
            raise ValueError(f"l_att_km must be positive, got {self.l_att_km}")

    def eta_eff(self) -> float:
        """Transmission seen by the error statistics (coupling loss included)."""
        return self.eta_c * self.eta0

    def unit_distance_km(self) -> float:
        """Fibre length of one segment; coupling loss does not change it."""
        return -self.l_att_km * math.log(self.eta0)

    def to_dict(self) -> dict:
        return {"eta0": self.eta0, "e": self.e, "eta_c": self.eta_c, "l_att_km": self.l_att_km}


@dataclass(frozen=True)
class ErrorPair:
    """Logical bit (``ez``) and phase (``ex``) error rates."""

    ez: float
    ex: float

    def __post_init__(self):
        for name, v in (("ez", self.ez), ("ex", self.ex)):
            if not 0.0 <= v <= 0.5 + 1e-12:
                raise ValueError(f"{name} must lie in [0, 1/2], got {v}")


def _check_unit(name, x):
    if np.any(np.asarray(x) < 0.0) or np.any(np.asarray(x) > 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def binary_entropy(x):
    """Binary entropy in bits, with ``h(0) = h(1) = 0``.

    Accepts scalars or arrays; returns a float for scalar input.

    >>> binary_entropy(0.5)
    1.0
    """
    _check_unit("x", x)
    arr = np.asarray(x, dtype=float)
    out = np.zeros_like(arr)
    inner = (arr > 0.0) & (arr < 1.0)
    xi = arr[inner]
    out[inner] = -xi * np.log2(xi) - (1.0 - xi) * np.log2(1.0 - xi)
    if out.ndim == 0:
        return float(out)
    return out


def compose_errors(e1, e2):
    """Error rate of two binary symmetric channels in series."""
    _check_unit("e1", e1)
    _check_unit("e2", e2)
    return e1 * (1.0 - e2) + e2 * (1.0 - e1)


def iterate_error(e0, n):
    """Net error of ``n`` identical binary symmetric channels in series."""
    _check_unit("e0", e0)
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if np.ndim(e0):
        return 0.5 * (1.0 - (1.0 - 2.0 * np.asarray(e0, dtype=float)) ** n)
    return 0.5 * (1.0 - (1.0 - 2.0 * float(e0)) ** n)


def binomial(a: int, b: int) -> int:
    """Exact binomial coefficient; zero outside ``0 <= b <= a``."""
    if b < 0 or b > a or a < 0:
        return 0
    return math.comb(a, b)


def multinomial(n: int, parts) -> int:
    """Exact multinomial coefficient ``n! / prod(k!)``; ``parts`` must sum to ``n``."""
    parts = [int(k) for k in parts]
    if any(k < 0 for k in parts) or sum(parts) != n:
        raise ValueError(f"parts {parts} do not partition {n}")
    out = 1
    left = n
    for k in parts:
        out *= math.comb(left, k)
        left -= k
    return out
