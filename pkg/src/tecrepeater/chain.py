"""Key rates of a chain of ``N`` identical segment-and-station pairs.

Four evaluation routes share one station table:

* ``CG``: coarse-grained, from the table averages ``p0`` and ``e0`` only.
* ``FG_exact``: brute-force sum over all ``l**N`` syndrome sequences,
  composing errors pairwise along each sequence.
* ``FG_multinomial``: the same sum grouped by how often each syndrome
  occurs, with errors from the closed product form.
* ``FG_monte_carlo``: sampled syndrome count vectors.

Rates per logical slot ``K`` and per optical mode ``K / (2 n m)`` are both
reported.  The BB84 sifting factor is not included.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from tecrepeater.core import binary_entropy, iterate_error
from tecrepeater.station import StationTable

METHODS = ("CG", "FG_exact", "FG_multinomial", "FG_monte_carlo")
EXACT_CAP = 10**7
MULTINOMIAL_CAP = 10**7
DEFAULT_SAMPLES = 10**5
MC_CHUNK = 1 << 14
RNG_ALGORITHM = "numpy.PCG64/SeedSequence(seed, spawn_key=(chunk,))"


class CapExceeded(RuntimeError):
    """The requested exact method would need more terms than allowed."""


@dataclass(frozen=True)
class ChainSpec:
    table: StationTable
    n_stations: int

    def __post_init__(self):
        if int(self.n_stations) != self.n_stations or self.n_stations < 1:
            raise ValueError(f"n_stations must be a positive integer, got {self.n_stations}")

    @property
    def modes(self) -> int:
        return 2 * self.table.code.n_p()


@dataclass(frozen=True)
class RateResult:
    k_logical: float
    r_per_mode: float
    method: str
    n_stations: int
    std_err: Optional[float] = None
    samples: Optional[int] = None
    seed: Optional[int] = None

    @property
    def r_per_mode_se(self) -> Optional[float]:
        if self.std_err is None:
            return None
        return self.std_err * self.r_per_mode / self.k_logical if self.k_logical else 0.0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n_stations": self.n_stations,
            "k_logical": self.k_logical,
            "r_per_mode": self.r_per_mode,
            "std_err": self.std_err,
            "r_per_mode_se": self.r_per_mode_se,
            "samples": self.samples,
            "seed": self.seed,
            "rng": RNG_ALGORITHM if self.method == "FG_monte_carlo" else None,
        }


def _result(spec: ChainSpec, k: float, method: str, **kw) -> RateResult:
    return RateResult(k, k / spec.modes, method, spec.n_stations, **kw)


def _informative(table: StationTable):
    w, ez, ex = table.arrays()
    keep = w > 0.0
    return w[keep], ez[keep], ex[keep]


def _bracket(ez, ex):
    return np.maximum(1.0 - binary_entropy(np.clip(ez, 0.0, 1.0)) - binary_entropy(np.clip(ex, 0.0, 1.0)), 0.0)


def cg_rate(spec: ChainSpec) -> RateResult:
    """Coarse-grained rate ``p0**N * max(1 - 2 h(Q_N), 0)``."""
    t = spec.table
    if t.p0 <= 0.0:
        return _result(spec, 0.0, "CG")
    q_n = iterate_error(t.e0, spec.n_stations)
    bracket = max(1.0 - 2.0 * binary_entropy(q_n), 0.0)
    k = math.exp(spec.n_stations * math.log(t.p0)) * bracket if bracket > 0 else 0.0
    return _result(spec, k, "CG")


def fg_rate_exact(spec: ChainSpec, cap: int = EXACT_CAP) -> RateResult:
    """Sum over every syndrome sequence.

    Errors are built by repeated pairwise composition along the sequence, so
    this route is independent of the product formula used elsewhere.

    Raises:
        CapExceeded: if ``l**N`` exceeds ``cap``.
    """
    w, ez, ex = _informative(spec.table)
    l, n = len(w), spec.n_stations
    if l == 0:
        return _result(spec, 0.0, "FG_exact")
    if l**n > cap:
        raise CapExceeded(
            f"FG_exact needs l**N = {l}**{n} terms (cap {cap}); use FG_multinomial or FG_monte_carlo"
        )
    # vectorise the last few stations, loop over prefixes of the rest
    tail = 1
    while tail < n and l ** (tail + 1) <= 1 << 16:
        tail += 1
    tw, tz, tx = np.ones(1), np.zeros(1), np.zeros(1)
    for _ in range(tail):
        tw = (tw[:, None] * w[None, :]).ravel()
        tz = (tz[:, None] * (1 - ez[None, :]) + ez[None, :] * (1 - tz[:, None])).ravel()
        tx = (tx[:, None] * (1 - ex[None, :]) + ex[None, :] * (1 - tx[:, None])).ravel()
    total = 0.0
    for prefix in itertools.product(range(l), repeat=n - tail):
        pw, pz, px = 1.0, 0.0, 0.0
        for i in prefix:
            pw *= w[i]
            pz = pz * (1 - ez[i]) + ez[i] * (1 - pz)
            px = px * (1 - ex[i]) + ex[i] * (1 - px)
        sz = pz * (1 - tz) + tz * (1 - pz)
        sx = px * (1 - tx) + tx * (1 - px)
        total += pw * float(np.sum(tw * _bracket(sz, sx)))
    return _result(spec, total, "FG_exact")


def count_compositions(n: int, l: int) -> int:
    return math.comb(n + l - 1, l - 1)


def _composition_blocks(n: int, l: int):
    """Yield arrays whose rows are weak compositions of ``n`` into ``l`` parts;
    the last two parts vary inside a block."""
    if l == 1:
        yield np.array([[n]], dtype=np.int64)
        return
    for head in _head_parts(n, l - 2):
        rest = n - sum(head)
        a = np.arange(rest + 1, dtype=np.int64)
        block = np.empty((rest + 1, l), dtype=np.int64)
        block[:, : l - 2] = head
        block[:, l - 2] = a
        block[:, l - 1] = rest - a
        yield block


def _head_parts(n, k):
    # all k-tuples of nonnegative ints with sum <= n
    if k == 0:
        yield ()
        return
    for first in range(n + 1):
        for rest in _head_parts(n - first, k - 1):
            yield (first,) + rest


def _composed_error(counts, log_terms):
    # eps = (1 - prod (1-2 eps_i)^N_i) / 2, evaluated as -expm1(sum)/2
    with np.errstate(invalid="ignore"):
        s = np.where(counts > 0, counts * log_terms[None, :], 0.0).sum(axis=1)
    return -0.5 * np.expm1(s)


def _log_one_minus_two(eps):
    with np.errstate(divide="ignore"):
        return np.log1p(-2.0 * np.asarray(eps))


def fg_rate_multinomial(spec: ChainSpec, cap: int = MULTINOMIAL_CAP) -> RateResult:
    """Sum over syndrome count vectors with multinomial weights.

    Raises:
        CapExceeded: if the number of count vectors exceeds ``cap``.
    """
    w, ez, ex = _informative(spec.table)
    l, n = len(w), spec.n_stations
    if l == 0:
        return _result(spec, 0.0, "FG_multinomial")
    terms = count_compositions(n, l)
    if terms > cap:
        raise CapExceeded(f"FG_multinomial needs {terms} count vectors (cap {cap}); use FG_monte_carlo")
    log_w = np.log(w)
    lz, lx = _log_one_minus_two(ez), _log_one_minus_two(ex)
    base = gammaln(n + 1)
    total = 0.0
    for counts in _composition_blocks(n, l):
        log_weight = base - gammaln(counts + 1).sum(axis=1) + counts @ log_w
        b = _bracket(_composed_error(counts, lz), _composed_error(counts, lx))
        total += float(np.sum(np.exp(log_weight) * b))
    return _result(spec, total, "FG_multinomial")


def fg_rate_monte_carlo(spec: ChainSpec, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> RateResult:
    """Monte Carlo estimate ``p0**N * mean(max(1 - h(ez) - h(ex), 0))`` over
    count vectors drawn from ``Multinomial(N, w / p0)``.

    Sample chunk ``k`` uses ``PCG64(SeedSequence(seed, spawn_key=(k,)))``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    w, ez, ex = _informative(spec.table)
    n = spec.n_stations
    if len(w) == 0:
        return _result(spec, 0.0, "FG_monte_carlo", std_err=0.0, samples=samples, seed=seed)
    p0 = float(w.sum())
    probs = w / p0
    lz, lx = _log_one_minus_two(ez), _log_one_minus_two(ex)
    s1 = s2 = 0.0
    done = 0
    chunk = 0
    while done < samples:
        size = min(MC_CHUNK, samples - done)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))
        counts = rng.multinomial(n, probs, size=size)
        b = _bracket(_composed_error(counts, lz), _composed_error(counts, lx))
        s1 += float(b.sum())
        s2 += float(np.dot(b, b))
        done += size
        chunk += 1
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    scale = math.exp(n * math.log(p0))
    return _result(
        spec,
        scale * mean,
        "FG_monte_carlo",
        std_err=scale * math.sqrt(var / samples),
        samples=samples,
        seed=seed,
    )


def select_fg_method(spec: ChainSpec, exact_cap: int = EXACT_CAP, multinomial_cap: int = MULTINOMIAL_CAP) -> str:
    l = int(np.count_nonzero(spec.table.arrays()[0] > 0))
    if l**spec.n_stations <= exact_cap:
        return "FG_exact"
    if count_compositions(spec.n_stations, max(l, 1)) <= multinomial_cap:
        return "FG_multinomial"
    return "FG_monte_carlo"


def fg_rate(spec: ChainSpec, method: str = "auto", samples: int = DEFAULT_SAMPLES, seed: int = 0, **caps) -> RateResult:
    """Fine-grained rate; ``method="auto"`` picks the cheapest exact route
    that fits under the caps and falls back to Monte Carlo."""
    if method == "auto":
        method = select_fg_method(spec, **caps)
    if method == "FG_exact":
        return fg_rate_exact(spec, caps.get("exact_cap", EXACT_CAP))
    if method == "FG_multinomial":
        return fg_rate_multinomial(spec, caps.get("multinomial_cap", MULTINOMIAL_CAP))
    if method == "FG_monte_carlo":
        return fg_rate_monte_carlo(spec, samples, seed)
    raise ValueError(f"unknown FG method {method!r}")


def chain_rate(spec: ChainSpec, method: str = "auto", samples: int = DEFAULT_SAMPLES, seed: int = 0, **caps) -> RateResult:
    """Dispatch on ``method``: ``"CG"``, one of the FG methods, or ``"auto"``
    (fine-grained, automatic route)."""
    if method == "CG":
        return cg_rate(spec)
    return fg_rate(spec, method, samples, seed, **caps)
