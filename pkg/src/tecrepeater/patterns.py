"""Photon-loss pattern classes of the (n, m) parity block code.

A loss pattern is an ``n x m`` boolean matrix of lost positions.  Up to row
permutations and permutations inside each row, a pattern is fully described
by how many rows kept each number of photons.  ``PatternClass.counts[k]`` is
the number of rows that lost exactly ``k`` photons, for ``k = 0..m``; the
last entry counts rows that lost everything.  The conventional class vector
``u`` is ``counts[:m]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from tecrepeater.core import ChannelParams, CodeParams, binomial, multinomial


@dataclass(frozen=True)
class PatternClass:
    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError(f"negative row count in {self.counts}")

    @classmethod
    def from_u(cls, u: Sequence[int], code: CodeParams) -> "PatternClass":
        """Build a class from the length-``m`` vector; rows missing from the
        sum are taken to be fully lost."""
        u = tuple(int(x) for x in u)
        if len(u) != code.m:
            raise ValueError(f"u must have length m={code.m}, got {len(u)}")
        lost_rows = code.n - sum(u)
        if lost_rows < 0:
            raise ValueError(f"u={u} has more than n={code.n} rows")
        return cls(u + (lost_rows,))

    @property
    def m(self) -> int:
        return len(self.counts) - 1

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def u(self) -> tuple[int, ...]:
        return self.counts[:-1]

    @property
    def lost_rows(self) -> int:
        return self.counts[-1]

    @property
    def n_lp(self) -> int:
        """Number of lost photons."""
        return sum(k * c for k, c in enumerate(self.counts))

    @property
    def n_full(self) -> int:
        """Rows on which every photon arrived; only these join the X vote."""
        return self.counts[0]

    @property
    def acceptable(self) -> bool:
        return self.lost_rows == 0 and self.counts[0] >= 1

    def survivors(self) -> list[int]:
        """Surviving photon count of each row, ordered from fullest row down."""
        m = self.m
        out = []
        for k, c in enumerate(self.counts):
            out.extend([m - k] * c)
        return out

    @cached_property
    def omega(self) -> int:
        """Number of raw loss patterns in this class (exact)."""
        m = self.m
        out = multinomial(self.n, self.counts)
        for s, c in enumerate(self.counts):
            out *= math.comb(m, s) ** c
        return out

    def label(self) -> str:
        return "(" + ",".join(str(x) for x in self.u) + ")"


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    # weak compositions of ``total`` into ``parts`` pieces, first piece largest first
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_classes(code: CodeParams, acceptable_only: bool = False) -> list[PatternClass]:
    """All pattern classes of ``code`` in descending lexicographic order of
    ``counts`` (the lossless class first).

    Classes containing fully lost rows are included and flagged
    unacceptable unless ``acceptable_only`` is set.
    """
    out = [PatternClass(c) for c in _compositions(code.n, code.m + 1)]
    if acceptable_only:
        out = [c for c in out if c.acceptable]
    return out


def _check_class(u: PatternClass, code: CodeParams):
    if u.m != code.m or u.n != code.n:
        raise ValueError(f"class {u.counts} is inconsistent with code ({code.n}, {code.m})")


def multiplicity(u: PatternClass, code: CodeParams) -> int:
    _check_class(u, code)
    return u.omega


def loss_count_prob(code: CodeParams, channel: ChannelParams, n_lp: int) -> float:
    """Probability that exactly ``n_lp`` of the ``n*m`` photons are lost.

    Uses the effective transmission, so coupling loss is included.
    """
    total = code.n_p()
    if not 0 <= n_lp <= total:
        raise ValueError(f"n_lp must lie in [0, {total}], got {n_lp}")
    eta = channel.eta_eff()
    return binomial(total, n_lp) * eta ** (total - n_lp) * (1.0 - eta) ** n_lp


def class_prob_given_loss(u: PatternClass, code: CodeParams, n_lp: int) -> float:
    """Probability of class ``u`` given that ``n_lp`` photons were lost."""
    _check_class(u, code)
    if u.n_lp != n_lp:
        raise ValueError(f"class {u.counts} has {u.n_lp} lost photons, not {n_lp}")
    return u.omega / binomial(code.n_p(), n_lp)


def class_of(lost) -> PatternClass:
    """Classify a raw ``n x m`` loss matrix (``True`` marks a lost photon)."""
    lost = np.asarray(lost, dtype=bool)
    if lost.ndim != 2:
        raise ValueError("loss pattern must be a 2-D matrix")
    m = lost.shape[1]
    per_row = lost.sum(axis=1)
    counts = np.bincount(per_row, minlength=m + 1)
    return PatternClass(tuple(int(c) for c in counts))


def raw_patterns(code: CodeParams) -> Iterator[np.ndarray]:
    """Every ``n x m`` loss matrix; meant as a brute-force oracle for small codes."""
    if code.n_p() > 20:
        raise ValueError("exhaustive enumeration is limited to n*m <= 20")
    for bits in itertools.product((False, True), repeat=code.n_p()):
        yield np.array(bits, dtype=bool).reshape(code.n, code.m)


def directly_acceptable(lost) -> bool:
    """Acceptability read straight off a raw pattern: every row keeps a photon
    and at least one row is complete."""
    lost = np.asarray(lost, dtype=bool)
    keeps = ~lost
    return bool(keeps.any(axis=1).all() and keeps.all(axis=1).any())
