"""Analytic statistics of a single TEC station.

For every acceptable loss class the station either produces a conclusive
logical Bell outcome or discards the slot.  The logical X outcome is a
majority vote over the parities of the complete rows; the logical Z outcome
is the parity of per-row majority votes over the surviving photons.  Both
votes discard draws.

Two readings of the X-vote draw probability are supported through
``dx_form``:

``"consistent"``
    ``C(n_M, n_M/2) [f (1 - f)]^(n_M/2)``, where ``1 - f`` is the flip
    probability of a row parity.  This is the exact draw probability of the
    vote and is what the bit-level oracle measures.
``"literal"``
    ``C(n_M, n_M/2) [e (1 - e)]^(n_M/2)``, the raw-qubit form.  It does not
    describe the vote exactly but is the form the reference key-rate curves
    follow, so region and cutoff reproductions use it.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from tecrepeater.core import ChannelParams, CodeParams, ErrorPair, binary_entropy
from tecrepeater.patterns import PatternClass, enumerate_classes

DX_FORMS = ("consistent", "literal")
DEFAULT_DX_FORM = "consistent"


def _check_dx(dx_form):
    if dx_form not in DX_FORMS:
        raise ValueError(f"dx_form must be one of {DX_FORMS}, got {dx_form!r}")


def subblock_parity_fidelity(m: int, e: float) -> float:
    """Probability that the X parity of a complete row of ``m`` photons is
    read correctly, i.e. an even number of its outcomes flipped."""
    return sum(math.comb(m, 2 * k) * (1 - e) ** (m - 2 * k) * e ** (2 * k) for k in range(m // 2 + 1))


def _parity_flip(m: int, e: float) -> float:
    # 1 - subblock_parity_fidelity, without cancellation
    return 0.5 * (1.0 - (1.0 - 2.0 * e) ** m)


def _vote(voters: int, p: float) -> tuple[float, float, float]:
    """(correct, draw, wrong) probabilities of a majority vote where each voter
    is independently wrong with probability ``p``."""
    q = 1.0 - p
    correct = sum(math.comb(voters, k) * q ** (voters - k) * p**k for k in range((voters - 1) // 2 + 1))
    wrong = sum(math.comb(voters, k) * q ** (voters - k) * p**k for k in range(voters // 2 + 1, voters + 1))
    draw = math.comb(voters, voters // 2) * (p * q) ** (voters // 2) if voters % 2 == 0 else 0.0
    return correct, draw, wrong


def _require_acceptable(u: PatternClass, code: CodeParams):
    if u.m != code.m or u.n != code.n:
        raise ValueError(f"class {u.counts} is inconsistent with code ({code.n}, {code.m})")
    if not u.acceptable:
        raise ValueError(f"class {u.counts} is not acceptable")


def x_error_stats(u: PatternClass, code: CodeParams, e: float, dx_form: str = DEFAULT_DX_FORM):
    """Conclusive probability and logical error of the X majority vote.

    Returns:
        ``(p_conc_x, err_x)``.
    """
    _check_dx(dx_form)
    _require_acceptable(u, code)
    n_m = u.n_full
    flip = _parity_flip(code.m, e)
    _, draw_true, wrong = _vote(n_m, flip)
    if n_m % 2:
        draw = 0.0
    elif dx_form == "consistent":
        draw = draw_true
    else:
        draw = math.comb(n_m, n_m // 2) * (e * (1.0 - e)) ** (n_m // 2)
    # 1 - D - F, rewritten so small error rates keep full precision
    err_mass = wrong + draw_true - draw
    # the literal reading overshoots 1/2 at large e; an error rate never exceeds a coin flip
    return 1.0 - draw, min(err_mass / (1.0 - draw), 0.5)


def even_parity_prob(fidelities: Sequence[float]) -> float:
    """Probability that an even number of independent voters are wrong, where
    voter ``i`` is right with probability ``fidelities[i]``."""
    prod = 1.0
    for f in fidelities:
        prod *= 2.0 * f - 1.0
    return 0.5 * (1.0 + prod)


def even_parity_prob_subsets(fidelities: Sequence[float]) -> float:
    """Same as :func:`even_parity_prob` by explicit sum over even-sized subsets
    of wrong voters.  Exponential in ``len(fidelities)``."""
    n = len(fidelities)
    total = 0.0
    for k in range(0, n // 2 + 1):
        for wrong in itertools.combinations(range(n), 2 * k):
            term = 1.0
            for i, f in enumerate(fidelities):
                term *= (1.0 - f) if i in wrong else f
            total += term
    return total


def z_error_stats(u: PatternClass, code: CodeParams, e: float):
    """Conclusive probability and logical error of the Z parity-of-majorities.

    Returns:
        ``(p_conc_z, err_z)`` where ``p_conc_z`` is the product over rows of
        the per-row non-draw probabilities.
    """
    _require_acceptable(u, code)
    p_conc = 1.0
    sign_prod = 1.0
    for m_i in u.survivors():
        _, draw, wrong = _vote(m_i, e)
        p_conc *= 1.0 - draw
        sign_prod *= 1.0 - 2.0 * wrong / (1.0 - draw)
    return p_conc, 0.5 * (1.0 - sign_prod)


def conclusive_rate(u: PatternClass, code: CodeParams, e: float, dx_form: str = DEFAULT_DX_FORM) -> float:
    """Probability that an acceptable class gives a conclusive Bell outcome;
    zero for unacceptable classes."""
    if not u.acceptable:
        return 0.0
    px, _ = x_error_stats(u, code, e, dx_form)
    pz, _ = z_error_stats(u, code, e)
    return px * pz


@dataclass(frozen=True)
class StationStats:
    """One informative syndrome: ``w`` is the joint probability of the class
    and a conclusive outcome, ``err`` its logical error pair."""

    pattern: PatternClass
    w: float
    err: ErrorPair
    q_conc: float = float("nan")

    @property
    def ez(self) -> float:
        return self.err.ez

    @property
    def ex(self) -> float:
        return self.err.ex


@dataclass(frozen=True)
class StationTable:
    code: CodeParams
    channel: ChannelParams
    rows: tuple[StationStats, ...]
    dx_form: str = DEFAULT_DX_FORM
    p0: float = field(init=False)
    e0: float = field(init=False)

    def __post_init__(self):
        p0 = sum(r.w for r in self.rows)
        e0 = sum(r.w * 0.5 * (r.ez + r.ex) for r in self.rows) / p0 if p0 > 0 else 0.0
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "e0", e0)

    def __len__(self):
        return len(self.rows)

    def arrays(self):
        """``(w, ez, ex)`` as float arrays in row order."""
        w = np.array([r.w for r in self.rows])
        ez = np.array([r.ez for r in self.rows])
        ex = np.array([r.ex for r in self.rows])
        return w, ez, ex

    def to_dict(self) -> dict:
        return {
            "code": self.code.to_dict(),
            "channel": self.channel.to_dict(),
            "dx_form": self.dx_form,
            "rows": [
                {"u": list(r.pattern.u), "w": r.w, "ez": r.ez, "ex": r.ex, "q_conc": r.q_conc}
                for r in self.rows
            ],
            "p0": self.p0,
            "e0": self.e0,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "StationTable":
        code = CodeParams(**d["code"])
        channel = ChannelParams(**d["channel"])
        rows = tuple(
            StationStats(
                pattern=PatternClass.from_u(r["u"], code),
                w=float(r["w"]),
                err=ErrorPair(float(r["ez"]), float(r["ex"])),
                q_conc=float(r.get("q_conc", float("nan"))),
            )
            for r in d["rows"]
        )
        return cls(code, channel, rows, d.get("dx_form", DEFAULT_DX_FORM))

    @classmethod
    def from_json(cls, text: str) -> "StationTable":
        return cls.from_dict(json.loads(text))


def build_station_table(code: CodeParams, channel: ChannelParams, dx_form: str = DEFAULT_DX_FORM) -> StationTable:
    """Per-class triplets ``(w, ez, ex)`` for every acceptable class.

    Loss statistics use the effective transmission ``eta_c * eta0``.
    """
    _check_dx(dx_form)
    eta = channel.eta_eff()
    e = channel.e
    total = code.n_p()
    rows = []
    for u in enumerate_classes(code, acceptable_only=True):
        px, ex = x_error_stats(u, code, e, dx_form)
        pz, ez = z_error_stats(u, code, e)
        q = px * pz
        # p(n_lp) * P(u | n_lp) collapses to omega * eta^kept * (1-eta)^lost
        w = u.omega * eta ** (total - u.n_lp) * (1.0 - eta) ** u.n_lp * q
        rows.append(StationStats(u, w, ErrorPair(ez, ex), q))
    return StationTable(code, channel, tuple(rows), dx_form)


def single_station_key(code: CodeParams, channel: ChannelParams, dx_form: str = DEFAULT_DX_FORM) -> float:
    """Key per logical slot for a chain consisting of one station."""
    table = build_station_table(code, channel, dx_form)
    return table_key(table)


def table_key(table: StationTable) -> float:
    w, ez, ex = table.arrays()
    return float(np.sum(w * np.maximum(1.0 - binary_entropy(ez) - binary_entropy(ex), 0.0)))
