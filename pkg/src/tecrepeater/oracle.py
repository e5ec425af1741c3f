"""Bit-level Monte Carlo simulation of one TEC station.

This is the brute-force check on :mod:`tecrepeater.station`.  Each trial
draws photon survival, draws independent X and Z readout flips on the
surviving photons, and evaluates the logical Bell outcome directly from the
measured +-1/0 values: the X outcome is the sign of the sum of row parities
and the Z outcome is the product of the signs of the row sums.  Nothing in
here uses the analytic vote formulas.

Trials are processed in fixed-size chunks.  Chunk ``k`` draws from
``PCG64(SeedSequence(seed, spawn_key=(k,)))`` so the tallies do not depend
on how chunks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from tecrepeater.core import ChannelParams, CodeParams
from tecrepeater.patterns import PatternClass, enumerate_classes
from tecrepeater.station import DX_FORMS, StationTable, build_station_table

RNG_ALGORITHM = "numpy.PCG64/SeedSequence(seed, spawn_key=(chunk,))"
CHUNK_TRIALS = 1 << 16
Z_FLAG = 3.0


@dataclass
class ClassTally:
    trials: int = 0
    conclusive: int = 0
    x_errors: int = 0
    z_errors: int = 0

    def add(self, other: "ClassTally"):
        self.trials += other.trials
        self.conclusive += other.conclusive
        self.x_errors += other.x_errors
        self.z_errors += other.z_errors


def _binomial_se(k, n):
    if n == 0:
        return float("nan")
    p = k / n
    return math.sqrt(p * (1.0 - p) / n)


@dataclass(frozen=True)
class OracleEstimate:
    """Empirical conclusive rate and logical error rates of one class."""

    pattern: PatternClass
    samples: int
    conclusive: int
    x_errors: int
    z_errors: int
    seed: int

    @property
    def conclusive_rate_hat(self) -> float:
        return self.conclusive / self.samples if self.samples else float("nan")

    @property
    def conclusive_rate_se(self) -> float:
        return _binomial_se(self.conclusive, self.samples)

    @property
    def ex_hat(self) -> float:
        return self.x_errors / self.conclusive if self.conclusive else float("nan")

    @property
    def ex_se(self) -> float:
        return _binomial_se(self.x_errors, self.conclusive)

    @property
    def ez_hat(self) -> float:
        return self.z_errors / self.conclusive if self.conclusive else float("nan")

    @property
    def ez_se(self) -> float:
        return _binomial_se(self.z_errors, self.conclusive)

    def to_dict(self) -> dict:
        return {
            "u": list(self.pattern.u),
            "lost_rows": self.pattern.lost_rows,
            "samples": self.samples,
            "conclusive": self.conclusive,
            "x_errors": self.x_errors,
            "z_errors": self.z_errors,
            "conclusive_rate_hat": self.conclusive_rate_hat,
            "conclusive_rate_se": self.conclusive_rate_se,
            "ex_hat": self.ex_hat,
            "ex_se": self.ex_se,
            "ez_hat": self.ez_hat,
            "ez_se": self.ez_se,
        }


@dataclass
class OracleResult:
    """Per-class estimates of one simulation run plus its provenance."""

    code: CodeParams
    channel: ChannelParams
    trials: int
    seed: int
    ground_truth: str
    estimates: dict = field(default_factory=dict)
    rng: str = RNG_ALGORITHM

    def __getitem__(self, pattern: PatternClass) -> OracleEstimate:
        return self.estimates[pattern]

    def __iter__(self):
        return iter(self.estimates)

    def __len__(self):
        return len(self.estimates)

    @property
    def conclusive_total(self) -> int:
        return sum(est.conclusive for est in self.estimates.values())

    @property
    def conclusive_fraction(self) -> float:
        return self.conclusive_total / self.trials

    def to_dict(self) -> dict:
        return {
            "code": self.code.to_dict(),
            "channel": self.channel.to_dict(),
            "trials": self.trials,
            "seed": self.seed,
            "rng": self.rng,
            "ground_truth": self.ground_truth,
            "conclusive_fraction": self.conclusive_fraction,
            "classes": [est.to_dict() for est in self.estimates.values()],
        }


def _sign(x):
    return np.sign(x).astype(np.int8)


def _simulate_chunk(code: CodeParams, eta: float, e: float, trials: int, seed: int, chunk: int, ground_truth: str):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))
    n, m = code.n, code.m
    lost = rng.random((trials, n, m)) >= eta
    flip_x = rng.random((trials, n, m)) < e
    flip_z = rng.random((trials, n, m)) < e
    if ground_truth == "random":
        # random physical outcomes consistent with random logical values:
        # row X parities multiply to 1 each, Z outcomes are constant per row
        truth_x = rng.choice(np.array([-1, 1], dtype=np.int8), size=trials)
        truth_z = rng.choice(np.array([-1, 1], dtype=np.int8), size=trials)
        x_ideal = rng.choice(np.array([-1, 1], dtype=np.int8), size=(trials, n, m))
        x_ideal[:, :, -1] = np.prod(x_ideal[:, :, :-1], axis=2) * truth_x[:, None]
        rows = rng.choice(np.array([-1, 1], dtype=np.int8), size=(trials, n))
        rows[:, -1] = np.prod(rows[:, :-1], axis=1) * truth_z
        z_ideal = np.repeat(rows[:, :, None], m, axis=2)
    else:
        truth_x = np.ones(trials, dtype=np.int8)
        truth_z = np.ones(trials, dtype=np.int8)
        x_ideal = np.ones((trials, n, m), dtype=np.int8)
        z_ideal = np.ones((trials, n, m), dtype=np.int8)
    present = (~lost).astype(np.int8)
    x_out = x_ideal * np.where(flip_x, -1, 1).astype(np.int8) * present
    z_out = z_ideal * np.where(flip_z, -1, 1).astype(np.int8) * present

    m_x = _sign(np.prod(x_out, axis=2, dtype=np.int64).sum(axis=1))
    m_z = np.prod(_sign(z_out.sum(axis=2, dtype=np.int64)), axis=1)
    conclusive = (m_x != 0) & (m_z != 0)
    x_err = conclusive & (m_x != truth_x)
    z_err = conclusive & (m_z != truth_z)

    lost_per_row = lost.sum(axis=2)
    counts = np.zeros((trials, m + 1), dtype=np.int64)
    for k in range(m + 1):
        counts[:, k] = (lost_per_row == k).sum(axis=1)
    key = counts @ ((n + 1) ** np.arange(m + 1))
    out = {}
    for kv in np.unique(key):
        sel = key == kv
        out[int(kv)] = ClassTally(
            trials=int(sel.sum()),
            conclusive=int(conclusive[sel].sum()),
            x_errors=int(x_err[sel].sum()),
            z_errors=int(z_err[sel].sum()),
        )
    return out


def _class_key(pattern: PatternClass, n: int) -> int:
    return sum(c * (n + 1) ** k for k, c in enumerate(pattern.counts))


def simulate_station(
    code: CodeParams,
    channel: ChannelParams,
    trials: int,
    seed: int = 0,
    ground_truth: str = "fixed",
    workers: int = 1,
) -> OracleResult:
    """Monte Carlo estimate of every class's conclusive rate and logical errors.

    Args:
        trials: Number of simulated station uses.
        seed: Root seed; identical seeds give identical tallies.
        ground_truth: ``"fixed"`` sends logical +1 in both bases; ``"random"``
            draws uniformly random logical values and physical outcomes.
        workers: Processes to spread chunks over (results do not depend on it).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if ground_truth not in ("fixed", "random"):
        raise ValueError(f"unknown ground_truth {ground_truth!r}")
    sizes = [CHUNK_TRIALS] * (trials // CHUNK_TRIALS)
    if trials % CHUNK_TRIALS:
        sizes.append(trials % CHUNK_TRIALS)
    args = [(code, channel.eta_eff(), channel.e, s, seed, k, ground_truth) for k, s in enumerate(sizes)]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_chunk_star, args))
    else:
        parts = [_simulate_chunk(*a) for a in args]

    merged: dict[int, ClassTally] = {}
    for part in parts:
        for kv, tally in part.items():
            merged.setdefault(kv, ClassTally()).add(tally)

    result = OracleResult(code, channel, trials, seed, ground_truth)
    for pattern in enumerate_classes(code):
        tally = merged.get(_class_key(pattern, code.n))
        if tally is None:
            continue
        result.estimates[pattern] = OracleEstimate(
            pattern, tally.trials, tally.conclusive, tally.x_errors, tally.z_errors, seed
        )
    return result


def _simulate_chunk_star(args):
    return _simulate_chunk(*args)


def _zscore(k: int, n: int, p: float) -> float:
    # score test: the variance comes from the analytic value, so empty or
    # all-success tallies still give a finite, meaningful z
    if n == 0:
        return float("nan")
    var = p * (1.0 - p) / n
    diff = k / n - p
    if var <= 0.0:
        return 0.0 if abs(diff) < 1e-15 else math.copysign(math.inf, diff)
    return diff / math.sqrt(var)


@dataclass
class ComparisonRow:
    pattern: PatternClass
    samples: int
    q_conc: float
    q_conc_hat: float
    z_q: float
    ex: float
    ex_hat: float
    z_ex: float
    ez: float
    ez_hat: float
    z_ez: float

    @property
    def max_abs_z(self) -> float:
        zs = [abs(z) for z in (self.z_q, self.z_ex, self.z_ez) if not math.isnan(z)]
        return max(zs) if zs else 0.0

    @property
    def flagged(self) -> bool:
        return self.max_abs_z > Z_FLAG

    def to_dict(self) -> dict:
        return {
            "u": list(self.pattern.u),
            "samples": self.samples,
            "q_conc": self.q_conc,
            "q_conc_hat": self.q_conc_hat,
            "z_q": self.z_q,
            "ex": self.ex,
            "ex_hat": self.ex_hat,
            "z_ex": self.z_ex,
            "ez": self.ez,
            "ez_hat": self.ez_hat,
            "z_ez": self.z_ez,
            "flagged": self.flagged,
        }


@dataclass
class ComparisonReport:
    dx_form: str
    rows: list
    p0: float
    conclusive_fraction: float
    z_p0: float

    @property
    def n_flagged(self) -> int:
        return sum(r.flagged for r in self.rows) + (abs(self.z_p0) > Z_FLAG)

    @property
    def max_abs_z(self) -> float:
        return max([r.max_abs_z for r in self.rows] + [abs(self.z_p0)])

    @property
    def chi2(self) -> float:
        zs = [abs(self.z_p0)]
        for r in self.rows:
            zs.extend(abs(z) for z in (r.z_q, r.z_ex, r.z_ez) if not math.isnan(z))
        return float(sum(min(z, 1e6) ** 2 for z in zs))

    @property
    def ok(self) -> bool:
        return self.n_flagged == 0

    def to_dict(self) -> dict:
        return {
            "dx_form": self.dx_form,
            "ok": self.ok,
            "n_flagged": self.n_flagged,
            "max_abs_z": self.max_abs_z,
            "p0": self.p0,
            "conclusive_fraction": self.conclusive_fraction,
            "z_p0": self.z_p0,
            "rows": [r.to_dict() for r in self.rows],
        }


def compare_with_analytic(table: StationTable, oracle: OracleResult) -> ComparisonReport:
    """z-scores of the oracle tallies against the analytic table, per class.

    ``q_conc`` is tested over all trials in the class, the error rates over its
    conclusive trials.  Any ``|z| > 3`` is flagged.
    """
    if table.code != oracle.code or table.channel != oracle.channel:
        raise ValueError("station table and oracle were computed for different parameters")
    if oracle.trials < 1 or not oracle.estimates:
        raise ValueError("oracle result holds no trials")
    rows = []
    for stat in table.rows:
        est = oracle.estimates.get(stat.pattern)
        if est is None or est.samples == 0:
            continue
        rows.append(
            ComparisonRow(
                pattern=stat.pattern,
                samples=est.samples,
                q_conc=stat.q_conc,
                q_conc_hat=est.conclusive_rate_hat,
                z_q=_zscore(est.conclusive, est.samples, stat.q_conc),
                ex=stat.ex,
                ex_hat=est.ex_hat,
                z_ex=_zscore(est.x_errors, est.conclusive, stat.ex),
                ez=stat.ez,
                ez_hat=est.ez_hat,
                z_ez=_zscore(est.z_errors, est.conclusive, stat.ez),
            )
        )
    # unacceptable classes must never be conclusive
    stray = sum(est.conclusive for p, est in oracle.estimates.items() if not p.acceptable)
    if stray:
        raise AssertionError(f"{stray} conclusive trials on unacceptable patterns")
    z_p0 = _zscore(oracle.conclusive_total, oracle.trials, table.p0)
    return ComparisonReport(table.dx_form, rows, table.p0, oracle.conclusive_fraction, z_p0)


def adjudicate_dx(oracle: OracleResult) -> dict:
    """Compare both draw-probability readings against one oracle run.

    Returns a dict with one report per form and the form with fewer flagged
    statistics (ties broken by the smaller chi-square sum).
    """
    reports = {
        form: compare_with_analytic(build_station_table(oracle.code, oracle.channel, form), oracle)
        for form in DX_FORMS
    }
    preferred = min(DX_FORMS, key=lambda f: (reports[f].n_flagged, reports[f].chi2))
    return {"reports": reports, "preferred": preferred}
