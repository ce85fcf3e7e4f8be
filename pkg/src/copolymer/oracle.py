"""Finite-N partition function and exact path sampling by dynamic programming.

This path shares nothing with the transfer-matrix code except the charge
sequence: heights are tracked explicitly, the bond between ``x-1`` and ``x``
carries the sign of whichever endpoint is nonzero, and the weight of a path is
``exp(lambda * sum_x (omega_x + h) * sign)`` under the fair-coin walk.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
import math

import numpy as np

from .sequence import PeriodicSequence
from .transfer import PhasePoint

N_MAX_DEFAULT = 30_000


@dataclass(frozen=True)
class PathSample:
    heights: np.ndarray = field(repr=False)
    seed: int
    index: int

    def dump(self) -> str:
        return " ".join(str(int(h)) for h in self.heights)


@dataclass
class EmpiricalStats:
    ell_N: list[int]
    excursion_lengths: list[int]
    mean_excursion: float
    frac_above: dict[int, float]
    empirical_measure: Counter

    def measure(self) -> dict[tuple[int, int, int], float]:
        total = sum(self.empirical_measure.values())
        return {k: v / total for k, v in self.empirical_measure.items()}

    def to_json(self) -> dict:
        return {
            "samples": len(self.ell_N),
            "mean_ell_N": float(np.mean(self.ell_N)),
            "excursions": len(self.excursion_lengths),
            "mean_excursion": self.mean_excursion,
            "frac_above": {str(k): v for k, v in sorted(self.frac_above.items())},
        }


def _check_n(N: int, n_max: int) -> None:
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N > n_max:
        raise ValueError(f"N = {N} exceeds the configured maximum {n_max}")


class _Weights:
    """Per-step bond factors for both charges, over heights -N..N."""

    def __init__(self, seq: PeriodicSequence, p: PhasePoint, N: int):
        self.N = N
        self.omega = np.resize(seq.array(), N)  # omega_1..omega_N
        s = np.arange(-N, N + 1)
        self.s = s
        self.up = {}  # factor for the bond s -> s+1, indexed by s
        self.down = {}  # factor for the bond s -> s-1, indexed by s
        for w in (1, -1):
            a = p.lam * (w + p.h)
            self.up[w] = np.where(s >= 0, math.exp(a), math.exp(-a))
            self.down[w] = np.where(s >= 1, math.exp(a), math.exp(-a))


def _forward_step(w: np.ndarray, up: np.ndarray, down: np.ndarray) -> np.ndarray:
    new = np.zeros_like(w)
    new[1:] += 0.5 * up[:-1] * w[:-1]
    new[:-1] += 0.5 * down[1:] * w[1:]
    return new


def _backward_step(W: np.ndarray, up: np.ndarray, down: np.ndarray) -> np.ndarray:
    new = np.zeros_like(W)
    new[:-1] += 0.5 * up[:-1] * W[1:]
    new[1:] += 0.5 * down[1:] * W[:-1]
    return new


def log_partition_exact(
    seq: PeriodicSequence, p: PhasePoint, N: int, n_max: int = N_MAX_DEFAULT
) -> float:
    """(1/N) log Z_N by forward recursion over heights."""
    _check_n(N, n_max)
    wt = _Weights(seq, p, N)
    w = np.zeros(2 * N + 1)
    w[N] = 1.0
    log_scale = 0.0
    for x in range(N):
        c = int(wt.omega[x])
        w = _forward_step(w, wt.up[c], wt.down[c])
        total = w.sum()
        w /= total
        log_scale += math.log(total)
    return log_scale / N


def free_energy_estimate(
    seq: PeriodicSequence, p: PhasePoint, n_list, n_max: int = N_MAX_DEFAULT
) -> tuple[float, float]:
    """Fit (1/N) log Z_N = f + c log(N)/N; returns f and the RMS fit residual."""
    ns = np.asarray(sorted(int(n) for n in n_list), dtype=float)
    if len(ns) < 3:
        raise ValueError("need at least three values of N")
    values = np.array([log_partition_exact(seq, p, int(n), n_max) for n in ns])
    design = np.column_stack([np.ones_like(ns), np.log(ns) / ns])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    resid = values - design @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def _backward_table(wt: _Weights, start: int, stop: int, W_stop: np.ndarray) -> np.ndarray:
    """W_x for x = start..stop (inclusive), each row scaled to max 1."""
    rows = np.empty((stop - start + 1, len(W_stop)))
    rows[-1] = W_stop
    W = W_stop
    for x in range(stop - 1, start - 1, -1):
        c = int(wt.omega[x])  # bond x -> x+1 carries omega_{x+1}
        W = _backward_step(W, wt.up[c], wt.down[c])
        W /= W.max()
        rows[x - start] = W
    return rows


def _checkpoints(wt: _Weights, block: int) -> dict[int, np.ndarray]:
    N = wt.N
    W = np.ones(2 * N + 1)
    marks = {N: W.copy()}
    for x in range(N - 1, -1, -1):
        c = int(wt.omega[x])
        W = _backward_step(W, wt.up[c], wt.down[c])
        W /= W.max()
        if x % block == 0:
            marks[x] = W.copy()
    return marks


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def sample_paths(
    seq: PeriodicSequence,
    p: PhasePoint,
    N: int,
    count: int,
    seed: int,
    n_max: int = N_MAX_DEFAULT,
) -> list[PathSample]:
    """Independent exact draws from the polymer measure of length N.

    Backward partition values are checkpointed every ~sqrt(N) steps and
    recomputed per block, so memory stays O(N^1.5).
    """
    _check_n(N, n_max)
    if count < 1:
        raise ValueError("count must be >= 1")
    wt = _Weights(seq, p, N)
    block = max(1, int(math.isqrt(N)))
    marks = _checkpoints(wt, block)
    uniforms = np.stack([_stream(seed, i).random(N) for i in range(count)])

    heights = np.zeros((count, N + 1), dtype=np.int64)
    cur = np.full(count, N)  # array index of height 0
    for x0 in range(0, N, block):
        x1 = min(x0 + block, N)
        table = _backward_table(wt, x0, x1, marks[x1])
        for x in range(x0, x1):
            c = int(wt.omega[x])
            W_next = table[x + 1 - x0]
            up = wt.up[c][cur] * W_next[cur + 1]
            down = wt.down[c][cur] * W_next[cur - 1]
            step = np.where(uniforms[:, x] * (up + down) < up, 1, -1)
            cur = cur + step
            heights[:, x + 1] = cur - N
    return [PathSample(heights[i], seed, i) for i in range(count)]


def height_marginal(seq: PeriodicSequence, p: PhasePoint, N: int, x: int) -> dict[int, float]:
    """Exact P(S_x = s) from forward and backward weights."""
    _check_n(N, N_MAX_DEFAULT)
    if not 0 <= x <= N:
        raise ValueError("x must lie in 0..N")
    wt = _Weights(seq, p, N)
    F = np.zeros(2 * N + 1)
    F[N] = 1.0
    for y in range(x):
        c = int(wt.omega[y])
        F = _forward_step(F, wt.up[c], wt.down[c])
        F /= F.sum()
    W = np.ones(2 * N + 1)
    for y in range(N - 1, x - 1, -1):
        c = int(wt.omega[y])
        W = _backward_step(W, wt.up[c], wt.down[c])
        W /= W.max()
    joint = F * W
    joint /= joint.sum()
    return {int(s): float(v) for s, v in zip(wt.s, joint) if v > 0}


def excursion_stats(samples: list[PathSample], T: int, levels=(0, 1, 2, 5, 10, 20)) -> EmpiricalStats:
    if not samples:
        raise ValueError("no samples")
    ell, lengths = [], []
    counts: Counter = Counter()
    above = {L: 0.0 for L in levels}
    for sample in samples:
        S = sample.heights
        zeros = np.flatnonzero(S == 0)
        ell.append(len(zeros) - 1)
        diffs = np.diff(zeros)
        lengths.extend(int(d) for d in diffs)
        alpha = (zeros[:-1] // 2) % T
        beta = (zeros[1:] // 2) % T
        counts.update(zip(alpha.tolist(), beta.tolist(), diffs.tolist()))
        N = len(S) - 1
        for L in levels:
            above[L] += np.count_nonzero(S[1:] > L) / N
    n = len(samples)
    mean = float(np.mean(lengths)) if lengths else math.inf
    return EmpiricalStats(ell, lengths, mean, {L: v / n for L, v in above.items()}, counts)


def tail_decay_check(samples: list[PathSample], p: PhasePoint | None = None, min_count: int = 50) -> float:
    """Exponential rate of P(|S_x| > L) over the middle half of the chain.

    Fitted by least squares on log survival for levels with at least
    ``min_count`` exceedances.
    """
    N = len(samples[0].heights) - 1
    mid = np.concatenate([np.abs(s.heights[N // 4 : 3 * N // 4 + 1]) for s in samples])
    counts = np.bincount(mid)
    surv = counts[::-1].cumsum()[::-1]  # surv[L] = #{|S| >= L}
    levels = np.flatnonzero(surv >= min_count)
    levels = levels[levels >= 1]
    if len(levels) < 2:
        return 0.0
    slope = np.polyfit(levels, np.log(surv[levels] / surv[0]), 1)[0]
    return max(0.0, float(-slope))
