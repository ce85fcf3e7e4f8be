"""Independent reference computations used only by the tests.

Nothing here calls into the package beyond parsing sequences: return
probabilities come from exact integer enumeration, partition functions from
summing over all 2^N paths, eigenvalues from a dense solver.
"""

from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np


def k_by_enumeration(x: int) -> float:
    """P(first return to 0 at time x), by walking all 2^x paths."""
    hits = 0
    for steps in itertools.product((1, -1), repeat=x):
        s = 0
        for i, d in enumerate(steps, 1):
            s += d
            if s == 0:
                hits += i == x
                break
    return hits / 2**x


def k_by_binomial(x: int) -> float:
    """K(2n) = C(2n-2, n-1) / (n 2^(2n-1)) at 40 significant digits."""
    n = x // 2
    with mpmath.workdps(40):
        return float(mpmath.binomial(2 * n - 2, n - 1) / (n * mpmath.mpf(2) ** (2 * n - 1)))


def class_partial_sum(T: int, gamma: int, X: int) -> float:
    """sum of K(x) over even x <= X with x/2 = gamma mod T."""
    total = 0.0
    k = 0.5  # K(2)
    for n in range(1, X // 2 + 1):
        if n % T == gamma:
            total += k
        k *= (2 * n - 1) / (2 * n + 2)
    return total


def window_xi(charges, T: int) -> np.ndarray:
    """xi[a, b] from direct window sums of omega over (2a, 2b], a < b representatives."""
    w = np.resize(np.asarray(charges), 8 * T)
    xi = np.zeros((T, T), dtype=int)
    for a in range(T):
        for b in range(T):
            bb = b if b > a else b + T
            xi[a, b] = int(w[2 * a : 2 * bb].sum()) if bb > a else 0
    return xi


def z_free(b: float) -> float:
    return 1.0 - math.sqrt(-math.expm1(-2.0 * b))


def mean_free(b: float) -> float:
    """-d/db log z_free(b)."""
    s = math.sqrt(-math.expm1(-2.0 * b))
    return math.exp(-2.0 * b) / (s * (1.0 - s))


def dense_perron(A: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eig(A)
    i = int(np.argmax(vals.real))
    v = np.abs(vecs[:, i].real)
    return float(vals[i].real), v / v.sum()


def brute_force_paths(charges, lam: float, h: float, N: int) -> dict[tuple[int, ...], float]:
    """Exact polymer law on all 2^N paths with the recursive sign rule.

    The sign of step x is sign(S_x), or sign(S_{x-1}) when S_x = 0.
    """
    omega = np.resize(np.asarray(charges), N)
    weights = {}
    for steps in itertools.product((1, -1), repeat=N):
        s, prev, H = 0, 0, 0.0
        for x, d in enumerate(steps):
            prev, s = s, s + d
            sign = np.sign(s) if s != 0 else np.sign(prev)
            H += (omega[x] + h) * sign
        weights[steps] = math.exp(lam * H) / 2**N
    return weights


def brute_force_log_z(charges, lam: float, h: float, N: int) -> float:
    return math.log(sum(brute_force_paths(charges, lam, h, N).values())) / N
