"""First-return law of the simple symmetric walk, split into classes mod T.

``K(x) = P(eta = x)`` for even ``x``; ``eta/2`` has generating function
``G(z) = 1 - sqrt(1 - z)``.  Class masses and class-filtered Laplace sums are
evaluated exactly through the roots-of-unity filter applied to ``G`` when the
damping is weak, and by direct (rapidly converging) summation otherwise.
"""

from __future__ import annotations

from functools import lru_cache
import math

import numpy as np

C_K = math.sqrt(2.0 / math.pi)

DEFAULT_N_MAX = 200_000
# direct summation is used once exp(-2 c n) drops below this before the cache ends
SERIES_TOL = math.exp(-42.0)
_IMAG_TOL = 1e-12


@lru_cache(maxsize=8)
def _k_table(n_max: int) -> np.ndarray:
    """K(2n) for n = 1..n_max; K(2n+2)/K(2n) = (2n-1)/(2n+2)."""
    n = np.arange(1, n_max, dtype=np.float64)
    ratios = (2.0 * n - 1.0) / (2.0 * n + 2.0)
    table = np.empty(n_max)
    table[0] = 0.5
    table[1:] = 0.5 * np.cumprod(ratios)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=8)
def _survival_table(n_max: int) -> np.ndarray:
    """P(eta > 2n) = binom(2n, n) 4^-n for n = 0..n_max."""
    n = np.arange(0, n_max, dtype=np.float64)
    ratios = (2.0 * n + 1.0) / (2.0 * n + 2.0)
    table = np.empty(n_max + 1)
    table[0] = 1.0
    table[1:] = np.cumprod(ratios)
    table.setflags(write=False)
    return table


def _table_size(n: int) -> int:
    size = 1024
    while size < n:
        size *= 2
    return size


def k_exact(x: int) -> float:
    """K(x) = Catalan(x/2 - 1) 2^-(x-1)."""
    if x < 2 or x % 2:
        raise ValueError(f"K(x) needs an even x >= 2, got {x}")
    n = x // 2
    return float(_k_table(_table_size(n))[n - 1])


def survival(x: int) -> float:
    """P(eta > x) for even x >= 0."""
    if x < 0 or x % 2:
        raise ValueError(f"survival needs an even x >= 0, got {x}")
    n = x // 2
    return float(_survival_table(_table_size(n))[n])


def _roots(T: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(T) / T)


def _one_minus(c: float, T: int) -> np.ndarray:
    """1 - e^{-2c} u^j for j = 0..T-1, without cancellation near z = 1."""
    j = np.arange(T)
    theta = 2.0 * np.pi * j / T
    decay = math.exp(-2.0 * c)
    real = -math.expm1(-2.0 * c) + 2.0 * decay * np.sin(theta / 2.0) ** 2
    imag = -decay * np.sin(theta)
    return real + 1j * imag


def _filter(values: np.ndarray, T: int) -> np.ndarray:
    """(1/T) sum_j u^{-j gamma} values[j] for every gamma; real part."""
    u = _roots(T)
    gamma = np.arange(T)
    weights = u[None, :] ** (-gamma[:, None])
    out = weights @ values / T
    if np.max(np.abs(out.imag)) > _IMAG_TOL * max(1.0, np.max(np.abs(out.real))):
        raise ArithmeticError("roots-of-unity filter left an imaginary residue")
    return out.real


def class_mass_vector(T: int) -> np.ndarray:
    """p_gamma = P(eta/2 = gamma mod T) for gamma = 0..T-1."""
    return _filter(1.0 - np.sqrt(1.0 - _roots(T)), T)


def class_mass(T: int, gamma: int) -> float:
    if T < 1:
        raise ValueError(f"modulus must be positive, got {T}")
    if not 0 <= gamma < T:
        raise ValueError(f"residue {gamma} out of range for T = {T}")
    return float(class_mass_vector(T)[gamma])


class ReturnLaw:
    """Cached return-time tables for one residue modulus ``T``."""

    def __init__(self, T: int, n_max: int = DEFAULT_N_MAX, series_tol: float = SERIES_TOL):
        if T < 1:
            raise ValueError(f"modulus must be positive, got {T}")
        if n_max < 4 * T:
            raise ValueError("n_max too small for this modulus")
        self.T = T
        self.n_max = n_max
        self.k_cache = _k_table(n_max)
        self.log_k = np.log(self.k_cache)
        self.n = np.arange(1, n_max + 1)
        self.residue = self.n % T
        self.class_mass = class_mass_vector(T)
        self.c_k = C_K
        # smallest half-length in each class: gamma for gamma > 0, T for gamma = 0
        self._first = np.where(np.arange(T) == 0, T, np.arange(T))
        if not 0 < series_tol < 1:
            raise ValueError("series_tol must lie in (0, 1)")
        self._series_exponent = -math.log(series_tol)
        self._series_min = self._series_exponent / (2.0 * (n_max - T))

    def __repr__(self) -> str:
        return f"ReturnLaw(T={self.T}, n_max={self.n_max})"

    def k(self, x: int) -> float:
        if x < 2 or x % 2:
            raise ValueError(f"K(x) needs an even x >= 2, got {x}")
        n = x // 2
        if n > self.n_max:
            raise ValueError(f"x = {x} beyond the cached range; use tail identities")
        return float(self.k_cache[n - 1])

    def conditional_k(self, gamma: int, x: int) -> float:
        """P(eta = x | eta/2 = gamma mod T)."""
        if (x // 2) % self.T != gamma % self.T or x % 2:
            raise ValueError(f"x = {x} is not in class {gamma} mod {self.T}")
        return self.k(x) / float(self.class_mass[gamma % self.T])

    def _series_terms(self, c: float) -> tuple[np.ndarray, np.ndarray]:
        stop = min(self.n_max, self.T + int(math.ceil(self._series_exponent / (2.0 * c))) + 1)
        log_terms = self.log_k[:stop] - 2.0 * c * self.n[:stop]
        return log_terms, self.residue[:stop]

    def log_laplace(self, c: float) -> np.ndarray:
        """log sum_{x/2 = gamma mod T} K(x) e^{-c x}, for every gamma."""
        if c < 0:
            raise ValueError(f"Laplace parameter must be >= 0, got {c}")
        if c < self._series_min:
            return np.log(_filter(1.0 - np.sqrt(_one_minus(c, self.T)), self.T))
        log_terms, res = self._series_terms(c)
        lead = log_terms[self._first - 1]
        scaled = np.exp(log_terms - lead[res])
        return lead + np.log(np.bincount(res, weights=scaled, minlength=self.T))

    def laplace(self, c: float) -> np.ndarray:
        return np.exp(self.log_laplace(c))

    def log_laplace_mean(self, c: float) -> np.ndarray:
        """log sum_{class} x K(x) e^{-c x}; +inf at c = 0."""
        if c < 0:
            raise ValueError(f"Laplace parameter must be >= 0, got {c}")
        if c == 0:
            return np.full(self.T, np.inf)
        if c < self._series_min:
            w = 1.0 - _one_minus(c, self.T)
            return np.log(_filter(w / np.sqrt(_one_minus(c, self.T)), self.T))
        log_terms, res = self._series_terms(c)
        log_terms = log_terms + np.log(2.0 * self.n[: len(log_terms)])
        lead = log_terms[self._first - 1]
        scaled = np.exp(log_terms - lead[res])
        return lead + np.log(np.bincount(res, weights=scaled, minlength=self.T))

    def laplace_class(self, gamma: int, b: float) -> float:
        return float(self.laplace(b)[gamma % self.T])

    def head(self, x_max: int) -> tuple[np.ndarray, np.ndarray]:
        """Even lengths 2..x_max and their K values."""
        n = min(x_max // 2, self.n_max)
        return 2 * self.n[:n], self.k_cache[:n]


def laplace_class(T: int, gamma: int, b: float) -> float:
    """sum_{x/2 = gamma mod T} K(x) e^{-b x} via the roots-of-unity filter."""
    if b < 0:
        raise ValueError(f"b must be >= 0, got {b}")
    if not 0 <= gamma < T:
        raise ValueError(f"residue {gamma} out of range for T = {T}")
    return float(_filter(1.0 - np.sqrt(_one_minus(b, T)), T)[gamma])


def conditional_k(law: ReturnLaw, gamma: int, x: int) -> float:
    return law.conditional_k(gamma, x)
