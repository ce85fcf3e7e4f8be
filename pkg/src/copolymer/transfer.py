"""Excursion kernel, transfer matrix A(b, lambda, h) and the tilted excursion law.

Every entry of ``A`` is a class-filtered Laplace sum.  Since

    exp(Phi(x)) = 1/2 + 1/2 * exp(-2 lambda xi) * exp(-2 lambda h x),

``A[a, b] = L_g(b)/2 + exp(-2 lambda xi[a, b]) L_g(b + 2 lambda h)/2`` with
``g = (b - a) mod T`` and ``L_g`` from :class:`ReturnLaw`, so no truncation
of the heavy ``x^{-3/2}`` tail is involved.  Entries are assembled in log
space and rescaled before the eigen-solve so large couplings cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .return_law import ReturnLaw
from .sequence import PeriodicSequence, xi_matrix

LOG2 = math.log(2.0)
EIG_TOL = 1e-13
RESIDUAL_TOL = 1e-11


class NumericalError(ArithmeticError):
    """An iterative solver failed to converge."""


@dataclass(frozen=True)
class PhasePoint:
    lam: float
    h: float

    def __post_init__(self) -> None:
        if not (self.lam >= 0 and self.h >= 0):
            raise ValueError(f"need lambda >= 0 and h >= 0, got ({self.lam}, {self.h})")


@dataclass(frozen=True)
class EigenData:
    log_z: float
    v: np.ndarray
    v_left: np.ndarray
    pi: np.ndarray

    @property
    def z(self) -> float:
        return math.exp(self.log_z)


def _log1pexp(u):
    u = np.asarray(u, dtype=float)
    return np.where(u > 0, u + np.log1p(np.exp(-np.abs(u))), np.log1p(np.exp(np.minimum(u, 0.0))))


def phi(p: PhasePoint, xi_val, x):
    """log((1 + exp(-2t)) / 2) with t = lambda xi + lambda h x."""
    t = p.lam * np.asarray(xi_val, dtype=float) + p.lam * p.h * np.asarray(x, dtype=float)
    out = _log1pexp(-2.0 * t) - LOG2
    return float(out) if out.ndim == 0 else out


def phi_tilde(p: PhasePoint, xi_val, x):
    """log cosh(lambda xi + lambda h x) - lambda h x; equals phi + lambda xi."""
    t = p.lam * np.asarray(xi_val, dtype=float) + p.lam * p.h * np.asarray(x, dtype=float)
    a = np.abs(t)
    out = a + np.log1p(np.exp(-2.0 * a)) - LOG2 - p.lam * p.h * np.asarray(x, dtype=float)
    return float(out) if out.ndim == 0 else out


def _class_index(T: int) -> np.ndarray:
    idx = np.arange(T)
    return (idx[None, :] - idx[:, None]) % T


def log_a_matrix(seq: PeriodicSequence, law: ReturnLaw, b: float, p: PhasePoint) -> np.ndarray:
    if b < 0:
        raise ValueError(f"b must be >= 0, got {b}")
    T = seq.period_T
    if law.T != T:
        raise ValueError(f"return law modulus {law.T} does not match T = {T}")
    xi = xi_matrix(seq).xi
    g = _class_index(T)
    first = law.log_laplace(b)[g]
    if p.lam == 0:
        return first
    second = -2.0 * p.lam * xi + law.log_laplace(b + 2.0 * p.lam * p.h)[g]
    return np.logaddexp(first, second) - LOG2


def a_matrix(seq: PeriodicSequence, law: ReturnLaw, b: float, p: PhasePoint) -> np.ndarray:
    return np.exp(log_a_matrix(seq, law, b, p))


def _balance(A: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """Diagonal d making d^-1 A d have comparable off-diagonal row and column sums."""
    d = np.ones(A.shape[0])
    if A.shape[0] == 1:
        return d
    off = A - np.diag(np.diag(A))
    for _ in range(sweeps):
        B = off * d[None, :] / d[:, None]
        ratio = B.sum(axis=1) / B.sum(axis=0)
        if np.max(np.abs(np.log(ratio))) < 1e-3:
            break
        d *= ratio**0.25
    return d


def _power(A: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray]:
    # iterate on the balanced, shifted matrix: same Perron vector, no +-rho stall
    d = _balance(A)
    B = A * d[None, :] / d[:, None]
    B = B + np.eye(len(B)) * B.sum(axis=1).max()
    w = np.full(len(B), 1.0 / len(B))
    z_old = 0.0
    for _ in range(max_iter):
        w = B @ w
        w /= w.sum()
        v = w * d
        v /= v.sum()
        Av = A @ v
        z = Av.sum()
        # componentwise: entries of v can span many decades at strong coupling
        if abs(z - z_old) <= tol * z and np.max(np.abs(Av / (z * v) - 1.0)) <= RESIDUAL_TOL:
            return float(z), v
        z_old = z
    raise NumericalError(f"power iteration did not converge in {max_iter} iterations")


def perron(A: np.ndarray, tol: float = EIG_TOL, max_iter: int = 100_000) -> EigenData:
    """Perron-Frobenius data of a strictly positive square matrix."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("need a square matrix")
    if not np.all(A > 0) or not np.all(np.isfinite(A)):
        raise ValueError("Perron data needs a strictly positive finite matrix")
    z, v = _power(A, tol, max_iter)
    _, v_left = _power(A.T, tol, max_iter)
    pi = v_left * v
    return EigenData(log_z=math.log(z), v=v, v_left=v_left, pi=pi / pi.sum())


def eigen(
    seq: PeriodicSequence, law: ReturnLaw, b: float, p: PhasePoint, tol: float = EIG_TOL
) -> EigenData:
    """Perron data of A(b, lambda, h), with log Z carried separately from the scale."""
    log_a = log_a_matrix(seq, law, b, p)
    shift = float(log_a.max())
    scaled = np.maximum(np.exp(log_a - shift), np.finfo(float).tiny)
    data = perron(scaled, tol=tol)
    return EigenData(data.log_z + shift, data.v, data.v_left, data.pi)


def log_z(
    seq: PeriodicSequence, law: ReturnLaw, b: float, p: PhasePoint, tol: float = EIG_TOL
) -> float:
    return eigen(seq, law, b, p, tol).log_z


@dataclass
class ExcursionMeasure:
    """Probability on (alpha, beta, x) with x/2 = beta - alpha mod T.

    ``lengths[a, b, k]`` lists the admissible even lengths of pair ``(a, b)``
    up to ``cutoff``; ``mass`` holds the matching weights.  Anything beyond the
    cutoff is summarised per pair by ``tail_mass`` and ``tail_mean``
    (the tail's contribution to ``sum x mu``).  ``off_support`` records mass
    placed on lengths of the wrong class, which takes the measure out of P.
    """

    T: int
    cutoff: int
    lengths: np.ndarray
    mass: np.ndarray
    tail_mass: np.ndarray
    tail_mean: np.ndarray
    off_support: float = 0.0

    @property
    def total(self) -> float:
        return float(self.mass.sum() + self.tail_mass.sum() + self.off_support)

    @property
    def pair_mass(self) -> np.ndarray:
        return self.mass.sum(axis=2) + self.tail_mass

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        pm = self.pair_mass
        return pm.sum(axis=1), pm.sum(axis=0)

    @property
    def mean_x(self) -> float:
        return float((self.lengths * self.mass).sum() + self.tail_mean.sum())

    def length_marginal(self, x_max: int) -> dict[int, float]:
        out: dict[int, float] = {}
        sel = self.lengths <= x_max
        for x, m in zip(self.lengths[sel], self.mass[sel]):
            out[int(x)] = out.get(int(x), 0.0) + float(m)
        return out

    def as_dict(self, x_max: int | None = None) -> dict[tuple[int, int, int], float]:
        out = {}
        T = self.T
        for a in range(T):
            for b in range(T):
                for x, m in zip(self.lengths[a, b], self.mass[a, b]):
                    if x_max is None or x <= x_max:
                        out[(a, b, int(x))] = float(m)
        return out

    def truncated(self) -> tuple["ExcursionMeasure", float]:
        """Head-only copy renormalised to total mass 1, and the dropped mass."""
        head = float(self.mass.sum())
        dropped = 1.0 - head / self.total
        zero = np.zeros_like(self.tail_mass)
        trunc = ExcursionMeasure(
            self.T, self.cutoff, self.lengths, self.mass / head, zero, zero.copy(), 0.0
        )
        return trunc, dropped


def support_lengths(T: int, cutoff: int) -> np.ndarray:
    """lengths[a, b, k] = 2 (g + T k) with g the class of (b - a), g taken in 1..T."""
    m = cutoff // (2 * T)
    g = _class_index(T)
    g = np.where(g == 0, T, g)
    k = np.arange(m)
    return 2 * (g[:, :, None] + T * k[None, None, :])


def empty_measure(T: int, cutoff: int) -> ExcursionMeasure:
    lengths = support_lengths(T, cutoff)
    return ExcursionMeasure(
        T, cutoff, lengths, np.zeros(lengths.shape), np.zeros((T, T)), np.zeros((T, T))
    )


def measure_from_dict(T: int, cutoff: int, weights: dict[tuple[int, int, int], float]) -> ExcursionMeasure:
    """Build a head-only measure from explicit (alpha, beta, x) weights."""
    mu = empty_measure(T, cutoff)
    for (a, b, x), w in weights.items():
        if x > cutoff:
            raise ValueError(f"length {x} exceeds cutoff {cutoff}")
        g = (b - a) % T
        if x <= 0 or x % 2 or (x // 2) % T != g:
            mu.off_support += w
            continue
        gg = g if g else T
        k = (x // 2 - gg) // T
        mu.mass[a % T, b % T, k] += w
    return mu


def pi_eq(law: ReturnLaw, cutoff: int) -> ExcursionMeasure:
    """Stationary law (1/T) p K_{a,b}(x) of the excursion chain, with exact tails."""
    T = law.T
    lengths = support_lengths(T, cutoff)
    mass = np.zeros(lengths.shape)
    valid = lengths // 2 <= law.n_max
    mass[valid] = law.k_cache[lengths[valid] // 2 - 1] / T
    tail = law.class_mass[_class_index(T)] / T - mass.sum(axis=2)
    return ExcursionMeasure(T, cutoff, lengths, mass, np.maximum(tail, 0.0), np.full((T, T), np.inf))


def mu_b(
    seq: PeriodicSequence,
    law: ReturnLaw,
    b: float,
    p: PhasePoint,
    cutoff: int = 10_000,
) -> ExcursionMeasure:
    """The tilted excursion law pi(a) A(a, b, x) v_b / (Z v_a)."""
    if b < 0:
        raise ValueError(f"b must be >= 0, got {b}")
    T = seq.period_T
    if cutoff // 2 > law.n_max:
        raise ValueError("cutoff beyond the cached return-law range")
    ed = eigen(seq, law, b, p)
    xi = xi_matrix(seq).xi
    g = _class_index(T)
    log_c = (
        np.log(ed.pi)[:, None] + np.log(ed.v)[None, :] - np.log(ed.v)[:, None] - ed.log_z
    )

    lengths = support_lengths(T, cutoff)
    x = lengths.astype(float)
    log_k = law.log_k[lengths // 2 - 1]
    log_w = np.logaddexp(-b * x, -2.0 * p.lam * xi[:, :, None] - (b + 2.0 * p.lam * p.h) * x) - LOG2
    mass = np.exp(log_c[:, :, None] + log_k + log_w)

    c2 = b + 2.0 * p.lam * p.h
    first_mass = law.log_laplace(b)[g]
    second_mass = -2.0 * p.lam * xi + law.log_laplace(c2)[g]
    full_mass = np.exp(log_c + np.logaddexp(first_mass, second_mass) - LOG2)
    tail_mass = np.maximum(full_mass - mass.sum(axis=2), 0.0)

    if b == 0:
        tail_mean = np.full((T, T), np.inf)
    else:
        first_mean = law.log_laplace_mean(b)[g]
        second_mean = -2.0 * p.lam * xi + law.log_laplace_mean(c2)[g]
        full_mean = np.exp(log_c + np.logaddexp(first_mean, second_mean) - LOG2)
        tail_mean = np.maximum(full_mean - (x * mass).sum(axis=2), 0.0)
    return ExcursionMeasure(T, cutoff, lengths, mass, tail_mass, tail_mean)


def mean_excursion(mu: ExcursionMeasure) -> float:
    """sum x mu(x), tails included; +inf when the tail has no finite mean."""
    return mu.mean_x


def in_p(mu: ExcursionMeasure, tol: float = 1e-10) -> bool:
    if mu.off_support > 0:
        return False
    first, second = mu.marginals()
    return bool(np.max(np.abs(first - second)) <= tol and abs(mu.total - 1.0) <= tol)


def rate_I(seq: PeriodicSequence, law: ReturnLaw, mu: ExcursionMeasure) -> float:
    """Relative-entropy cost of ``mu``; +inf outside P.  Head-only measures."""
    if np.any(mu.tail_mass > 0):
        raise ValueError("rate_I needs a head-only measure; truncate first")
    if not in_p(mu):
        return math.inf
    first, _ = mu.marginals()
    pos = mu.mass > 0
    k = law.k_cache[mu.lengths // 2 - 1]
    ref = first[:, None, None] * k
    ref = np.broadcast_to(ref, mu.mass.shape)
    return float(np.sum(mu.mass[pos] * np.log(mu.mass[pos] / ref[pos])))


def energy(seq: PeriodicSequence, mu: ExcursionMeasure, p: PhasePoint) -> float:
    """sum Phi mu over the head of ``mu``."""
    xi = xi_matrix(seq).xi
    ph = phi(p, xi[:, :, None], mu.lengths)
    pos = mu.mass > 0
    return float(np.sum(mu.mass[pos] * np.broadcast_to(ph, mu.mass.shape)[pos]))


def functional_Q(seq: PeriodicSequence, law: ReturnLaw, mu: ExcursionMeasure, p: PhasePoint) -> float:
    rate = rate_I(seq, law, mu)
    if math.isinf(rate):
        return -math.inf
    return energy(seq, mu, p) - rate


def entropy_gap(mu: ExcursionMeasure, ref: ExcursionMeasure) -> float:
    """Averaged conditional relative entropy of ``mu`` given its first class, w.r.t. ``ref``."""
    first, _ = mu.marginals()
    ref_first, _ = ref.marginals()
    pos = mu.mass > 0
    cond = mu.mass / first[:, None, None]
    ref_cond = ref.mass / ref_first[:, None, None]
    return float(np.sum(mu.mass[pos] * np.log(cond[pos] / ref_cond[pos])))
