"""Critical curve, phase labels and the small/large coupling constants."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import enum
import math
import os

import numpy as np

from .free_energy import CRITICAL_TOL, bisect_log_root
from .return_law import C_K, ReturnLaw, class_mass_vector
from .sequence import PeriodicSequence, xi_matrix
from .transfer import EIG_TOL, NumericalError, PhasePoint, _class_index, log_z, perron

H_TOL = 1e-10


class Phase(str, enum.Enum):
    LOCALIZED = "Localized"
    DELOCALIZED = "Delocalized"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class CriticalPoint:
    lam: float
    h_c: float
    residual: float


def _threads() -> int:
    return max(1, int(os.environ.get("COPOLYMER_THREADS", "1")))


def critical_h(
    seq: PeriodicSequence,
    law: ReturnLaw,
    lam: float,
    tol: float = H_TOL,
    eig_tol: float = EIG_TOL,
) -> CriticalPoint:
    """Solve Z(0, lambda, h) = 1 for h by bisection on [0, 1]."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if lam == 0:
        return CriticalPoint(0.0, 0.0, 0.0)

    def lz(h: float) -> float:
        return log_z(seq, law, 0.0, PhasePoint(lam, h), eig_tol)

    if lz(0.0) <= 0.0:
        return CriticalPoint(lam, 0.0, abs(math.expm1(lz(0.0))))
    h, residual = bisect_log_root(lz, 0.0, 1.0, tol)
    return CriticalPoint(lam, h, residual)


def sweep_curve(
    seq: PeriodicSequence,
    law: ReturnLaw,
    lambda_grid,
    tol: float = H_TOL,
    eig_tol: float = EIG_TOL,
) -> list[CriticalPoint]:
    grid = [float(x) for x in lambda_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda grid must be sorted ascending")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(lambda lam: critical_h(seq, law, lam, tol, eig_tol), grid))


def slope_diagnostics(points: list[CriticalPoint]) -> list[dict]:
    """Incremental ratios of h_c against the (1 - h_c)/lambda ceiling."""
    rows = []
    for a, b in zip(points, points[1:]):
        dl = b.lam - a.lam
        if dl <= 0 or a.lam <= 0:
            continue
        rows.append(
            {
                "lambda": a.lam,
                "ratio": (b.h_c - a.h_c) / dl,
                "bound": (1.0 - a.h_c) / a.lam,
            }
        )
    return rows


def classify(
    seq: PeriodicSequence,
    law: ReturnLaw,
    p: PhasePoint,
    tol: float = CRITICAL_TOL,
    eig_tol: float = EIG_TOL,
) -> Phase:
    z0 = math.exp(log_z(seq, law, 0.0, p, eig_tol))
    if z0 > 1.0 + tol:
        return Phase.LOCALIZED
    if z0 < 1.0 - tol:
        return Phase.DELOCALIZED
    return Phase.CRITICAL


def _pxi2(seq: PeriodicSequence) -> float:
    T = seq.period_T
    masses = class_mass_vector(T)[_class_index(T)]
    xi = xi_matrix(seq).xi.astype(float)
    return float(np.sum(masses * xi**2))


def m_omega(seq: PeriodicSequence, law: ReturnLaw | None = None) -> float:
    """Small-coupling constant: h_c ~ m_omega * lambda^3."""
    return (_pxi2(seq) / (2.0 * seq.period_T)) ** 2


def small_lambda_bracket(seq: PeriodicSequence, m: float) -> float:
    """Second-order coefficient of Z(0, lambda, m lambda^3) - 1; vanishes at m_omega."""
    return _pxi2(seq) / (2.0 * seq.period_T) - C_K * math.sqrt(math.pi / 2.0 * m)


def _exceptional(seq: PeriodicSequence, law: ReturnLaw) -> tuple[np.ndarray, np.ndarray]:
    """Pairs where an excursion of length -xi exists; returns (length, K value)."""
    T = seq.period_T
    xi = xi_matrix(seq).xi
    g = _class_index(T)
    xhat = -xi
    ok = (xhat > 0) & (xhat % 2 == 0) & ((xhat // 2) % T == g)
    kval = np.zeros((T, T))
    for a, b in zip(*np.nonzero(ok)):
        kval[a, b] = law.k(int(xhat[a, b]))
    return np.where(ok, xhat, 0), kval


def a_hat(seq: PeriodicSequence, law: ReturnLaw, M: float) -> np.ndarray:
    """Limit matrix for h = 1 - M/lambda as lambda grows."""
    T = seq.period_T
    base = 0.5 * law.class_mass[_class_index(T)]
    xhat, kval = _exceptional(seq, law)
    return base + 0.5 * kval * np.exp(2.0 * M * xhat)


def z_hat(seq: PeriodicSequence, law: ReturnLaw, M: float) -> float:
    return perron(a_hat(seq, law, M)).z


def m_big_omega(seq: PeriodicSequence, law: ReturnLaw, tol: float = 1e-13) -> float:
    """Large-coupling constant: h_c = 1 - M_omega / lambda + o(1/lambda)."""
    lo, hi = 0.0, 1.0
    while z_hat(seq, law, hi) < 1.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise NumericalError("Z_hat never reaches 1; xi has no exceptional excursion")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if z_hat(seq, law, mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
