"""Free energy from the root of Z(b, lambda, h) = 1."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .return_law import ReturnLaw
from .sequence import PeriodicSequence
from .transfer import EIG_TOL, PhasePoint, log_z, mean_excursion, mu_b

ROOT_TOL = 1e-10
CRITICAL_TOL = 1e-9


def bisect_log_root(lz, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Root of a decreasing ``lz`` with lz(lo) > 0 >= lz(hi).

    Stops once the bracket is below ``tol`` and |exp(lz) - 1| <= tol, or when
    the bracket cannot shrink further.  Returns the midpoint and |exp(lz) - 1|.
    """
    while True:
        mid = 0.5 * (lo + hi)
        val = lz(mid)
        residual = abs(math.expm1(val))
        if (hi - lo <= tol and residual <= tol) or mid in (lo, hi):
            return mid, residual
        if val > 0.0:
            lo = mid
        else:
            hi = mid


@dataclass(frozen=True)
class FreeEnergyResult:
    b_tilde: float
    f: float
    z_at_zero: float
    converged: bool
    residual: float


def solve_b_tilde(
    seq: PeriodicSequence,
    law: ReturnLaw,
    p: PhasePoint,
    tol: float = ROOT_TOL,
    max_doublings: int = 60,
    eig_tol: float = EIG_TOL,
) -> FreeEnergyResult:
    """Excess free energy: the root of Z(b) = 1, or 0 if Z(0) <= 1.

    Z is strictly decreasing in b, so plain bisection is safe even where the
    heavy tail makes derivatives awkward near b = 0.
    """
    def lz(b: float) -> float:
        return log_z(seq, law, b, p, eig_tol)

    lz0 = lz(0.0)
    z0 = math.exp(lz0)
    if lz0 <= 0.0:
        return FreeEnergyResult(0.0, p.lam * p.h, z0, True, 0.0)

    lo, hi = 0.0, 1.0
    for _ in range(max_doublings):
        if lz(hi) < 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        return FreeEnergyResult(hi, p.lam * p.h + hi, z0, False, math.nan)

    b, residual = bisect_log_root(lz, lo, hi, tol)
    return FreeEnergyResult(b, p.lam * p.h + b, z0, True, residual)


def free_energy(seq: PeriodicSequence, law: ReturnLaw, p: PhasePoint) -> float:
    return solve_b_tilde(seq, law, p).f


def variational_objective(seq: PeriodicSequence, law: ReturnLaw, p: PhasePoint, b: float) -> float:
    """b + log Z(b) / f(b), with f the mean excursion length under mu_b."""
    mean = mean_excursion(mu_b(seq, law, b, p, cutoff=2 * law.T))
    return b + log_z(seq, law, b, p) / mean


def variational_check(
    seq: PeriodicSequence, law: ReturnLaw, p: PhasePoint, b_grid
) -> float:
    """Maximum of the variational objective over ``b_grid``."""
    grid = np.asarray(list(b_grid), dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("b_grid must be nonempty and positive")
    return max(variational_objective(seq, law, p, float(b)) for b in grid)


def variational_argmax(seq: PeriodicSequence, law: ReturnLaw, p: PhasePoint, b_grid) -> float:
    grid = np.asarray(list(b_grid), dtype=float)
    values = [variational_objective(seq, law, p, float(b)) for b in grid]
    return float(grid[int(np.argmax(values))])
