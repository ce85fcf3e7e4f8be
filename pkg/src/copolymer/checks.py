"""Self-consistency checks run by ``copolymer verify``."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .free_energy import solve_b_tilde
from .oracle import free_energy_estimate
from .phase import m_omega, small_lambda_bracket, z_hat
from .return_law import ReturnLaw
from .sequence import PeriodicSequence
from .transfer import PhasePoint, _class_index, functional_Q, log_z, mu_b


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value, "tolerance": self.tolerance}


def _result(name: str, value: float, tol: float) -> CheckResult:
    return CheckResult(name, bool(value <= tol), float(value), tol)


def closed_form_eigenvalue(seq, law, bs=(0.01, 0.1, 0.5, 1.0, 5.0)) -> CheckResult:
    err = max(
        abs(math.exp(log_z(seq, law, b, PhasePoint(0.0, 0.0))) - (1.0 - math.sqrt(-math.expm1(-2.0 * b))))
        for b in bs
    )
    return _result("closed_form_eigenvalue", err, 1e-12)


def class_masses_bistochastic(seq, law) -> CheckResult:
    P = law.class_mass[_class_index(seq.period_T)]
    err = max(np.abs(P.sum(axis=0) - 1).max(), np.abs(P.sum(axis=1) - 1).max())
    return _result("class_masses_bistochastic", float(err), 1e-12)


def derivative_identity(seq, law, p=PhasePoint(0.7, 0.1), bs=(0.1, 0.5, 1.0), step=1e-5) -> CheckResult:
    worst = 0.0
    for b in bs:
        fd = (log_z(seq, law, b + step, p) - log_z(seq, law, b - step, p)) / (2 * step)
        mean = mu_b(seq, law, b, p, cutoff=2 * law.T).mean_x
        worst = max(worst, abs(fd + mean) / mean)
    return _result("derivative_identity", worst, 1e-6)


def variational_identity(seq, law, p=PhasePoint(0.7, 0.1), b=0.5, cutoff=10_000) -> CheckResult:
    mu, _ = mu_b(seq, law, b, p, cutoff=cutoff).truncated()
    err = abs(functional_Q(seq, law, mu, p) - (b * mu.mean_x + log_z(seq, law, b, p)))
    return _result("variational_identity", err, 1e-8)


def monotone_in_b(seq, law, p=PhasePoint(0.7, 0.1)) -> CheckResult:
    values = [log_z(seq, law, b, p) for b in np.arange(0.0, 1.0001, 0.05)]
    worst = max(0.0, max(b - a for a, b in zip(values, values[1:])))
    return _result("z_decreasing_in_b", worst, 0.0)


def small_lambda_routes(seq) -> CheckResult:
    return _result("m_omega_bracket", abs(small_lambda_bracket(seq, m_omega(seq))), 1e-10)


def z_hat_limit(seq, law, lam=20.0) -> CheckResult:
    """Z_hat(0) is the h = 1 eigenvalue in the large-lambda limit (error <= exp(-4 lambda))."""
    exact = math.exp(log_z(seq, law, 0.0, PhasePoint(lam, 1.0)))
    return _result("z_hat_limit", abs(z_hat(seq, law, 0.0) - exact), 1e-12)


def oracle_agreement(seq, law, p=PhasePoint(1.0, 0.0), n_list=(2000, 4000, 8000), n_max=30_000) -> CheckResult:
    f_est, _ = free_energy_estimate(seq, p, n_list, n_max)
    return _result("oracle_agreement", abs(f_est - solve_b_tilde(seq, law, p).f), 5e-3)


def run_all(seq: PeriodicSequence, law: ReturnLaw, n_max_oracle: int = 30_000) -> list[CheckResult]:
    return [
        closed_form_eigenvalue(seq, law),
        class_masses_bistochastic(seq, law),
        derivative_identity(seq, law),
        variational_identity(seq, law),
        monotone_in_b(seq, law),
        small_lambda_routes(seq),
        z_hat_limit(seq, law),
        oracle_agreement(seq, law, n_max=n_max_oracle),
    ]
