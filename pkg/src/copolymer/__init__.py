"""Free energy and phase diagram of a periodic copolymer at a selective interface."""

from .free_energy import FreeEnergyResult, free_energy, solve_b_tilde, variational_check
from .oracle import (
    EmpiricalStats,
    PathSample,
    excursion_stats,
    free_energy_estimate,
    height_marginal,
    log_partition_exact,
    sample_paths,
    tail_decay_check,
)
from .phase import (
    CriticalPoint,
    Phase,
    a_hat,
    classify,
    critical_h,
    m_big_omega,
    m_omega,
    small_lambda_bracket,
    sweep_curve,
    z_hat,
)
from .return_law import C_K, ReturnLaw, class_mass, conditional_k, k_exact, laplace_class
from .sequence import (
    PeriodicSequence,
    SequenceError,
    diblock,
    parse_sequence,
    read_sequence,
    switched_alternating,
    xi_matrix,
)
from .transfer import (
    EigenData,
    ExcursionMeasure,
    NumericalError,
    PhasePoint,
    a_matrix,
    eigen,
    energy,
    entropy_gap,
    functional_Q,
    in_p,
    log_z,
    mean_excursion,
    mu_b,
    perron,
    phi,
    phi_tilde,
    pi_eq,
    rate_I,
)

__all__ = [name for name in dir() if not name.startswith("_")]
