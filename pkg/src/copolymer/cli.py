"""Command-line interface: ``copolymer {eval,curve,sweep,asym,verify,oracle,sample}``."""

from __future__ import annotations

import argparse
from contextlib import contextmanager
from dataclasses import dataclass
import json
import math
import sys

import numpy as np

from . import checks
from .free_energy import ROOT_TOL, solve_b_tilde
from .oracle import N_MAX_DEFAULT, excursion_stats, free_energy_estimate, sample_paths
from .phase import (
    Phase,
    classify,
    m_big_omega,
    m_omega,
    sweep_curve,
    z_hat,
)
from .return_law import SERIES_TOL, ReturnLaw
from .sequence import PeriodicSequence, SequenceError, read_sequence, xi_matrix
from .transfer import EIG_TOL, NumericalError, PhasePoint, mean_excursion, mu_b

EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    omega: str
    eig_tol: float = EIG_TOL
    root_tol: float = ROOT_TOL
    tail_tol: float = SERIES_TOL
    n_max_oracle: int = N_MAX_DEFAULT
    seed: int | None = None
    output: str | None = None
    format: str = "json"

    def __post_init__(self) -> None:
        for name in ("eig_tol", "root_tol", "tail_tol"):
            value = getattr(self, name)
            if not 0 < value <= 1e-3:
                raise InputError(f"{name} must lie in (0, 1e-3], got {value}")
        if self.format not in ("csv", "json"):
            raise InputError(f"unknown format {self.format!r}")

    def sequence(self) -> PeriodicSequence:
        return read_sequence(self.omega)

    def law(self, seq: PeriodicSequence) -> ReturnLaw:
        return ReturnLaw(seq.period_T, series_tol=self.tail_tol)


def fmt(x: float) -> str:
    return format(x, ".12g")


def _clean(obj):
    if isinstance(obj, float) or isinstance(obj, np.floating):
        x = float(obj)
        return float(fmt(x)) if math.isfinite(x) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=False) + "\n"


def to_csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


@contextmanager
def _sink(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _grid(lo: float, hi: float, steps: int) -> list[float]:
    if steps < 1:
        raise InputError("steps must be >= 1")
    if steps == 1:
        return [lo]
    return [float(v) for v in np.linspace(lo, hi, steps)]


def cmd_eval(cfg: RunConfig, lam: float, h: float) -> dict:
    seq = cfg.sequence()
    law = cfg.law(seq)
    p = PhasePoint(lam, h)
    res = solve_b_tilde(seq, law, p, tol=cfg.root_tol, eig_tol=cfg.eig_tol)
    phase = classify(seq, law, p, eig_tol=cfg.eig_tol)
    mean = None
    if phase is Phase.LOCALIZED and res.b_tilde > 0:
        mean = mean_excursion(mu_b(seq, law, res.b_tilde, p, cutoff=2 * seq.period_T))
    return {
        "lambda": lam,
        "h": h,
        "z_at_zero": res.z_at_zero,
        "b_tilde": res.b_tilde,
        "free_energy": res.f,
        "phase": phase.value,
        # D is closed and L open, so boundary points belong to D
        "region": "Localized" if phase is Phase.LOCALIZED else "Delocalized",
        "mean_excursion": mean,
    }


def cmd_curve(cfg: RunConfig, lambda_min: float, lambda_max: float, steps: int) -> list[list]:
    seq = cfg.sequence()
    law = cfg.law(seq)
    points = sweep_curve(seq, law, _grid(lambda_min, lambda_max, steps), cfg.root_tol, cfg.eig_tol)
    return [[pt.lam, pt.h_c, pt.residual] for pt in points]


def cmd_sweep(cfg: RunConfig, lambdas: list[float], hs: list[float]) -> list[list]:
    seq = cfg.sequence()
    law = cfg.law(seq)
    rows = []
    for lam in lambdas:
        for h in hs:
            p = PhasePoint(lam, h)
            res = solve_b_tilde(seq, law, p, tol=cfg.root_tol, eig_tol=cfg.eig_tol)
            rows.append([lam, h, classify(seq, law, p, eig_tol=cfg.eig_tol).value, res.b_tilde])
    return rows


def cmd_asym(cfg: RunConfig) -> dict:
    seq = cfg.sequence()
    law = cfg.law(seq)
    zh0 = z_hat(seq, law, 0.0)
    return {
        "T_omega": seq.period_T,
        "xi_star": xi_matrix(seq).xi_star,
        "m_omega": m_omega(seq),
        "M_omega": m_big_omega(seq, law),
        "z_hat_zero": zh0,
        "z_hat_zero_ok": abs(zh0 - 0.5) <= 1e-12,
    }


def cmd_verify(cfg: RunConfig) -> dict:
    seq = cfg.sequence()
    results = checks.run_all(seq, cfg.law(seq), cfg.n_max_oracle)
    return {
        "omega": str(seq),
        "passed": all(r.passed for r in results),
        "checks": [r.to_json() for r in results],
    }


def cmd_oracle(cfg: RunConfig, lam: float, h: float, n_list: list[int]) -> dict:
    seq = cfg.sequence()
    p = PhasePoint(lam, h)
    f_est, err = free_energy_estimate(seq, p, n_list, cfg.n_max_oracle)
    analytic = solve_b_tilde(seq, cfg.law(seq), p, tol=cfg.root_tol, eig_tol=cfg.eig_tol).f
    return {
        "lambda": lam,
        "h": h,
        "n_list": sorted(n_list),
        "f_est": f_est,
        "err_est": err,
        "fit_model": "f + c*log(N)/N",
        "free_energy": analytic,
        "difference": f_est - analytic,
    }


def cmd_sample(cfg: RunConfig, lam: float, h: float, n: int, count: int, dump: str | None) -> dict:
    seq = cfg.sequence()
    if cfg.seed is None:
        raise InputError("--seed is required for sample")
    p = PhasePoint(lam, h)
    samples = sample_paths(seq, p, n, count, cfg.seed, cfg.n_max_oracle)
    if dump:
        with open(dump, "w", encoding="utf-8", newline="\n") as fh:
            for s in samples:
                fh.write(s.dump() + "\n")
    stats = excursion_stats(samples, seq.period_T)
    out = {"lambda": lam, "h": h, "N": n, "count": count, "seed": cfg.seed}
    out.update(stats.to_json())
    return out


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="copolymer", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--omega", required=True, help="'+'/'-' string or path to a one-line file")
    common.add_argument("--eig-tol", type=float, default=EIG_TOL)
    common.add_argument("--root-tol", type=float, default=ROOT_TOL)
    common.add_argument("--tail-tol", type=float, default=SERIES_TOL)
    common.add_argument("--n-max-oracle", type=int, default=N_MAX_DEFAULT)
    common.add_argument("--output", "-o", default=None)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="free energy and phase at one point")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--h", type=float, required=True)

    p = sub.add_parser("curve", parents=[common], help="critical curve as CSV")
    p.add_argument("--lambda-min", type=float, default=0.1)
    p.add_argument("--lambda-max", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=50)

    p = sub.add_parser("sweep", parents=[common], help="2-D phase grid as CSV")
    p.add_argument("--lambda-min", type=float, default=0.0)
    p.add_argument("--lambda-max", type=float, default=2.0)
    p.add_argument("--lambda-steps", type=int, default=20)
    p.add_argument("--h-min", type=float, default=0.0)
    p.add_argument("--h-max", type=float, default=1.0)
    p.add_argument("--h-steps", type=int, default=20)

    sub.add_parser("asym", parents=[common], help="m_omega and M_omega")
    sub.add_parser("verify", parents=[common], help="run the consistency checks")

    p = sub.add_parser("oracle", parents=[common], help="finite-N free energy extrapolation")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--n-list", default="4000,10000,20000")

    p = sub.add_parser("sample", parents=[common], help="exact path samples and excursion stats")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dump", default=None, help="write one line of heights per path")
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    table = args.command in ("curve", "sweep")
    fmt_name = args.format or ("csv" if table else "json")
    try:
        cfg = RunConfig(
            omega=args.omega,
            eig_tol=args.eig_tol,
            root_tol=args.root_tol,
            tail_tol=args.tail_tol,
            n_max_oracle=args.n_max_oracle,
            seed=getattr(args, "seed", None),
            output=args.output,
            format=fmt_name,
        )
        if args.command == "eval":
            payload = cmd_eval(cfg, args.lam, args.h)
        elif args.command == "curve":
            header = ["lambda", "h_c", "residual"]
            payload = cmd_curve(cfg, args.lambda_min, args.lambda_max, args.steps)
        elif args.command == "sweep":
            header = ["lambda", "h", "phase", "b_tilde"]
            payload = cmd_sweep(
                cfg,
                _grid(args.lambda_min, args.lambda_max, args.lambda_steps),
                _grid(args.h_min, args.h_max, args.h_steps),
            )
        elif args.command == "asym":
            payload = cmd_asym(cfg)
        elif args.command == "verify":
            payload = cmd_verify(cfg)
        elif args.command == "oracle":
            payload = cmd_oracle(cfg, args.lam, args.h, [int(v) for v in _float_list(args.n_list)])
        else:
            payload = cmd_sample(cfg, args.lam, args.h, args.n, args.count, args.dump)
    except (SequenceError, InputError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    if table and fmt_name == "csv":
        text = to_csv(header, payload)
    elif table:
        text = to_json([dict(zip(header, row)) for row in payload])
    else:
        text = to_json(payload)
    with _sink(cfg.output) as out:
        out.write(text)
    if args.command == "verify" and not payload["passed"]:
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
