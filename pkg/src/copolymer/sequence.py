"""Periodic charge sequences and the excursion-charge matrix."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SequenceError(ValueError):
    """Base class for rejected charge sequences."""


class InvalidCharacters(SequenceError):
    pass


class OddLength(SequenceError):
    pass


class NotCentered(SequenceError):
    pass


class Trivial(SequenceError):
    pass


@dataclass(frozen=True)
class PeriodicSequence:
    """One full period (2 * period_T sites) of a centered +/-1 sequence."""

    charges: tuple[int, ...]
    period_T: int

    def __post_init__(self) -> None:
        if len(self.charges) != 2 * self.period_T:
            raise OddLength(
                f"period has {len(self.charges)} sites, expected {2 * self.period_T}"
            )
        if sum(self.charges) != 0:
            raise NotCentered(f"period sum is {sum(self.charges)}, expected 0")

    def __str__(self) -> str:
        return render(self)

    def array(self) -> np.ndarray:
        return np.asarray(self.charges, dtype=np.int64)

    def omega(self, x: int) -> int:
        """Charge of monomer ``x`` (1-indexed, extended periodically)."""
        return self.charges[(x - 1) % len(self.charges)]


@dataclass(frozen=True)
class XiMatrix:
    xi: np.ndarray = field(repr=False)
    xi_star: int
    offsets: np.ndarray = field(repr=False)

    @property
    def T(self) -> int:
        return len(self.offsets)


def render(seq: PeriodicSequence) -> str:
    return "".join("+" if c > 0 else "-" for c in seq.charges)


def _minimal_even_period(charges: list[int]) -> int:
    n = len(charges)
    for d in range(2, n + 1, 2):
        if n % d == 0 and all(charges[i] == charges[i % d] for i in range(n)):
            return d
    return n


def parse_sequence(tokens: str) -> PeriodicSequence:
    """Parse a string of '+'/'-' into a reduced, validated sequence.

    The string is read as one period (any number of repetitions is fine) and
    reduced to its minimal even period before the triviality test is applied.
    """
    s = "".join(tokens.split())
    if not s:
        raise InvalidCharacters("empty sequence")
    bad = set(s) - {"+", "-"}
    if bad:
        raise InvalidCharacters(f"unexpected characters {sorted(bad)!r}")
    if len(s) % 2:
        raise OddLength(f"length {len(s)} is odd")
    charges = [1 if c == "+" else -1 for c in s]
    if sum(charges) != 0:
        raise NotCentered(f"period sum is {sum(charges)}, expected 0")

    d = _minimal_even_period(charges)
    reduced = charges[:d]
    if all(reduced[2 * k] * reduced[2 * k + 1] == -1 for k in range(d // 2)):
        raise Trivial("Trivial: every pair (omega_{2k-1}, omega_{2k}) has opposite signs")
    return PeriodicSequence(tuple(reduced), d // 2)


def read_sequence(source: str) -> PeriodicSequence:
    """Accept either a literal '+'/'-' string or a path to a one-line file."""
    stripped = source.strip()
    if stripped and set(stripped) <= {"+", "-"}:
        return parse_sequence(stripped)
    path = Path(source)
    if path.is_file():
        return parse_sequence(path.read_text().strip())
    return parse_sequence(stripped)


def xi_matrix(seq: PeriodicSequence) -> XiMatrix:
    """Net charge picked up by an excursion from class alpha to class beta.

    ``offsets[g]`` is the charge of the first ``2g`` monomers; the matrix is
    ``offsets[beta] - offsets[alpha]``.
    """
    arr = seq.array()
    partial = np.concatenate(([0], np.cumsum(arr)))
    offsets = partial[0 : 2 * seq.period_T : 2].astype(np.int64)
    xi = offsets[None, :] - offsets[:, None]
    return XiMatrix(xi=xi, xi_star=int(np.abs(xi).max()), offsets=offsets)


def diblock(T: int) -> PeriodicSequence:
    if T < 2:
        raise ValueError(f"diblock needs T >= 2, got {T}")
    return parse_sequence("+" * T + "-" * T)


def switched_alternating(k: int) -> PeriodicSequence:
    """Alternating +-+-... with one '-+' turned into '+-' every 2k sites."""
    if k < 2:
        raise ValueError(f"switched_alternating needs k >= 2, got {k}")
    # over one period the swap touches site 2k and site 2k+1 (= site 1 of the next period)
    period = ["+" if i % 2 == 0 else "-" for i in range(2 * k)]
    period[0] = "-"
    period[-1] = "+"
    return parse_sequence("".join(period))
