"""Werner-pair swapping and purification recurrences, and the round scheduler.

Purification uses the bilateral-CNOT recurrence whose success probability is
``F^2 + 2F(1-F)/3 + 5(1-F)^2/9``.  The variant with ``2(1-F)/3`` as the middle
term is available as ``formula="as-printed"`` for sensitivity studies; it does
not conserve the maximally mixed fixed point and does not match the circuit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import werner_matrix
from .fock import FockDensity

FORMULAS = ("oracle", "as-printed")
MAX_ROUNDS = 40


@dataclass(frozen=True)
class WernerPair:
    fidelity: float

    def __post_init__(self):
        _check_fidelity(self.fidelity)

    def matrix(self) -> np.ndarray:
        return werner_matrix(self.fidelity)


def _check_fidelity(f: float) -> None:
    if not 0.25 - 1e-12 <= f <= 1.0 + 1e-12:
        raise ValueError(f"Werner fidelity must lie in [0.25, 1], got {f}")


def swap_fidelity(f: float, f2: float | None = None) -> float:
    """Fidelity after swapping two Werner pairs (equal fidelities by default)."""
    f2 = f if f2 is None else f2
    _check_fidelity(f)
    _check_fidelity(f2)
    return f * f2 + (1 - f) * (1 - f2) / 3


def purify(f: float, formula: str = "oracle") -> tuple[float, float]:
    """(output fidelity, success probability) of one purification step on two
    copies of a Werner pair of fidelity ``f``."""
    _check_fidelity(f)
    e = 1.0 - f
    if formula == "oracle":
        p = f * f + 2.0 * f * e / 3.0 + 5.0 * e * e / 9.0
    elif formula == "as-printed":
        p = f * f + 2.0 * e / 3.0 + 5.0 * e * e / 9.0
    else:
        raise ValueError(f"unknown purification formula {formula!r}")
    return (f * f + e * e / 9.0) / p, p


@dataclass(frozen=True)
class PurificationSchedule:
    """Symmetric schedule: ``rounds`` purification steps on every elementary
    link, then the swaps."""

    f_initial: float
    f_required: float
    num_links: int
    rounds: int
    fidelity_trajectory: tuple[float, ...]
    success_probabilities: tuple[float, ...]
    final_fidelity_after_swap: float
    feasible: bool = True
    fixed_point: float = 1.0
    formula: str = "oracle"

    @property
    def initial_pairs_per_link(self) -> int:
        return 2 ** self.rounds

    @property
    def fidelity_after_purification(self) -> float:
        return self.fidelity_trajectory[-1]


class InfeasibleSchedule(ValueError):
    def __init__(self, schedule: PurificationSchedule):
        super().__init__(
            f"F_req={schedule.f_required} unreachable from F_i={schedule.f_initial}; "
            f"purification saturates at {schedule.fixed_point:.6f}"
        )
        self.schedule = schedule


def chain_fidelity(f: float, num_links: int) -> float:
    """End-to-end fidelity after swapping ``num_links`` equal pairs (nested)."""
    if num_links < 1 or num_links & (num_links - 1):
        raise ValueError("num_links must be a power of two")
    while num_links > 1:
        f = swap_fidelity(f)
        num_links //= 2
    return f


def purification_fixed_point(f: float, formula: str = "oracle", tol: float = 1e-13) -> float:
    for _ in range(10_000):
        nxt = purify(f, formula)[0]
        if abs(nxt - f) < tol:
            return nxt
        f = nxt
    return f


def solve_schedule(f_initial: float, f_required: float, num_links: int = 2,
                   formula: str = "oracle", max_rounds: int = MAX_ROUNDS) -> PurificationSchedule:
    """Fewest purification rounds per link such that the swapped chain reaches
    ``f_required``.  Infeasible targets give ``feasible=False``."""
    _check_fidelity(f_initial)
    traj = [f_initial]
    probs = []
    f = f_initial
    while True:
        out = chain_fidelity(f, num_links)
        if out >= f_required - 1e-15:
            return PurificationSchedule(f_initial, f_required, num_links, len(probs),
                                        tuple(traj), tuple(probs), out, True,
                                        purification_fixed_point(f_initial, formula), formula)
        if len(probs) >= max_rounds:
            break
        nf, p = purify(f, formula)
        if nf <= f + 1e-15:
            break
        traj.append(nf)
        probs.append(p)
        f = nf
    fixed = purification_fixed_point(f_initial, formula)
    return PurificationSchedule(f_initial, f_required, num_links, len(probs), tuple(traj),
                                tuple(probs), chain_fidelity(f, num_links), False, fixed, formula)


def werner_from_fock(pair: WernerPair | float) -> FockDensity:
    """Werner pair in two single-rail modes: qubit |0>,|1> = photon number 0, 1."""
    f = pair.fidelity if isinstance(pair, WernerPair) else float(pair)
    _check_fidelity(f)
    return FockDensity((1, 1), werner_matrix(f).astype(complex))
