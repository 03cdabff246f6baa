"""Waiting times and repeater rates.

A protocol's timing is described by a small tree of retry structures
(:class:`ParallelWait`, :class:`Retry`, :class:`Serial`, :class:`Fixed`).
``expected_time`` evaluates it in closed form; ``monte_carlo_wait`` samples
the same tree and serves as the oracle for the closed forms.

Timing defaults: one elementary attempt per link lasts ``L0/c``; each
heralded coordination step (purification outcome, link herald) costs a
further ``L0/c``; the final correction after the swap costs ``L_total/c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .dv_repeater import InfeasibleSchedule, PurificationSchedule
from .params import ChannelSpec
from .teleport import TeleporterConfig

#: trials per independently seeded Monte Carlo chunk
MC_CHUNK = 10_000
#: source/detector clock floor so zero-length links still have a finite rate
MIN_ATTEMPT_TIME_S = 1e-6


class InfeasibleRate(ValueError):
    pass


# ------------------------------------------------------------- structures

@dataclass(frozen=True)
class Fixed:
    seconds: float


@dataclass(frozen=True)
class ParallelWait:
    """``n`` independent geometric processes with memory; done when all have succeeded."""

    p: float
    n: int
    attempt_time: float


@dataclass(frozen=True)
class Retry:
    """Run ``body`` then pay ``extra`` seconds; succeed with ``p`` or start over."""

    body: "Node"
    p: float
    extra: float = 0.0


@dataclass(frozen=True)
class Serial:
    parts: tuple["Node", ...]


Node = Union[Fixed, ParallelWait, Retry, Serial]


def expected_parallel_wait(p: float, n: int, attempt_time: float = 1.0) -> float:
    """Expected time until all of ``n`` geometric(p) processes have fired."""
    if not 0.0 < p <= 1.0:
        raise InfeasibleRate(f"success probability {p} must lie in (0, 1]")
    if n < 1:
        raise ValueError("need at least one process")
    if p == 1.0:
        return attempt_time
    if n <= 24:
        q = 1.0 - p
        total = 0.0
        for j in range(1, n + 1):
            total += math.comb(n, j) * (-1) ** (j + 1) / -math.expm1(j * math.log(q))
        return attempt_time * total
    # large n: E[max] = sum_t 1 - (1 - q^t)^n, summed in blocks until negligible
    log_q = math.log1p(-p)
    total, t0, block = 0.0, 0, 100_000
    while True:
        t = np.arange(max(t0, 1), t0 + block, dtype=float)
        terms = -np.expm1(n * np.log1p(-np.exp(t * log_q)))
        if t0 == 0:
            total += 1.0
        total += float(np.sum(terms))
        if terms[-1] < 1e-18 * total:
            return attempt_time * total
        t0 += block


def expected_time(node: Node) -> float:
    if isinstance(node, Fixed):
        return node.seconds
    if isinstance(node, ParallelWait):
        return expected_parallel_wait(node.p, node.n, node.attempt_time)
    if isinstance(node, Retry):
        if node.p <= 0.0:
            raise InfeasibleRate("a retry stage never succeeds")
        return (expected_time(node.body) + node.extra) / node.p
    if isinstance(node, Serial):
        return sum(expected_time(p) for p in node.parts)
    raise TypeError(f"unknown node {node!r}")


def _sample(node: Node, size: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(node, Fixed):
        return np.full(size, node.seconds)
    if isinstance(node, ParallelWait):
        if node.p >= 1.0:
            return np.full(size, node.attempt_time)
        draws = rng.geometric(node.p, size=(size, node.n))
        return draws.max(axis=1) * node.attempt_time
    if isinstance(node, Retry):
        tries = rng.geometric(node.p, size=size) if node.p < 1.0 else np.ones(size, dtype=int)
        flat = _sample(node.body, int(tries.sum()), rng) + node.extra
        starts = np.concatenate(([0], np.cumsum(tries)[:-1]))
        return np.add.reduceat(flat, starts)
    if isinstance(node, Serial):
        out = np.zeros(size)
        for part in node.parts:
            out += _sample(part, size, rng)
        return out
    raise TypeError(f"unknown node {node!r}")


def monte_carlo_wait(node: Node, trials: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Sample mean and standard error of the completion time of ``node``.

    Trials are drawn in chunks of ``MC_CHUNK``, chunk ``i`` using the ``i``-th
    child of ``SeedSequence(seed)``, so results depend only on (trials, seed).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    children = np.random.SeedSequence(seed).spawn(math.ceil(trials / MC_CHUNK))
    samples = []
    left = trials
    for child in children:
        size = min(MC_CHUNK, left)
        samples.append(_sample(node, size, np.random.default_rng(child)))
        left -= size
    x = np.concatenate(samples)
    stderr = float(x.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return float(x.mean()), stderr


# ------------------------------------------------------------- breakdowns

@dataclass(frozen=True)
class RateBreakdown:
    attempt_time_s: float
    p_elementary: float
    expected_attempts: float
    cc_delay_s: float
    pairs_per_second: float
    components: tuple[tuple[str, float], ...] = field(default_factory=tuple)
    structure: Node | None = None

    @property
    def expected_time_s(self) -> float:
        return 1.0 / self.pairs_per_second

    def as_columns(self, prefix: str) -> dict[str, float]:
        cols = {
            f"{prefix}_attempt_time_s": self.attempt_time_s,
            f"{prefix}_p_elementary": self.p_elementary,
            f"{prefix}_expected_attempts": self.expected_attempts,
            f"{prefix}_cc_delay_s": self.cc_delay_s,
        }
        for name, t in self.components:
            cols[f"{prefix}_t_{name}_s"] = t
        return cols


def attempt_time(link: ChannelSpec) -> float:
    return max(link.travel_time_s, MIN_ATTEMPT_TIME_S)


def elementary_success_prob(link: ChannelSpec) -> float:
    """Per-attempt probability that a DV pair is heralded across ``link``."""
    return link.transmittance


def dv_timing(schedule: PurificationSchedule, link: ChannelSpec, num_chains: int = 1,
              teleporter_success: float = 1.0) -> tuple[Node, dict[str, float]]:
    """Retry tree of the DV protocol.

    All ``num_chains * num_links * 2^rounds`` elementary pairs are generated
    in parallel with memory; the purification tree then runs (one link-length
    classical delay per round); any failed purification discards the block.
    After the swap and the end-to-end correction the teleporter succeeds with
    ``teleporter_success``; a failure restarts everything.
    """
    if not schedule.feasible:
        raise InfeasibleSchedule(schedule)
    p0 = elementary_success_prob(link)
    t_att = attempt_time(link)
    t_cc = link.travel_time_s
    t_end = schedule.num_links * link.travel_time_s
    r = schedule.rounds
    links = schedule.num_links * num_chains
    p_tree = 1.0
    for k, pk in enumerate(schedule.success_probabilities, start=1):
        p_tree *= pk ** (2 ** (r - k))
    p_block = p_tree ** links
    gen = ParallelWait(p0, links * 2 ** r, t_att)
    node = Retry(Serial((Retry(gen, p_block, r * t_cc), Fixed(t_end))), teleporter_success)
    if p_block > 0:
        parts = {
            "generation": expected_parallel_wait(p0, links * 2 ** r, t_att) / p_block,
            "purification_cc": r * t_cc / p_block,
            "swap_cc": t_end,
        }
    else:
        parts = {"generation": math.inf, "purification_cc": math.inf, "swap_cc": t_end}
    parts = {k: v / teleporter_success for k, v in parts.items()}
    return node, parts


def dv_repeater_rate(schedule: PurificationSchedule, link: ChannelSpec,
                     teleporter: TeleporterConfig | None = None,
                     optical_success: float = 1.0) -> RateBreakdown:
    """Rate of CV-state deliveries backed by ``N`` parallel DV repeater chains.

    ``optical_success`` is the split/recombination herald probability of the
    teleporter for the state being sent; the Bell measurements contribute
    ``bsm_success_prob ** N``.
    """
    teleporter = teleporter or TeleporterConfig(1, 1.0, schedule.final_fidelity_after_swap)
    n = teleporter.num_modes
    p_tel = optical_success * teleporter.bsm_success_prob ** n
    if p_tel <= 0:
        raise InfeasibleRate("teleporter never succeeds")
    node, parts = dv_timing(schedule, link, n, p_tel)
    p0 = elementary_success_prob(link)
    if not math.isfinite(parts["generation"]):
        # purification tree success underflows: the rate is zero to double precision
        return RateBreakdown(attempt_time(link), p0, math.inf, math.inf, 0.0,
                             tuple(parts.items()), node)
    total = expected_time(node)
    attempts = parts["generation"] / attempt_time(link)
    cc = parts["purification_cc"] + parts["swap_cc"]
    return RateBreakdown(attempt_time(link), p0, attempts, cc, 1.0 / total,
                         tuple(parts.items()), node)


def cv_timing(p_link: float, p_top: float, link: ChannelSpec, num_links: int = 2) -> Node:
    """Both links retry independently until each NLA heralds; a top-level NLA
    failure restarts both links."""
    t = link.travel_time_s
    return Serial((Retry(ParallelWait(p_link, num_links, attempt_time(link)), p_top, t),
                   Fixed(num_links * t)))


def cv_rate_from_probs(p_link: float, p_top: float, link: ChannelSpec) -> RateBreakdown:
    if p_top <= 0 or p_link <= 0:
        raise InfeasibleRate("CV heralds never succeed")
    node = cv_timing(p_link, p_top, link)
    total = expected_time(node)
    t = link.travel_time_s
    t_att = attempt_time(link)
    gen = expected_parallel_wait(p_link, 2, t_att) / p_top
    parts = {"link_heralds": gen, "link_cc": t / p_top, "end_cc": 2 * t}
    attempts = gen / t_att
    return RateBreakdown(t_att, p_link, attempts, parts["link_cc"] + parts["end_cc"], 1.0 / total,
                         tuple(parts.items()), node)


def cv_repeater_rate(output, link: ChannelSpec) -> RateBreakdown:
    """Rate of the two-link CV repeater from its herald probabilities."""
    return cv_rate_from_probs(output.p_link, output.p_top, link)
