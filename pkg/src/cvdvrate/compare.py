"""DV versus CV rate sweeps at matched entanglement of formation."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import fock
from .cv_repeater import CvLinkConfig, GainOptimum, InfeasibleEof, default_nla_cutoff, optimize_gain
from .dv_repeater import solve_schedule
from .entanglement import eof_two_qubit
from .params import ChannelSpec, as_chi
from .rates import RateBreakdown, dv_repeater_rate
from .teleport import TeleporterConfig, choose_mode_count, teleport_cv_state

CSV_COLUMNS = ("f_initial", "rounds", "f_after_purification", "f_after_swap", "dv_eof",
               "dv_rate_hz", "cv_gain", "cv_eof", "cv_rate_hz", "crossover_flag")

# 2^-40 relative slack on fidelity bisection is far below the 1e-3 EoF tolerance
_BISECT_STEPS = 60


class InfeasibleConfig(ValueError):
    pass


@dataclass(frozen=True)
class ComparisonConfig:
    chi: float = 0.5
    total_length_km: float = 400.0
    f_initial_grid: tuple = tuple(round(0.60 + 0.01 * k, 2) for k in range(41))
    f_required: float | str = 0.67
    eof_target: float | None = None
    attenuation_db_per_km: float = 0.2
    light_speed_km_per_s: float = 2.0e5
    bsm_success_prob: float = 0.5
    purification_formula: str = "oracle"
    num_modes: int | None = None
    cutoff: int | None = None
    nla_cutoff: int | None = None
    teleport_gain: float | None = None
    gain_scan_points: int = 41
    seed: int = 0
    mc_trials: int = 100_000
    workers: int = 1

    def __post_init__(self):
        as_chi(self.chi)
        object.__setattr__(self, "f_initial_grid", tuple(float(f) for f in self.f_initial_grid))
        if not self.f_initial_grid:
            raise InfeasibleConfig("f_initial_grid is empty")
        for f in self.f_initial_grid:
            if not 0.5 < f <= 1.0:
                raise InfeasibleConfig(f"grid value {f} outside (0.5, 1]")
        if self.f_required != "auto" and not 0.25 <= float(self.f_required) <= 1.0:
            raise InfeasibleConfig(f"f_required {self.f_required} outside [0.25, 1]")
        if self.total_length_km < 0:
            raise InfeasibleConfig("total_length_km must be nonnegative")
        if not 0 < self.bsm_success_prob <= 1:
            raise InfeasibleConfig("bsm_success_prob must lie in (0, 1]")
        if self.attenuation_db_per_km <= 0 or self.light_speed_km_per_s <= 0:
            raise InfeasibleConfig("channel constants must be positive")
        if self.workers < 1:
            raise InfeasibleConfig("workers must be >= 1")

    @property
    def total(self) -> ChannelSpec:
        return ChannelSpec(self.total_length_km, self.attenuation_db_per_km, self.light_speed_km_per_s)

    @property
    def link(self) -> ChannelSpec:
        return self.total.split(2)

    @property
    def modes(self) -> int:
        return self.num_modes or choose_mode_count(self.chi)

    @property
    def fock_cutoff(self) -> int:
        return self.cutoff or fock.default_cutoff(self.chi)


# ------------------------------------------------------------ DV side

@lru_cache(maxsize=4096)
def _teleport(chi: float, cutoff: int, num_modes: int, fidelity: float):
    state = fock.make_tmsv(chi, cutoff)
    return teleport_cv_state(state, 1, TeleporterConfig(num_modes, 1.0, fidelity))


def dv_output_eof(chi: float, f_required: float, cutoff: int | None = None) -> float:
    """EoF of one TMSV arm teleported through a single-rail qubit teleporter
    whose Werner resource has fidelity ``f_required``."""
    cutoff = cutoff or fock.default_cutoff(chi)
    res = _teleport(float(chi), cutoff, 1, float(f_required))
    return eof_two_qubit(res.state).eof


def solve_f_required(chi: float, cv_eof: float, cutoff: int | None = None,
                     tol: float = 1e-3) -> float:
    """Werner fidelity at which the single-mode DV output reaches ``cv_eof``.

    The output EoF is nondecreasing in F and vanishes for F <= 1/2, so the
    smallest such F is found by bisection on [1/2, 1].
    """
    if cv_eof <= 0:
        return 0.5
    top = dv_output_eof(chi, 1.0, cutoff)
    if cv_eof > top + tol:
        raise InfeasibleConfig(f"EoF {cv_eof} exceeds the F=1 ceiling {top:.4f} at chi={chi}")
    if cv_eof >= top:
        return 1.0
    lo, hi = 0.5, 1.0
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if dv_output_eof(chi, mid, cutoff) >= cv_eof:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-12:
            break
    return hi


@dataclass
class DvPoint:
    f_initial: float
    feasible: bool
    rounds: int | None = None
    f_after_purification: float = math.nan
    f_after_swap: float = math.nan
    eof: float = math.nan
    rate: RateBreakdown | None = None
    teleport_success: float = math.nan

    @property
    def rate_hz(self) -> float:
        return self.rate.pairs_per_second if self.rate is not None else 0.0


def dv_point(cfg: ComparisonConfig, f_initial: float, f_required: float) -> DvPoint:
    sched = solve_schedule(f_initial, f_required, 2, cfg.purification_formula)
    if not sched.feasible:
        return DvPoint(f_initial, False, None, sched.fidelity_after_purification,
                       sched.final_fidelity_after_swap)
    # the chain delivers a pair certified at F_req; the teleporter is
    # characterised at that fidelity whatever margin the schedule left
    n = cfg.modes
    tel = _teleport(float(cfg.chi), cfg.fock_cutoff, n, float(f_required))
    eof = eof_two_qubit(tel.state).eof if n == 1 else math.nan
    tc = TeleporterConfig(n, cfg.bsm_success_prob, f_required)
    rate = dv_repeater_rate(sched, cfg.link, tc, optical_success=tel.success_prob)
    return DvPoint(f_initial, True, sched.rounds, sched.fidelity_after_purification,
                   sched.final_fidelity_after_swap, eof, rate,
                   tel.success_prob * cfg.bsm_success_prob ** n)


# ------------------------------------------------------------ CV side

@dataclass
class CvPoint:
    eof_target: float
    feasible: bool
    optimum: GainOptimum | None = None
    max_eof: float = math.nan
    message: str = ""

    @property
    def rate_hz(self) -> float:
        return self.optimum.rate.pairs_per_second if self.optimum else 0.0

    @property
    def gain(self) -> float:
        return self.optimum.gain if self.optimum else math.nan

    @property
    def eof(self) -> float:
        return self.optimum.output.eof.eof if self.optimum else self.max_eof


def cv_point(cfg: ComparisonConfig, eof_target: float) -> CvPoint:
    nla = cfg.nla_cutoff or default_nla_cutoff(cfg.chi)
    link_cfg = CvLinkConfig(cfg.chi, cfg.link, nla_cutoff=nla, cutoff=cfg.cutoff,
                            teleport_gain=cfg.teleport_gain)
    try:
        opt = optimize_gain(cfg.chi, cfg.total, eof_target, link_cfg,
                            scan_points=cfg.gain_scan_points)
    except InfeasibleEof as exc:
        return CvPoint(eof_target, False, None, exc.best, str(exc))
    return CvPoint(eof_target, True, opt, opt.max_eof)


# ------------------------------------------------------------ sweep

@dataclass
class Comparison:
    config: ComparisonConfig
    f_required: float
    eof_target: float
    cv: CvPoint
    dv: list[DvPoint] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)

    @property
    def crossover(self) -> float | None:
        return crossover_point(self.rows)

    @property
    def plateau_onset(self) -> float | None:
        return plateau_onset(self.rows)


def resolve_targets(cfg: ComparisonConfig) -> tuple[float, float]:
    """(F_req, EoF target) implied by the config."""
    n = cfg.modes
    if cfg.f_required == "auto":
        if n > 1:
            raise InfeasibleConfig(
                f"f_required='auto' needs the single-mode teleporter; chi={cfg.chi} uses {n} modes, "
                "whose output EoF is not computed. Give f_required and eof_target explicitly.")
        if cfg.eof_target is None:
            raise InfeasibleConfig("f_required='auto' needs eof_target")
        return solve_f_required(cfg.chi, cfg.eof_target, cfg.cutoff), float(cfg.eof_target)
    f_req = float(cfg.f_required)
    if cfg.eof_target is not None:
        return f_req, float(cfg.eof_target)
    if n > 1:
        raise InfeasibleConfig(f"eof_target must be given when {n} teleporter modes are used")
    return f_req, dv_output_eof(cfg.chi, f_req, cfg.cutoff)


def _row(dv: DvPoint, cv: CvPoint) -> dict:
    row = {
        "f_initial": dv.f_initial,
        "rounds": dv.rounds if dv.feasible else "",
        "f_after_purification": dv.f_after_purification,
        "f_after_swap": dv.f_after_swap,
        "dv_eof": dv.eof,
        "dv_rate_hz": dv.rate_hz,
        "cv_gain": cv.gain,
        "cv_eof": cv.eof,
        "cv_rate_hz": cv.rate_hz,
        "crossover_flag": int(dv.feasible and dv.rate_hz > 0 and dv.rate_hz >= cv.rate_hz),
    }
    if dv.rate is not None:
        row.update(dv.rate.as_columns("dv"))
    row["dv_teleport_success"] = dv.teleport_success
    if cv.optimum is not None:
        row.update(cv.optimum.rate.as_columns("cv"))
        row["cv_p_top"] = cv.optimum.output.p_top
        row["cv_teleport_gain"] = cv.optimum.output.teleport_gain
    return row


def run_comparison(cfg: ComparisonConfig) -> Comparison:
    f_req, target = resolve_targets(cfg)
    cv = cv_point(cfg, target)

    def one(f):
        return dv_point(cfg, f, f_req)

    grid = sorted(cfg.f_initial_grid)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            dv = list(pool.map(one, grid))
    else:
        dv = [one(f) for f in grid]
    rows = [_row(d, cv) for d in dv]
    return Comparison(cfg, f_req, target, cv, dv, rows)


def crossover_point(rows) -> float | None:
    for r in rows:
        if int(r["crossover_flag"]):
            return float(r["f_initial"])
    return None


def plateau_onset(rows) -> float | None:
    for r in rows:
        if r["rounds"] != "" and int(r["rounds"]) == 0:
            return float(r["f_initial"])
    return None


def dv_exceeds_cv_anywhere(rows) -> bool:
    return any(float(r["dv_rate_hz"]) > float(r["cv_rate_hz"]) for r in rows)


def summary(comp: Comparison) -> str:
    cfg = comp.config
    lines = [
        f"chi={cfg.chi}  total={cfg.total_length_km:g} km  modes={cfg.modes}  "
        f"bsm={cfg.bsm_success_prob:g}  formula={cfg.purification_formula}",
        f"F_req={comp.f_required:.4f}  EoF target={comp.eof_target:.4f}",
    ]
    if comp.cv.feasible:
        opt = comp.cv.optimum
        lines.append(f"CV: gain={opt.gain:.4g}  EoF={opt.output.eof.eof:.4f}  "
                     f"p_link={opt.output.p_link:.3e}  p_top={opt.output.p_top:.3e}  "
                     f"rate={comp.cv.rate_hz:.4e} Hz")
    else:
        lines.append(f"CV: infeasible ({comp.cv.message}); CV rate taken as 0")
    cross = comp.crossover
    lines.append("crossover: " + (f"F_i={cross:.2f}" if cross is not None else "no crossover"))
    onset = comp.plateau_onset
    lines.append("plateau onset: " + (f"F_i={onset:.2f}" if onset is not None else "none on grid"))
    feas = [d for d in comp.dv if d.feasible and d.rate_hz > 0]
    if feas:
        top = max(feas, key=lambda d: d.rate_hz)
        lines.append(f"DV max rate {top.rate_hz:.4e} Hz at F_i={top.f_initial:.2f}")
    return "\n".join(lines)


def rows_as_array(rows, column: str) -> np.ndarray:
    return np.array([float(r[column]) if r[column] != "" else np.nan for r in rows])
