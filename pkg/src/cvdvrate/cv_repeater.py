"""Two-link continuous-variable repeater built from loss-correcting links.

Each link sends one arm of a TMSV through the fibre and distils it with an
NLA on arrival.  At the middle node the first link's distilled arm is
teleported through the second link's heralded pair, and the end node runs
the higher-level NLA on the delivered arm.

The travelling arm lives in Fock space throughout.  A teleporter with gain
``g_T`` maps ``x -> g_T x + (x_B - g_T x_A)``; its effect on the moments is
exact whatever the resource, and it is applied in Fock space as the
phase-insensitive channel with transmission ``g_T^2`` and the resource's
EPR noise (loss followed by amplification).  By default ``g_T`` is the
loss-matched gain ``(b - 1)/c`` of the resource, which turns an ideal TMSV
resource of parameter chi into pure loss ``chi^2``; ``teleport_gain=1``
gives unity-gain teleportation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import fock
from . import gaussian as G
from .entanglement import EntanglementReport, eof_gaussian
from .fock import FockDensity
from .params import ChannelSpec, TmsvParam, as_chi
from .rates import RateBreakdown, cv_rate_from_probs


@dataclass(frozen=True)
class CvLinkConfig:
    chi: TmsvParam
    link: ChannelSpec
    gain: float = 1.0
    nla_cutoff: int = 1
    top_gain: float | None = None
    top_nla_cutoff: int | None = None
    cutoff: int | None = None
    teleport_gain: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "chi", as_chi(self.chi))
        if self.gain < 1.0 or (self.top_gain is not None and self.top_gain < 1.0):
            raise ValueError("NLA gains must be >= 1")
        if self.nla_cutoff < 1 or (self.top_nla_cutoff is not None and self.top_nla_cutoff < 1):
            raise ValueError("nla_cutoff must be >= 1")
        if self.teleport_gain is not None and self.teleport_gain <= 0:
            raise ValueError("teleport_gain must be positive")

    @property
    def effective_top_gain(self) -> float:
        return self.gain if self.top_gain is None else self.top_gain

    @property
    def effective_top_cutoff(self) -> int:
        return self.nla_cutoff if self.top_nla_cutoff is None else self.top_nla_cutoff

    @property
    def effective_cutoff(self) -> int:
        return self.cutoff if self.cutoff is not None else fock.default_cutoff(self.chi)


@dataclass(frozen=True)
class CvRepeaterOutput:
    joint_state: FockDensity
    covariance: G.TwoModeCovariance
    p_link: float
    p_top: float
    eof: EntanglementReport
    teleport_noise: float
    teleport_gain: float = 1.0


def moments(state: FockDensity) -> G.TwoModeCovariance:
    mean, cov = fock.quadrature_moments(state)
    return G.TwoModeCovariance(mean, cov)


def run_ec_link(cfg: CvLinkConfig, link: ChannelSpec | None = None) -> tuple[FockDensity, float]:
    """TMSV with arm 1 sent through the link and amplified by the NLA."""
    link = link or cfg.link
    state = fock.make_tmsv(cfg.chi, cfg.effective_cutoff)
    state = fock.apply_loss(state, 1, link.transmittance)
    state = fock.apply_nla(state, 1, cfg.gain, min(cfg.nla_cutoff, state.cutoffs[1]))
    return state, state.weight


def default_nla_cutoff(chi: TmsvParam | float) -> int:
    return 3 if as_chi(chi).chi <= 0.5 else 8


def matched_teleport_gain(resource: G.TwoModeCovariance) -> float:
    """Gain ``(b - 1)/c`` minimising the input-referred excess noise of
    teleportation through ``resource`` (sender holds mode 0)."""
    cov = resource.cov
    b = 0.5 * (cov[2, 2] + cov[3, 3])
    c = 0.5 * (abs(cov[0, 2]) + abs(cov[1, 3]))
    if c < 1e-12:
        return 1.0
    return float(max(b - 1.0, 1e-12) / c)


def epr_variance(resource: G.TwoModeCovariance, gain: float = 1.0) -> float:
    """Per-quadrature noise a gain-``gain`` teleporter adds with this
    resource (sender holds mode 0)."""
    _, noise = G.epr_noise(resource, gain)
    return float(0.5 * (noise[0, 0] + noise[1, 1]))


def teleport_arm(state: FockDensity, mode: int, resource: G.TwoModeCovariance,
                 gain: float | None = None) -> tuple[FockDensity, float, float]:
    """Teleport ``mode`` of ``state`` through ``resource``; returns the state,
    the gain used and the added noise."""
    gain = matched_teleport_gain(resource) if gain is None else gain
    noise = epr_variance(resource, gain)
    # a physical resource always satisfies noise >= |1 - gain^2|; clip rounding
    noise = max(noise, abs(1.0 - gain * gain))
    return fock.apply_gaussian_channel(state, mode, gain * gain, noise), gain, noise


def run_two_link_repeater(cfg: CvLinkConfig, total: ChannelSpec) -> CvRepeaterOutput:
    link = total.split(2)
    first, p1 = run_ec_link(cfg, link)
    resource = moments(first)  # second link is identical to the first
    state, g_t, noise = teleport_arm(replace(first, weight=1.0), 1, resource, cfg.teleport_gain)
    top = min(cfg.effective_top_cutoff, state.cutoffs[1])
    state = fock.apply_nla(state, 1, cfg.effective_top_gain, top)
    p_top = state.weight
    cov = moments(state)
    return CvRepeaterOutput(state, cov, p1, p_top, eof_gaussian(cov), noise, g_t)


def gaussian_reference(chi: TmsvParam | float, total: ChannelSpec,
                       teleport_gain: float | None = None) -> G.TwoModeCovariance:
    """Moments of the NLA-free pipeline computed purely with covariance matrices."""
    link = total.split(2)
    lossy = G.loss_map(G.tmsv_covariance(chi), 1, link.transmittance)
    gain = matched_teleport_gain(lossy) if teleport_gain is None else teleport_gain
    return G.cv_teleport(lossy, 1, lossy, gain)


@dataclass(frozen=True)
class GainOptimum:
    gain: float
    rate: RateBreakdown
    output: CvRepeaterOutput
    feasible: bool = True
    max_eof: float | None = None
    top_gain: float | None = None


class InfeasibleEof(ValueError):
    def __init__(self, target: float, best: float, gain: float):
        super().__init__(f"EoF target {target} unreachable; best {best:.4f} at gain {gain:.3g}")
        self.target, self.best, self.gain = target, best, gain


def _evaluate(cfg: CvLinkConfig, total: ChannelSpec, gain: float, top_gain: float | None = None):
    """(output, rate), or ``None`` when a herald probability vanishes."""
    try:
        out = run_two_link_repeater(replace(cfg, gain=gain, top_gain=top_gain), total)
    except fock.ZeroProbabilityBranch:
        return None
    rate = cv_rate_from_probs(out.p_link, out.p_top, total.split(2))
    return out, rate


def default_gain_max(total: ChannelSpec) -> float:
    eta = total.split(2).transmittance
    # beyond g ~ 1/sqrt(eta) the NLA only feeds the link's thermal noise
    return max(2.0, 4.0 / math.sqrt(eta)) if eta < 1 else 10.0


def optimize_gain(chi: TmsvParam | float, total: ChannelSpec, eof_target: float,
                  cfg: CvLinkConfig | None = None, gain_max: float | None = None,
                  scan_points: int = 41, top_gains=None) -> GainOptimum:
    """Highest-rate NLA gain whose output EoF meets ``eof_target``.

    Scans ``log(gain)`` on a grid, keeps the fastest point meeting the target
    and, when its lower neighbour misses it, bisects that bracket (the rate
    falls with gain, so the optimum sits where the constraint binds).
    ``top_gains`` switches to a joint scan with an independent top-level gain.
    """
    chi = as_chi(chi)
    cfg = cfg or CvLinkConfig(chi, total.split(2), nla_cutoff=default_nla_cutoff(chi))
    if gain_max is None:
        gain_max = default_gain_max(total)
    gains = np.exp(np.linspace(0.0, math.log(gain_max), scan_points))
    tops = [None] if top_gains is None else [float(t) for t in top_gains]

    evals = []
    for top in tops:
        for g in gains:
            res = _evaluate(cfg, total, float(g), top)
            if res is None:
                break  # larger gains only shrink the heralds further
            evals.append((float(g), top, *res))
    if not evals:
        raise InfeasibleEof(eof_target, 0.0, 1.0)
    best_eof = max(e[2].eof.eof for e in evals)
    ok = [e for e in evals if e[2].eof.eof >= eof_target]
    if not ok:
        best = max(evals, key=lambda e: e[2].eof.eof)
        raise InfeasibleEof(eof_target, best[2].eof.eof, best[0])

    g_ok, top, out_ok, rate_ok = max(ok, key=lambda e: e[3].pairs_per_second)
    row = [e for e in evals if e[1] == top]
    idx = [e[0] for e in row].index(g_ok)
    if idx > 0 and row[idx - 1][2].eof.eof < eof_target:
        lo, hi = row[idx - 1][0], g_ok
        for _ in range(60):
            if hi / lo - 1 < 1e-6:
                break
            mid = math.sqrt(lo * hi)
            res = _evaluate(cfg, total, mid, top)
            if res is not None and res[0].eof.eof >= eof_target:
                hi, (out_ok, rate_ok) = mid, res
            else:
                lo = mid
        g_ok = hi
    return GainOptimum(g_ok, rate_ok, out_ok, True, best_eof, top)
