"""Entanglement of formation and logarithmic negativity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import gaussian as G
from .fock import FockDensity, partial_trace

METHODS = ("two-qubit-wootters", "gaussian-symmetric", "gaussian-approx", "pure-state-entropy")


class DomainError(ValueError):
    """The state lies outside the validity domain of the requested measure."""


@dataclass(frozen=True)
class EntanglementReport:
    eof: float
    log_negativity: float
    method: str


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def eof_from_concurrence(c: float) -> float:
    c = min(max(c, 0.0), 1.0)
    return binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a 4x4 two-qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    tilde = _SYSY @ rho.conj() @ _SYSY
    ev = np.linalg.eigvals(rho @ tilde)
    lam = np.sort(np.sqrt(np.clip(np.real(ev), 0.0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def qubit_matrix(state: FockDensity | np.ndarray, leak_tol: float = 1e-9) -> np.ndarray:
    """4x4 matrix on the {0,1} photon subspace of a two-mode state."""
    if isinstance(state, np.ndarray):
        if state.shape != (4, 4):
            raise DomainError("expected a 4x4 two-qubit density matrix")
        return state / np.trace(state)
    if state.num_modes != 2:
        raise DomainError("two-qubit EoF needs exactly two modes")
    t = state.tensor
    sub = t[:2, :2, :2, :2].reshape(4, 4)
    leak = 1.0 - float(np.real(np.trace(sub)))
    if leak > leak_tol:
        raise DomainError(f"{leak:.2e} of the population lies above one photon per mode")
    return sub / np.trace(sub)


def log_negativity_matrix(rho: np.ndarray, dims: tuple[int, int]) -> float:
    da, db = dims
    pt = rho.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)
    norm = float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T)))))
    return max(0.0, math.log2(norm))


def log_negativity(state: FockDensity | G.TwoModeCovariance) -> float:
    """Log negativity across the mode-0 | mode-1 cut."""
    if isinstance(state, G.TwoModeCovariance):
        nu = G.partial_transpose_min_eigenvalue(state)
        return max(0.0, -math.log2(nu))
    if state.num_modes != 2:
        raise DomainError("log negativity needs a bipartite two-mode state")
    return log_negativity_matrix(state.coeffs, state.dims)


def eof_two_qubit(rho: FockDensity | np.ndarray) -> EntanglementReport:
    m = qubit_matrix(rho)
    eof = eof_from_concurrence(concurrence(m))
    return EntanglementReport(eof, log_negativity_matrix(m, (2, 2)), "two-qubit-wootters")


def werner_eof(fidelity: float) -> float:
    return eof_from_concurrence(max(0.0, 2.0 * fidelity - 1.0))


# ----------------------------------------------------------------- Gaussian

def _entropy_of_entanglement(cosh2r: float) -> float:
    """Entropy of either arm of a pure TMSV with ``cosh(2r) = cosh2r``."""
    if cosh2r <= 1.0:
        return 0.0
    c2 = (cosh2r + 1.0) / 2.0  # cosh^2 r
    s2 = (cosh2r - 1.0) / 2.0  # sinh^2 r
    return c2 * math.log2(c2) - s2 * math.log2(s2)


def eof_from_epr_variance(delta: float) -> float:
    """Gaussian EoF ``f(delta)`` for a minimal EPR variance ``delta`` (vacuum = 1)."""
    if delta >= 1.0:
        return 0.0
    cp = (delta ** -0.5 + delta ** 0.5) ** 2 / 4.0
    cm = (delta ** -0.5 - delta ** 0.5) ** 2 / 4.0
    return cp * math.log2(cp) - (cm * math.log2(cm) if cm > 0 else 0.0)


def eof_gaussian_symmetric(state: G.TwoModeCovariance) -> EntanglementReport:
    """Closed-form EoF of a symmetric two-mode Gaussian state."""
    if not state.is_symmetric:
        raise DomainError("state is not symmetric; use eof_gaussian for the general case")
    a, _, c, d = G.standard_form(state)
    delta = math.sqrt(max((a - abs(c)) * (a - abs(d)), 0.0))
    return EntanglementReport(eof_from_epr_variance(delta), log_negativity(state),
                              "gaussian-symmetric")


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def min_pure_correlation(state: G.TwoModeCovariance) -> float:
    """Smallest |x-correlation coefficient| of a pure Gaussian state below ``state``.

    In standard form the x and p quadratures decouple, and a decoupled pure
    state is ``X (+) X^-1`` for a positive 2x2 ``X``.  It lies below the
    state iff ``inv(Sp) <= X <= Sx``; its entanglement grows with the
    correlation coefficient of ``X``.
    """
    a, b, c, d = G.standard_form(state)
    upper = np.array([[a, c], [c, b]])
    lower = np.linalg.inv(np.array([[a, d], [d, b]]))
    gap = upper - lower
    gap = 0.5 * (gap + gap.T)
    if np.min(np.linalg.eigvalsh(gap)) < -1e-9 * max(1.0, a, b):
        raise DomainError("covariance violates the uncertainty principle")
    root = _sqrtm_psd(gap)

    def corr2(params):
        k1, k2, th = params
        rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        k = rot @ np.diag([k1, k2]) @ rot.T
        x = lower + root @ k @ root
        return x[0, 1] ** 2 / (x[0, 0] * x[1, 1])

    best = corr2((0.0, 0.0, 0.0))
    bounds = [(0.0, 1.0), (0.0, 1.0), (0.0, math.pi)]
    for k1 in (0.0, 0.5, 1.0):
        for k2 in (0.0, 0.5, 1.0):
            for th in (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4):
                res = minimize(corr2, x0=(k1, k2, th), method="L-BFGS-B", bounds=bounds,
                               options={"ftol": 1e-15, "gtol": 1e-12})
                best = min(best, float(res.fun))
    return math.sqrt(max(best, 0.0))


def eof_gaussian(state: G.TwoModeCovariance) -> EntanglementReport:
    """Gaussian EoF of an arbitrary two-mode state (minimal pure-state
    entanglement below the covariance)."""
    if G.partial_transpose_min_eigenvalue(state) >= 1.0 - 1e-12:
        return EntanglementReport(0.0, 0.0, "gaussian-approx")
    rho = min_pure_correlation(state)
    cosh2r = 1.0 / math.sqrt(max(1.0 - rho * rho, 1e-300))
    return EntanglementReport(_entropy_of_entanglement(cosh2r), log_negativity(state),
                              "gaussian-approx")


def entanglement_entropy(state: FockDensity) -> EntanglementReport:
    """Entropy of entanglement of a pure two-mode state (mode 0 | mode 1)."""
    reduced = partial_trace(state, [0])
    p = np.clip(np.linalg.eigvalsh(reduced.coeffs), 0.0, None)
    p = p[p > 1e-16]
    ent = float(-np.sum(p * np.log2(p)))
    return EntanglementReport(ent, log_negativity(state), "pure-state-entropy")
