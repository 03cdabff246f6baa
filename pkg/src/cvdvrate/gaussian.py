"""Covariance-matrix description of two-mode Gaussian states.

Vacuum has variance 1 on every quadrature; ordering is ``(x1, p1, x2, p2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import TmsvParam, as_chi

OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
Z = np.diag([1.0, -1.0])


@dataclass(frozen=True)
class TwoModeCovariance:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float).reshape(4))
        cov = np.asarray(self.cov, dtype=float).reshape(4, 4)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))

    def block(self, i: int, j: int) -> np.ndarray:
        return self.cov[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    @property
    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.block(0, 0), self.block(1, 1), atol=1e-8))


def vacuum() -> TwoModeCovariance:
    return TwoModeCovariance(np.zeros(4), np.eye(4))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    ev = np.linalg.eigvals(1j * OMEGA @ cov)
    return np.sort(np.abs(ev))[::2]


def is_physical(state: TwoModeCovariance, tol: float = 1e-9) -> bool:
    return bool(np.all(symplectic_eigenvalues(state.cov) >= 1.0 - tol))


def tmsv_covariance(chi: TmsvParam | float) -> TwoModeCovariance:
    x = as_chi(chi).chi
    a = (1 + x * x) / (1 - x * x)
    c = 2 * x / (1 - x * x)
    cov = np.block([[a * np.eye(2), c * Z], [c * Z, a * np.eye(2)]])
    return TwoModeCovariance(np.zeros(4), cov)


def loss_map(state: TwoModeCovariance, arm: int, eta: float) -> TwoModeCovariance:
    """Pure loss of transmissivity ``eta`` on one arm."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    scale = np.ones(4)
    scale[2 * arm:2 * arm + 2] = np.sqrt(eta)
    cov = state.cov * np.outer(scale, scale)
    cov[2 * arm:2 * arm + 2, 2 * arm:2 * arm + 2] += (1 - eta) * np.eye(2)
    return TwoModeCovariance(state.mean * scale, cov)


def epr_noise(resource: TwoModeCovariance, gain: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of ``(x_B - g x_A, p_B + g p_A)`` for a resource on (A, B).

    Mode A is held by the sender, mode B by the receiver.
    """
    m = np.array([[-gain, 0, 1, 0], [0, gain, 0, 1]], dtype=float)
    return m @ resource.mean, m @ resource.cov @ m.T


def cv_teleport(input: TwoModeCovariance, input_arm: int, resource: TwoModeCovariance,
                gain: float = 1.0) -> TwoModeCovariance:
    """Braunstein-Kimble teleportation of ``input_arm`` through ``resource``.

    The teleported quadratures become ``g * q_in + (q_B -/+ g q_A)``; at unity
    gain the arm picks up the resource's EPR-correlation variance as noise.
    """
    noise_mean, noise_cov = epr_noise(resource, gain)
    scale = np.ones(4)
    scale[2 * input_arm:2 * input_arm + 2] = gain
    cov = input.cov * np.outer(scale, scale)
    sl = slice(2 * input_arm, 2 * input_arm + 2)
    cov[sl, sl] += noise_cov
    mean = input.mean * scale
    mean[sl] += noise_mean
    return TwoModeCovariance(mean, cov)


def tmsv_teleport_noise(chi_r: float) -> float:
    """Noise added per quadrature by a unity-gain teleporter on a TMSV(chi_r) resource."""
    return 2.0 * (1.0 - chi_r) / (1.0 + chi_r)


def partial_transpose_min_eigenvalue(state: TwoModeCovariance) -> float:
    """Smallest symplectic eigenvalue of the partially transposed covariance."""
    pt = np.diag([1.0, 1.0, 1.0, -1.0])
    return float(symplectic_eigenvalues(pt @ state.cov @ pt)[0])


def _inv_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v / np.sqrt(w)) @ v.T


def standard_form(state: TwoModeCovariance) -> tuple[float, float, float, float]:
    """Local-symplectic invariants ``(a, b, c, d)`` with ``c >= |d|``.

    Each local block is squeezed to ``a I`` (``sqrt(a) A^-1/2`` is symplectic)
    and the correlation block is then diagonalised by local rotations.
    """
    A, B, C = state.block(0, 0), state.block(1, 1), state.block(0, 1)
    a = float(np.sqrt(np.linalg.det(A)))
    b = float(np.sqrt(np.linalg.det(B)))
    sa = np.sqrt(a) * _inv_sqrt(0.5 * (A + A.T))
    sb = np.sqrt(b) * _inv_sqrt(0.5 * (B + B.T))
    sv = np.linalg.svd(sa @ C @ sb.T, compute_uv=False)
    sign = -1.0 if np.linalg.det(C) < 0 else 1.0
    return a, b, float(sv[0]), float(sign * sv[1])
