"""Independent brute-force references used by the test-suite.

Nothing here calls the closed forms under test; channels are built from
explicit Kraus matrices on the full Hilbert space, EoF is minimised over
pure-state decompositions, and teleportation is written out in the
Heisenberg picture on a pure four-mode ket.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize


def embed(op, mode, dims):
    out = np.array([[1.0 + 0j]])
    for m, d in enumerate(dims):
        out = np.kron(out, op if m == mode else np.eye(d))
    return out


def loss_kraus(d, eta):
    ops = []
    for k in range(d):
        a = np.zeros((d, d))
        for n in range(k, d):
            a[n - k, n] = math.sqrt(math.comb(n, k) * eta ** (n - k) * (1 - eta) ** k)
        ops.append(a)
    return ops


def amplifier_kraus(d, g):
    ops = []
    for k in range(d):
        b = np.zeros((d, d))
        for n in range(d - k):
            b[n + k, n] = math.sqrt(math.comb(n + k, k) / g ** (n + 1) * (1 - 1 / g) ** k)
        ops.append(b)
    return ops


def apply_kraus(rho, ops, mode, dims):
    out = np.zeros_like(rho)
    for k in ops:
        full = embed(k, mode, dims)
        out += full @ rho @ full.conj().T
    return out


def quadratures(d):
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    return a + a.T, -1j * (a - a.T)


def moments_dense(rho, dims):
    ops = []
    for m, d in enumerate(dims):
        x, p = quadratures(d)
        ops += [embed(x, m, dims), embed(p, m, dims)]
    mean = np.array([np.real(np.trace(rho @ o)) for o in ops])
    cov = np.array([[np.real(np.trace(rho @ (oi @ oj + oj @ oi))) / 2 - mean[i] * mean[j]
                     for j, oj in enumerate(ops)] for i, oi in enumerate(ops)])
    return mean, cov


def tmsv_ket(chi, cutoff):
    n = np.arange(cutoff + 1)
    ket = np.zeros((cutoff + 1, cutoff + 1))
    ket[n, n] = math.sqrt(1 - chi * chi) * chi ** n
    return ket


# --------------------------------------------------------------- two qubits

def _entropy(p):
    p = p[p > 1e-15]
    return float(-np.sum(p * np.log2(p)))


def pure_eof(psi):
    m = psi.reshape(2, 2)
    s = np.linalg.svd(m, compute_uv=False) ** 2
    return _entropy(s / s.sum())


def convex_roof_eof(rho, restarts=12, seed=1):
    """min sum_i p_i E(psi_i) over rank-4 decompositions rho = sum |psi_i><psi_i|."""
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0, None)
    base = v * np.sqrt(w)  # columns sqrt(l_j) |e_j>
    rng = np.random.default_rng(seed)

    def cost(params):
        h = np.zeros((4, 4), dtype=complex)
        iu = np.triu_indices(4, 1)
        h[np.diag_indices(4)] = params[:4]
        h[iu] = params[4:10] + 1j * params[10:16]
        h = h + np.triu(h, 1).conj().T
        u = expm(1j * h)
        total = 0.0
        for i in range(4):
            vec = base @ u[i]
            p = float(np.real(np.vdot(vec, vec)))
            if p > 1e-14:
                total += p * pure_eof(vec / math.sqrt(p))
        return total

    best = math.inf
    for _ in range(restarts):
        res = minimize(cost, rng.normal(size=16), method="Nelder-Mead",
                       options={"maxiter": 20000, "xatol": 1e-10, "fatol": 1e-12})
        res = minimize(cost, res.x, method="BFGS")
        best = min(best, res.fun)
    return best


def depolarise_second(rho4, fidelity):
    """Qubit teleportation through a Werner pair: depolarising with p=(4F-1)/3."""
    p = (4 * fidelity - 1) / 3
    r = rho4.reshape(2, 2, 2, 2)
    red = np.einsum("ajbj->ab", r)
    return p * rho4 + (1 - p) * np.kron(red, np.eye(2) / 2)


def wootters(rho):
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sort(np.sqrt(np.abs(np.linalg.eigvals(r))))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def eof_from_c(c):
    x = (1 + math.sqrt(1 - c * c)) / 2
    return _entropy(np.array([x, 1 - x]))


def dv_single_mode_eof(chi, fidelity):
    """TMSV arm projected on {0,1} photons then teleported through a Werner pair."""
    psi = np.array([1.0, 0, 0, chi]) / math.sqrt(1 + chi * chi)
    rho = depolarise_second(np.outer(psi, psi), fidelity)
    return eof_from_c(wootters(rho))


# ------------------------------------------------------------- teleportation

def bs_matrix(d):
    """50:50 beam splitter a -> (a + b)/sqrt2, b -> (a - b)/sqrt2 on two modes."""
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    A = np.kron(a, np.eye(d))
    B = np.kron(np.eye(d), a)
    gen = (A.T @ B - B.T @ A) * (math.pi / 4)
    return expm(gen)


def teleport_moments(chi_in, chi_r, cutoff, gain=1.0):
    """Covariance of (kept arm, teleported output) for Braunstein-Kimble
    teleportation of one TMSV(chi_in) arm through a TMSV(chi_r) resource.

    The sender mixes the input with its resource arm on a 50:50 splitter and
    measures p on one port and x on the other; the receiver displaces by
    gain*sqrt2 times the outcomes.  Since the outcomes are commuting
    observables, the output quadratures are x_B - g*sqrt2*x_v and
    p_B + g*sqrt2*p_u on the post-splitter ket.
    """
    d = cutoff + 1
    ket = np.einsum("ab,cd->abcd", tmsv_ket(chi_in, cutoff), tmsv_ket(chi_r, cutoff))
    # modes: 0 kept, 1 input, 2 sender resource, 3 receiver resource
    u = bs_matrix(d).reshape(d, d, d, d)
    ket = np.einsum("ijkl,aklb->aijb", u, ket)
    x, p = quadratures(d)

    def op(m, o):
        return lambda k: np.moveaxis(np.tensordot(o, k, axes=([1], [m])), 0, m)

    s = math.sqrt(2) * gain
    xo = lambda k: op(3, x)(k) - s * op(2, x)(k)  # noqa: E731
    po = lambda k: op(3, p)(k) + s * op(1, p)(k)  # noqa: E731
    ops = [op(0, x), op(0, p), xo, po]
    vecs = [o(ket) for o in ops]
    cov = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            cov[i, j] = np.real(np.vdot(vecs[i], vecs[j]) + np.vdot(vecs[j], vecs[i])) / 2
    return cov
