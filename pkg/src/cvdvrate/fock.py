"""Truncated Fock-space density matrices for a handful of optical modes.

States carry a per-mode photon cutoff (cutoffs may differ between modes), a
trace-one coefficient matrix and the accumulated probability of every herald
applied so far.  All operations return new objects.

Beam-splitter convention: ``a^dag -> t a^dag + i r b^dag`` with real
amplitude transmissivity ``t = sqrt(T)`` and reflectivity ``r = sqrt(1-T)``.
Quadratures use the vacuum-variance-one convention ``x = a + a^dag``,
``p = -i (a - a^dag)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .params import TmsvParam, as_chi

#: smallest herald probability treated as a real event
ZERO_BRANCH = 1e-14
#: untruncated norm that must survive a state preparation
TRUNCATION_TOL = 1e-6


class ZeroProbabilityBranch(ArithmeticError):
    """A heralded operation selected a branch of (numerically) zero weight."""


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FockDensity:
    """Density operator on ``len(cutoffs)`` modes truncated per mode."""

    cutoffs: tuple[int, ...]
    coeffs: np.ndarray = field(repr=False)
    weight: float = 1.0
    norm_retained: float = 1.0

    def __post_init__(self):
        dim = int(np.prod(self.dims))
        if self.coeffs.shape != (dim, dim):
            raise ValueError(f"coeffs shape {self.coeffs.shape} does not match cutoffs {self.cutoffs}")

    @property
    def num_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def cutoff(self) -> int:
        return max(self.cutoffs)

    @property
    def truncation_warning(self) -> bool:
        return self.norm_retained < 1.0 - TRUNCATION_TOL

    @property
    def tensor(self) -> np.ndarray:
        return self.coeffs.reshape(self.dims + self.dims)

    def trace(self) -> float:
        return float(np.real(np.trace(self.coeffs)))

    def metadata(self) -> dict:
        return {
            "cutoffs": list(self.cutoffs),
            "norm_retained": self.norm_retained,
            "weight": self.weight,
            "truncation_warning": self.truncation_warning,
        }


def _check_mode(state: FockDensity, mode: int) -> None:
    if not 0 <= mode < state.num_modes:
        raise IndexError(f"mode {mode} out of range for {state.num_modes}-mode state")


def _from_tensor(tensor: np.ndarray, cutoffs: Sequence[int], like: FockDensity, *,
                 herald: float = 1.0, renormalize: bool = True, lost: float = 0.0) -> FockDensity:
    """Wrap a (possibly unnormalised) tensor, folding its trace into the weight."""
    dim = int(np.prod([c + 1 for c in cutoffs]))
    mat = tensor.reshape(dim, dim)
    mat = 0.5 * (mat + mat.conj().T)
    tr = float(np.real(np.trace(mat)))
    weight = like.weight
    norm = like.norm_retained
    if renormalize:
        if tr < ZERO_BRANCH:
            raise ZeroProbabilityBranch(f"herald probability {tr:.3e} below {ZERO_BRANCH}")
        mat = mat / tr
        weight *= herald * tr
    norm *= 1.0 - lost
    return FockDensity(tuple(int(c) for c in cutoffs), mat, weight, norm)


def from_matrix(matrix: np.ndarray, cutoffs: Sequence[int]) -> FockDensity:
    """A normalised state from an explicit density matrix."""
    matrix = np.asarray(matrix, dtype=complex)
    tr = float(np.real(np.trace(matrix)))
    return FockDensity(tuple(cutoffs), matrix / tr)


def from_ket(ket: np.ndarray, cutoffs: Sequence[int]) -> FockDensity:
    ket = np.asarray(ket, dtype=complex).ravel()
    ket = ket / np.linalg.norm(ket)
    return FockDensity(tuple(cutoffs), np.outer(ket, ket.conj()))


def fock_state(ns: Sequence[int], cutoffs: Sequence[int]) -> FockDensity:
    """Product number state ``|n_0, n_1, ...>``."""
    dims = [c + 1 for c in cutoffs]
    ket = np.zeros(dims, dtype=complex)
    ket[tuple(ns)] = 1.0
    return from_ket(ket, cutoffs)


def tensor_product(a: FockDensity, b: FockDensity) -> FockDensity:
    return FockDensity(a.cutoffs + b.cutoffs, np.kron(a.coeffs, b.coeffs),
                       a.weight * b.weight, a.norm_retained * b.norm_retained)


# ---------------------------------------------------------------- operators

def _apply_op(tensor: np.ndarray, op: np.ndarray, mode: int, nmodes: int) -> np.ndarray:
    """``op rho op^dag`` for a single-mode operator ``op`` (out x in)."""
    t = np.tensordot(op, tensor, axes=([1], [mode]))
    t = np.moveaxis(t, 0, mode)
    t = np.tensordot(t, op.conj(), axes=([nmodes + mode], [1]))
    return np.moveaxis(t, -1, nmodes + mode)


def apply_mode_operator(state: FockDensity, mode: int, op: np.ndarray, *,
                        heralded: bool = True) -> FockDensity:
    """Apply ``op rho op^dag`` on one mode.

    With ``heralded`` the trace of the result is the herald probability and
    multiplies into ``weight``; otherwise any trace deficit is attributed to
    truncation and recorded in ``norm_retained``.
    """
    _check_mode(state, mode)
    op = np.asarray(op)
    if op.shape[1] != state.dims[mode]:
        raise ValueError("operator input dimension does not match mode")
    t = _apply_op(state.tensor, op, mode, state.num_modes)
    cutoffs = list(state.cutoffs)
    cutoffs[mode] = op.shape[0] - 1
    if heralded:
        return _from_tensor(t, cutoffs, state)
    tr = float(np.real(np.trace(t.reshape(int(np.prod([c + 1 for c in cutoffs])), -1))))
    return _from_tensor(t, cutoffs, state, herald=1.0 / tr, lost=1.0 - tr)


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)


def make_tmsv(chi: TmsvParam | float, cutoff: int) -> FockDensity:
    """Two-mode squeezed vacuum ``sqrt(1-chi^2) sum chi^n |n,n>`` truncated at ``cutoff``."""
    chi = as_chi(chi)
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    x = chi.chi
    n = np.arange(cutoff + 1)
    amps = np.sqrt(1.0 - x * x) * x**n
    retained = float(np.sum(amps**2))
    ket = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    ket[n, n] = amps
    state = from_ket(ket, (cutoff, cutoff))
    if retained < 1.0 - TRUNCATION_TOL:
        warnings.warn(f"cutoff {cutoff} keeps only {retained:.8f} of the TMSV norm at chi={x}",
                      TruncationWarning, stacklevel=2)
    return replace(state, norm_retained=retained)


def adequate_cutoff(chi: TmsvParam | float, tol: float = 1e-9) -> int:
    """Smallest cutoff whose truncated TMSV misses less than ``tol`` of the
    norm-weighted photon number, i.e. good enough for second moments."""
    x2 = as_chi(chi).chi ** 2
    if x2 == 0:
        return 1
    n = 1
    while (n + 1) * x2 ** (n + 1) / (1 - x2) > tol:
        n += 1
    return n


def default_cutoff(chi: TmsvParam | float) -> int:
    x = as_chi(chi).chi
    return 15 if x <= 0.5 else 40


# ------------------------------------------------------------- Gaussian channels

def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _shift_channel(tensor: np.ndarray, mode: int, nmodes: int, coeff) -> np.ndarray:
    """Loss-type map: ``out[m, n] = sum_k coeff(k, m, n) * rho[m+k, n+k]`` on one mode."""
    d = tensor.shape[mode]
    out = np.zeros_like(tensor)
    row, col = mode, nmodes + mode
    for k in range(d):
        m = np.arange(d - k)
        c = coeff(k, m[:, None], m[None, :])
        src = np.take(np.take(tensor, m + k, axis=row), m + k, axis=col)
        shape = [1] * tensor.ndim
        shape[row], shape[col] = d - k, d - k
        idx = [slice(None)] * tensor.ndim
        idx[row], idx[col] = slice(0, d - k), slice(0, d - k)
        out[tuple(idx)] += src * c.reshape(shape)
    return out


def apply_loss(state: FockDensity, mode: int, eta: float) -> FockDensity:
    """Pure-loss channel of transmissivity ``eta`` on one mode."""
    _check_mode(state, mode)
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if eta == 1.0:
        return state
    log_eta = math.log(eta) if eta > 0 else -np.inf
    log_loss = math.log1p(-eta) if eta < 1 else -np.inf

    def coeff(k, m, n):
        with np.errstate(invalid="ignore", divide="ignore"):
            lg = 0.5 * (_log_binom(m + k, k) + _log_binom(n + k, k))
            lg = lg + np.where((m + n) > 0, 0.5 * (m + n) * log_eta, 0.0)
            lg = lg + (k * log_loss if k > 0 else 0.0)
        return np.exp(lg)

    t = _shift_channel(state.tensor, mode, state.num_modes, coeff)
    return _from_tensor(t, state.cutoffs, state, renormalize=False)


def apply_amplifier(state: FockDensity, mode: int, gain: float) -> FockDensity:
    """Phase-insensitive quantum-limited amplifier of power gain ``gain >= 1``.

    Population pushed above the cutoff is dropped and recorded in
    ``norm_retained``; the state is renormalised.
    """
    _check_mode(state, mode)
    if gain < 1.0:
        raise ValueError("amplifier gain must be >= 1")
    if gain == 1.0:
        return state
    d = state.dims[mode]
    nmodes = state.num_modes
    tensor = state.tensor
    out = np.zeros_like(tensor)
    row, col = mode, nmodes + mode
    lg_inv = -math.log(gain)
    lg_k = math.log1p(-1.0 / gain)
    for k in range(d):
        m = np.arange(d - k)
        c = np.exp(0.5 * (_log_binom(m[:, None] + k, k) + _log_binom(m[None, :] + k, k))
                   + (0.5 * (m[:, None] + m[None, :]) + 1) * lg_inv + k * lg_k)
        src = np.take(np.take(tensor, m, axis=row), m, axis=col)
        shape = [1] * tensor.ndim
        shape[row], shape[col] = d - k, d - k
        idx = [slice(None)] * tensor.ndim
        idx[row], idx[col] = slice(k, d), slice(k, d)
        out[tuple(idx)] += src * c.reshape(shape)
    tr = float(np.real(np.trace(out.reshape(state.coeffs.shape))))
    return _from_tensor(out, state.cutoffs, state, herald=1.0 / tr, lost=1.0 - tr)


def apply_gaussian_channel(state: FockDensity, mode: int, tau: float, noise: float) -> FockDensity:
    """Phase-insensitive Gaussian channel ``V -> tau V + noise`` on one mode.

    Realised exactly as loss ``tau/G`` followed by amplification ``G`` with
    ``G = (noise + tau + 1) / 2``; requires ``noise >= |1 - tau|``.
    """
    if tau < 0 or noise < abs(1.0 - tau) - 1e-12:
        raise ValueError(f"channel (tau={tau}, noise={noise}) is not completely positive")
    g = max(1.0, 0.5 * (noise + tau + 1.0))
    eta = min(1.0, tau / g)
    return apply_amplifier(apply_loss(state, mode, eta), mode, g)


def apply_additive_noise(state: FockDensity, mode: int, variance: float) -> FockDensity:
    """Classical Gaussian displacement noise adding ``variance`` to each quadrature."""
    if variance < 0:
        raise ValueError("noise variance must be nonnegative")
    if variance == 0:
        return state
    return apply_gaussian_channel(state, mode, 1.0, variance)


# ------------------------------------------------------------ heralded filters

def nla_operator(cutoff: int, gain: float, nla_cutoff: int) -> np.ndarray:
    """Diagonal filter ``gain^(min(n, N) - N)``: amplifies up to ``N`` photons,
    flat above so that the largest factor is 1 and ``gain = 1`` is the identity."""
    n = np.minimum(np.arange(cutoff + 1), nla_cutoff)
    return np.diag(float(gain) ** (n - nla_cutoff).astype(float))


def apply_nla(state: FockDensity, mode: int, gain: float, nla_cutoff: int) -> FockDensity:
    """Heralded noiseless linear amplifier; success probability folds into weight."""
    _check_mode(state, mode)
    if gain < 1.0:
        raise ValueError("NLA gain must be >= 1")
    if nla_cutoff < 0 or nla_cutoff > state.cutoffs[mode]:
        raise ValueError("nla_cutoff must lie in [0, cutoff of the mode]")
    if gain == 1.0:
        return state
    return apply_mode_operator(state, mode, nla_operator(state.cutoffs[mode], gain, nla_cutoff))


def nla_success_probability(populations: np.ndarray, gain: float, nla_cutoff: int) -> float:
    """Herald probability of the NLA for given photon-number populations."""
    n = np.minimum(np.arange(len(populations)), nla_cutoff)
    return float(np.sum(populations * float(gain) ** (2.0 * (n - nla_cutoff))))


def project_fock(state: FockDensity, mode: int, n: int) -> FockDensity:
    """Herald photon number ``n`` on ``mode`` and remove the mode."""
    _check_mode(state, mode)
    if not 0 <= n <= state.cutoffs[mode]:
        raise ValueError("n exceeds the mode cutoff")
    t = state.tensor
    nm = state.num_modes
    t = np.take(np.take(t, n, axis=mode), n, axis=nm - 1 + mode)
    cutoffs = state.cutoffs[:mode] + state.cutoffs[mode + 1:]
    if not cutoffs:
        raise ValueError("cannot project out the only mode")
    return _from_tensor(t, cutoffs, state)


def project_subspace(state: FockDensity, mode: int, max_photons: int) -> FockDensity:
    """Herald at most ``max_photons`` photons on ``mode`` and shrink its cutoff."""
    d = state.dims[mode]
    proj = np.eye(d)[: max_photons + 1]
    return apply_mode_operator(state, mode, proj)


def partial_trace(state: FockDensity, modes_to_keep: Sequence[int]) -> FockDensity:
    keep = list(modes_to_keep)
    if not keep:
        raise ValueError("modes_to_keep must be nonempty")
    for m in keep:
        _check_mode(state, m)
    nm = state.num_modes
    if sorted(keep) == list(range(nm)):
        return state
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:nm])
    cols = list(letters[nm:2 * nm])
    for m in range(nm):
        if m not in keep:
            cols[m] = rows[m]
    out = "".join(rows[m] for m in keep) + "".join(cols[m] for m in keep)
    t = np.einsum("".join(rows) + "".join(cols) + "->" + out, state.tensor)
    return _from_tensor(t, [state.cutoffs[m] for m in keep], state, renormalize=False)


# ------------------------------------------------------------- beam splitter

@lru_cache(maxsize=64)
def beamsplitter_unitary(da: int, db: int, transmissivity: float) -> np.ndarray:
    """Matrix ``(da*db) x (da*db)`` of the beam splitter on truncated modes.

    Output components beyond either cutoff are dropped, so the matrix is
    unitary only on inputs whose total photon number fits in both modes.
    """
    t = math.sqrt(transmissivity)
    r = math.sqrt(1.0 - transmissivity)
    u = np.zeros((da, db, da, db), dtype=complex)
    # a^dag -> t a^dag + i r b^dag ; b^dag -> i r a^dag + t b^dag
    for n in range(da):
        for m in range(db):
            norm = 1.0 / math.sqrt(math.factorial(n) * math.factorial(m))
            for j in range(n + 1):
                cj = math.comb(n, j) * t**j * (1j * r) ** (n - j)
                for k in range(m + 1):
                    ck = math.comb(m, k) * (1j * r) ** k * t ** (m - k)
                    na, nb = j + k, (n - j) + (m - k)
                    if na < da and nb < db:
                        amp = cj * ck * norm * math.sqrt(math.factorial(na) * math.factorial(nb))
                        u[na, nb, n, m] += amp
    return u.reshape(da * db, da * db)


def apply_beamsplitter(state: FockDensity, mode_a: int, mode_b: int,
                       transmissivity: float) -> FockDensity:
    _check_mode(state, mode_a)
    _check_mode(state, mode_b)
    if mode_a == mode_b:
        raise ValueError("beam splitter needs two distinct modes")
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    if transmissivity == 1.0:
        return state
    da, db = state.dims[mode_a], state.dims[mode_b]
    u = beamsplitter_unitary(da, db, float(transmissivity)).reshape(da, db, da, db)
    nm = state.num_modes
    t = state.tensor
    t = np.tensordot(u, t, axes=([2, 3], [mode_a, mode_b]))
    t = np.moveaxis(t, [0, 1], [mode_a, mode_b])
    t = np.tensordot(t, u.conj(), axes=([nm + mode_a, nm + mode_b], [2, 3]))
    t = np.moveaxis(t, [-2, -1], [nm + mode_a, nm + mode_b])
    tr = float(np.real(np.trace(t.reshape(state.coeffs.shape))))
    return _from_tensor(t, state.cutoffs, state, herald=1.0 / tr, lost=1.0 - tr)


# ------------------------------------------------------------------ moments

def _left(tensor: np.ndarray, op: np.ndarray, mode: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(op, tensor, axes=([1], [mode])), 0, mode)


def _trace(tensor: np.ndarray, nmodes: int) -> complex:
    dim = int(np.prod(tensor.shape[:nmodes]))
    return complex(np.trace(tensor.reshape(dim, dim)))


def photon_distribution(state: FockDensity, mode: int) -> np.ndarray:
    reduced = partial_trace(state, [mode])
    return np.clip(np.real(np.diag(reduced.coeffs)), 0.0, None)


def photon_number(state: FockDensity, mode: int) -> float:
    pops = photon_distribution(state, mode)
    return float(np.dot(np.arange(len(pops)), pops))


def quadrature_moments(state: FockDensity) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and symmetrised covariance in ``(x1, p1, x2, p2, ...)`` order."""
    nm = state.num_modes
    t = state.tensor
    ops = []
    for m in range(nm):
        a = annihilation(state.cutoffs[m])
        ops.append((m, a + a.T))
        ops.append((m, -1j * (a - a.T)))
    lefts = [_left(t, q, m) for m, q in ops]
    mean = np.array([np.real(_trace(lt, nm)) for lt in lefts])
    cov = np.empty((2 * nm, 2 * nm))
    for i, li in enumerate(lefts):
        for j in range(i, 2 * nm):
            mj, qj = ops[j]
            val = np.real(_trace(_left(li, qj, mj), nm))
            cov[i, j] = cov[j, i] = val - mean[i] * mean[j]
    return mean, cov


def trace_distance(a: FockDensity, b: FockDensity) -> float:
    if a.cutoffs != b.cutoffs:
        raise ValueError("states must share cutoffs")
    ev = np.linalg.eigvalsh(a.coeffs - b.coeffs)
    return 0.5 * float(np.sum(np.abs(ev)))


def min_eigenvalue(state: FockDensity) -> float:
    return float(np.min(np.linalg.eigvalsh(state.coeffs)))


def pad_cutoff(state: FockDensity, mode: int, new_cutoff: int) -> FockDensity:
    """Embed ``mode`` into a larger (or equal) cutoff with zero padding."""
    d_old = state.dims[mode]
    if new_cutoff + 1 < d_old:
        raise ValueError("pad_cutoff cannot shrink a mode; use project_subspace")
    iso = np.eye(new_cutoff + 1)[:, :d_old]
    return apply_mode_operator(state, mode, iso, heralded=False)
