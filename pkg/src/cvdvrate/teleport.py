"""Teleporting an optical mode through DV (single-rail qubit) resources.

The mode is spread over ``N`` modes by a balanced beam-splitter tree, every
mode is teleported through its own Werner pair (which only carries the
0/1-photon subspace), and the modes are recombined by the inverted tree with
all but one output port heralded on vacuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import fock
from .circuits import teleport_qubit_circuit, werner_matrix
from .fock import FockDensity
from .params import TmsvParam, as_chi

ALLOWED_MODE_COUNTS = (1, 2, 4, 8)
MODE_THRESHOLD = 1.1


@dataclass(frozen=True)
class TeleporterConfig:
    num_modes: int = 1
    bsm_success_prob: float = 0.5
    werner_fidelity: float = 1.0

    def __post_init__(self):
        if self.num_modes not in ALLOWED_MODE_COUNTS:
            raise ValueError(f"num_modes must be one of {ALLOWED_MODE_COUNTS}")
        if not 0.0 < self.bsm_success_prob <= 1.0:
            raise ValueError("bsm_success_prob must lie in (0, 1]")
        if not 0.25 <= self.werner_fidelity <= 1.0:
            raise ValueError("werner_fidelity must lie in [0.25, 1]")


@dataclass(frozen=True)
class TeleportResult:
    state: FockDensity
    success_prob: float
    split_prob: float
    recombine_prob: float
    bsm_factor: float


def choose_mode_count(chi: TmsvParam | float, threshold: float = MODE_THRESHOLD) -> int:
    """Fewest tree modes keeping the mean photon number per mode within ``threshold``."""
    nbar = as_chi(chi).mean_photons
    for n in ALLOWED_MODE_COUNTS:
        if nbar / n <= threshold:
            return n
    return ALLOWED_MODE_COUNTS[-1]


def tree_phases(num_modes: int) -> np.ndarray:
    """Amplitude phases of the balanced 50:50 tree: ``i^popcount(j)``."""
    return np.array([1j ** bin(j).count("1") for j in range(num_modes)])


@lru_cache(maxsize=32)
def split_map(num_modes: int, cutoff: int) -> np.ndarray:
    """Tree splitting followed by the <=1-photon-per-mode projection.

    Maps a single mode (dimension ``cutoff + 1``) into ``2^N`` single-rail
    qubits; ``|n>`` lands on each n-subset S with amplitude
    ``sqrt(n!) N^(-n/2) prod_{j in S} u_j``.
    """
    u = tree_phases(num_modes)
    k = np.zeros((2 ** num_modes, cutoff + 1), dtype=complex)
    for idx in range(2 ** num_modes):
        bits = [(idx >> (num_modes - 1 - j)) & 1 for j in range(num_modes)]
        n = sum(bits)
        if n > cutoff:
            continue
        amp = math.sqrt(math.factorial(n)) * num_modes ** (-n / 2)
        for j, b in enumerate(bits):
            if b:
                amp = amp * u[j]
        k[idx, n] = amp
    return k


def split_tree_state(state: FockDensity, mode: int, num_modes: int) -> FockDensity:
    """Explicit beam-splitter tree: appends ``num_modes - 1`` vacuum modes and
    interferes them with ``mode``.  Only practical for small cutoffs."""
    if num_modes == 1:
        return state
    c = state.cutoffs[mode]
    out = state
    first = state.num_modes
    for _ in range(num_modes - 1):
        out = fock.tensor_product(out, fock.fock_state([0], [c]))
    labels = [mode] + list(range(first, first + num_modes - 1))
    stride = num_modes // 2
    while stride >= 1:
        for start in range(0, num_modes, 2 * stride):
            for off in range(stride):
                out = fock.apply_beamsplitter(out, labels[start + off], labels[start + off + stride], 0.5)
        stride //= 2
    return out


@lru_cache(maxsize=64)
def qubit_teleport_superop(fidelity: float) -> np.ndarray:
    """Superoperator S[a, b, c, d]: |c><d| -> sum S[a,b,c,d] |a><b| of qubit
    teleportation through a Werner pair, from the explicit circuit."""
    res = werner_matrix(fidelity)
    s = np.zeros((2, 2, 2, 2), dtype=complex)
    for c in range(2):
        for d in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[c, d] = 1.0
            s[:, :, c, d] = teleport_qubit_circuit(unit, res)
    return s


def _apply_qubit_superop(op: np.ndarray, superop: np.ndarray, n: int) -> np.ndarray:
    t = op.reshape([2] * (2 * n))
    for q in range(n):
        t = np.tensordot(superop, t, axes=([2, 3], [q, n + q]))
        # new axes 0,1 are (row q, col q); move back into place
        t = np.moveaxis(t, [0, 1], [q, n + q])
    return t.reshape(2 ** n, 2 ** n)


@lru_cache(maxsize=64)
def transfer_map(num_modes: int, cutoff: int, fidelity: float) -> np.ndarray:
    """T[m', n', m, n]: unnormalised image of |m><n| under the whole
    split / teleport / recombine pipeline (F-resource, every BSM succeeding).
    Output mode cutoff is ``num_modes``."""
    k = split_map(num_modes, cutoff)
    k_out = split_map(num_modes, num_modes)
    sup = qubit_teleport_superop(fidelity)
    d = cutoff + 1
    out = np.zeros((num_modes + 1, num_modes + 1, d, d), dtype=complex)
    for m in range(min(d, num_modes + 1)):
        for n in range(min(d, num_modes + 1)):
            unit = np.outer(k[:, m], k[:, n].conj())
            unit = _apply_qubit_superop(unit, sup, num_modes)
            out[:, :, m, n] = k_out.conj().T @ unit @ k_out
    return out


def teleport_cv_state(state: FockDensity, input_mode: int, cfg: TeleporterConfig) -> TeleportResult:
    """Teleport ``input_mode`` of ``state`` through the DV teleporter."""
    fock._check_mode(state, input_mode)
    n = cfg.num_modes
    c = state.cutoffs[input_mode]
    t = state.tensor
    nm = state.num_modes

    # herald of the split stage alone
    k = split_map(n, c)
    split_state = fock.apply_mode_operator(state, input_mode, k)
    p_split = split_state.weight / state.weight

    tm = transfer_map(n, c, float(cfg.werner_fidelity))
    out = np.tensordot(tm, t, axes=([2, 3], [input_mode, nm + input_mode]))
    out = np.moveaxis(out, [0, 1], [input_mode, nm + input_mode])
    cutoffs = list(state.cutoffs)
    cutoffs[input_mode] = n
    result = fock._from_tensor(out, cutoffs, state)
    p_total_optical = result.weight / state.weight
    bsm = cfg.bsm_success_prob ** n
    result = replace(result, weight=result.weight * bsm)
    return TeleportResult(result, p_total_optical * bsm, p_split,
                          p_total_optical / p_split, bsm)


def perfect_qubit_projection(state: FockDensity, mode: int) -> FockDensity:
    """The F=1, N=1 reference: the mode projected onto its 0/1-photon subspace."""
    return fock.project_subspace(state, mode, 1)
