"""Brute-force qubit circuits used as oracles for the Werner-pair recurrences.

Nothing here uses the closed-form fidelity expressions; states are built as
explicit density matrices and pushed through gates and projective
measurements.
"""

from __future__ import annotations

import numpy as np

PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
PHI_MINUS = np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)
PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
BELL = (PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Zp = np.diag([1, -1]).astype(complex)
#: Pauli correction on the far qubit that maps each Bell outcome back to Phi+
CORRECTIONS = (I2, Zp, X, X @ Zp)


def werner_matrix(fidelity: float) -> np.ndarray:
    """(4F-1)/3 |Phi+><Phi+| + (1-F)/3 I."""
    phi = np.outer(PHI_PLUS, PHI_PLUS.conj())
    return (4 * fidelity - 1) / 3 * phi + (1 - fidelity) / 3 * np.eye(4)


def kron(*ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def _embed_two(op2: np.ndarray, q1: int, q2: int, n: int) -> np.ndarray:
    """Embed a two-qubit operator acting on (q1, q2) into n qubits."""
    perm = [q1, q2] + [q for q in range(n) if q not in (q1, q2)]
    full = np.kron(op2, np.eye(2 ** (n - 2)))
    full = full.reshape([2] * (2 * n))
    inv = np.argsort(perm)
    full = full.transpose(list(inv) + [n + i for i in inv])
    return full.reshape(2 ** n, 2 ** n)


def cnot(control: int, target: int, n: int) -> np.ndarray:
    c = np.zeros((4, 4), dtype=complex)
    c[0, 0] = c[1, 1] = c[2, 3] = c[3, 2] = 1
    return _embed_two(c, control, target, n)


def partial_trace_qubits(rho: np.ndarray, keep: list[int], n: int) -> np.ndarray:
    t = rho.reshape([2] * (2 * n))
    drop = [q for q in range(n) if q not in keep]
    for k, q in enumerate(sorted(drop, reverse=True)):
        t = np.trace(t, axis1=q, axis2=q + t.ndim // 2)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def fidelity_phi_plus(rho2: np.ndarray) -> float:
    return float(np.real(PHI_PLUS.conj() @ rho2 @ PHI_PLUS))


def twirl(rho2: np.ndarray) -> np.ndarray:
    """Depolarising twirl onto the Werner family (keeps the Phi+ fidelity)."""
    return werner_matrix(fidelity_phi_plus(rho2))


def swap_circuit(f1: float, f2: float) -> np.ndarray:
    """Entanglement swapping of pairs (0,1) and (2,3): Bell measurement on
    qubits 1 and 2, Pauli correction on qubit 3; returns the (0,3) state
    averaged over all four outcomes."""
    rho = kron(werner_matrix(f1), werner_matrix(f2))
    out = np.zeros((4, 4), dtype=complex)
    for bell, corr in zip(BELL, CORRECTIONS):
        proj = _embed_two(np.outer(bell, bell.conj()), 1, 2, 4)
        branch = proj @ rho @ proj
        fix = kron(I2, I2, I2, corr)
        branch = fix @ branch @ fix.conj().T
        out += partial_trace_qubits(branch, [0, 3], 4)
    return out


def purification_circuit(f: float) -> tuple[float, float]:
    """Bilateral-CNOT purification of two Werner pairs.

    Pair (0,1) is kept, pair (2,3) is measured in Z after CNOTs 0->2 and
    1->3.  Equal outcomes herald success; the kept pair is twirled back into
    Werner form.  Returns (output fidelity, success probability).
    """
    rho = kron(werner_matrix(f), werner_matrix(f))
    u = cnot(0, 2, 4) @ cnot(1, 3, 4)
    rho = u @ rho @ u.conj().T
    kept = np.zeros((4, 4), dtype=complex)
    for bit in (0, 1):
        z = np.zeros((2, 2), dtype=complex)
        z[bit, bit] = 1
        proj = kron(I2, I2, z, z)
        kept += partial_trace_qubits(proj @ rho @ proj, [0, 1], 4)
    p = float(np.real(np.trace(kept)))
    return fidelity_phi_plus(twirl(kept / p)), p


def teleport_qubit_circuit(rho_in: np.ndarray, resource: np.ndarray) -> np.ndarray:
    """Teleport qubit 0 of ``rho_in`` (any number of spectator qubits before it
    is not supported; ``rho_in`` is 2x2) through a two-qubit ``resource``.

    Bell measurement on (input, resource qubit 0), Pauli correction on
    resource qubit 1, summed over outcomes.
    """
    rho = np.kron(rho_in, resource)
    out = np.zeros((2, 2), dtype=complex)
    for bell, corr in zip(BELL, CORRECTIONS):
        proj = _embed_two(np.outer(bell, bell.conj()), 0, 1, 3)
        branch = proj @ rho @ proj
        fix = kron(I2, I2, corr)
        out += partial_trace_qubits(fix @ branch @ fix.conj().T, [2], 3)
    return out
