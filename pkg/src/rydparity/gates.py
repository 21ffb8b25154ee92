"""Ideal rotations, parity-controlled gates and fidelity measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import hilbert

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class RotationSpec:
    gamma: float
    theta: float = np.pi / 2
    phi: float = np.pi

    @property
    def axis(self) -> np.ndarray:
        t, p = self.theta, self.phi
        return np.array([-np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])


PE_X = RotationSpec(np.pi, np.pi / 2, np.pi)
PO_SQRT_X = RotationSpec(np.pi / 2, np.pi / 2, np.pi)


def bright_dark(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """(|b>, |d>) in the {|0>, |1>} basis."""
    b = np.array([np.sin(theta / 2) * np.exp(1j * phi), np.cos(theta / 2)])
    d = np.array([np.cos(theta / 2), -np.sin(theta / 2) * np.exp(-1j * phi)])
    return b, d


def single_qubit_unitary(spec: RotationSpec) -> np.ndarray:
    """|d><d| + e^{i gamma} |b><b|."""
    b, d = bright_dark(spec.theta, spec.phi)
    return np.outer(d, d.conj()) + np.exp(1j * spec.gamma) * np.outer(b, b.conj())


def single_qubit_unitary_exp(spec: RotationSpec) -> np.ndarray:
    """Same rotation written as e^{i gamma/2} exp(-i gamma/2 n.sigma)."""
    n = spec.axis
    ns = n[0] * X + n[1] * Y + n[2] * Z
    return np.exp(1j * spec.gamma / 2) * expm(-0.5j * spec.gamma * ns)


def phase_equivalent(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    """True when a = e^{i chi} b for unitaries of equal size."""
    dim = a.shape[0]
    return abs(abs(np.trace(a.conj().T @ b)) / dim - 1.0) < tol


@dataclass(frozen=True)
class ParityGate:
    parity: str
    rotation: RotationSpec
    unitary: np.ndarray

    def target_state(self, psi0_8: np.ndarray) -> np.ndarray:
        return hilbert.embed_qubits(self.unitary @ psi0_8)


def parity_projectors(parity: str) -> tuple[np.ndarray, np.ndarray]:
    """(active, idle) projectors on the two-control register."""
    even = np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex)
    odd = np.eye(4, dtype=complex) - even
    if parity == "even":
        return even, odd
    if parity == "odd":
        return odd, even
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def parity_gate(parity: str, spec: RotationSpec) -> ParityGate:
    active, idle = parity_projectors(parity)
    u = np.kron(active, single_qubit_unitary(spec)) + np.kron(idle, I2)
    return ParityGate(parity, spec, u)


def initial_qubit_state() -> np.ndarray:
    """(|00> + |01> + |10> + |11>) |0> / 2 in C1 C2 T order."""
    controls = np.full(4, 0.5, dtype=complex)
    return np.kron(controls, np.array([1.0, 0.0], dtype=complex))


def initial_state() -> np.ndarray:
    return hilbert.embed_qubits(initial_qubit_state())


def fidelity_pure(psi_t: np.ndarray, psi0_8: np.ndarray, gate: ParityGate) -> float:
    target = gate.target_state(psi0_8)
    return float(abs(np.vdot(target, psi_t)) ** 2)


def fidelity_mixed(rho_t: np.ndarray, target: np.ndarray) -> float:
    return float(np.real(np.vdot(target, rho_t @ target)))
