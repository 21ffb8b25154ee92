"""Three-atom, five-level tensor-product space.

Basis ordering is C1-major: the index of ``|l1, l2, l3>`` is
``25 * l1 + 5 * l2 + l3`` with each level taken from :class:`Level`.
CSV outputs rely on this ordering staying fixed.
"""

from __future__ import annotations

import enum
import itertools
from typing import Iterable, Sequence

import numpy as np

N_LEVELS = 5
N_ATOMS = 3
DIM = N_LEVELS**N_ATOMS


class Level(enum.IntEnum):
    """Single-atom levels in fixed index order."""

    g0 = 0
    g1 = 1
    m = 2
    D = 3
    P = 4

    @classmethod
    def parse(cls, label: "str | int | Level") -> "Level":
        if isinstance(label, Level):
            return label
        if isinstance(label, (int, np.integer)):
            return cls(int(label))
        aliases = {"0": cls.g0, "1": cls.g1, "g0": cls.g0, "g1": cls.g1,
                   "m": cls.m, "D": cls.D, "P": cls.P}
        try:
            return aliases[str(label)]
        except KeyError:
            raise ValueError(f"unknown level label {label!r}") from None


GROUND = (Level.g0, Level.g1)
RYDBERG = (Level.D, Level.P)


def index(labels: Sequence["Level | str | int"]) -> int:
    """Flat basis index of a 3-tuple of levels."""
    if len(labels) != N_ATOMS:
        raise ValueError(f"expected {N_ATOMS} level labels, got {len(labels)}")
    a, b, c = (Level.parse(x) for x in labels)
    return N_LEVELS * N_LEVELS * int(a) + N_LEVELS * int(b) + int(c)


def labels_of(idx: int) -> tuple[Level, Level, Level]:
    if not 0 <= idx < DIM:
        raise ValueError(f"basis index {idx} out of range")
    return (Level(idx // 25), Level((idx // 5) % 5), Level(idx % 5))


def label_string(idx: int) -> str:
    names = {Level.g0: "0", Level.g1: "1", Level.m: "m", Level.D: "D", Level.P: "P"}
    return "".join(names[l] for l in labels_of(idx))


def all_labels() -> Iterable[tuple[Level, Level, Level]]:
    return itertools.product(Level, repeat=N_ATOMS)


def basis_state(labels: Sequence["Level | str | int"]) -> np.ndarray:
    psi = np.zeros(DIM, dtype=complex)
    psi[index(labels)] = 1.0
    return psi


def ket(level: "Level | str | int") -> np.ndarray:
    v = np.zeros(N_LEVELS, dtype=complex)
    v[int(Level.parse(level))] = 1.0
    return v


def transition(to: "Level | str | int", frm: "Level | str | int") -> np.ndarray:
    """Single-atom operator ``|to><frm|``."""
    op = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    op[int(Level.parse(to)), int(Level.parse(frm))] = 1.0
    return op


def projector(level: "Level | str | int") -> np.ndarray:
    return transition(level, level)


def _check_single(op: np.ndarray) -> np.ndarray:
    op = np.asarray(op)
    if op.shape != (N_LEVELS, N_LEVELS):
        raise ValueError(f"single-atom operator must be {N_LEVELS}x{N_LEVELS}, got {op.shape}")
    return op


def _check_atom(i: int) -> int:
    if i not in range(N_ATOMS):
        raise ValueError(f"atom index must be 0, 1 or 2, got {i}")
    return int(i)


def embed(op: np.ndarray, atom: int) -> np.ndarray:
    """Place a 5x5 operator on one atom, identity elsewhere."""
    op = _check_single(op)
    atom = _check_atom(atom)
    eye = np.eye(N_LEVELS, dtype=complex)
    factors = [eye] * N_ATOMS
    factors[atom] = op
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def two_site(op_a: np.ndarray, op_b: np.ndarray, i: int, j: int) -> np.ndarray:
    """``op_a`` on atom ``i`` and ``op_b`` on atom ``j`` (i != j)."""
    op_a, op_b = _check_single(op_a), _check_single(op_b)
    i, j = _check_atom(i), _check_atom(j)
    if i == j:
        raise ValueError("two_site needs distinct atoms")
    eye = np.eye(N_LEVELS, dtype=complex)
    factors = [eye] * N_ATOMS
    factors[i] = op_a
    factors[j] = op_b
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def expectation(state: np.ndarray, labels: Sequence["Level | str | int"]) -> float:
    """Population of one basis label in a pure state (vector) or density matrix."""
    k = index(labels)
    state = np.asarray(state)
    if state.ndim == 1:
        if state.shape[0] != DIM:
            raise ValueError(f"state vector must have length {DIM}")
        return float(abs(state[k]) ** 2)
    if state.shape != (DIM, DIM):
        raise ValueError(f"density matrix must be {DIM}x{DIM}")
    return float(state[k, k].real)


def populations(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state)
    if state.ndim == 1:
        return np.abs(state) ** 2
    return np.real(np.diagonal(state)).copy()


def atom_levels_mask(atom: int, level: "Level | str | int") -> np.ndarray:
    """Boolean mask of basis states where ``atom`` sits in ``level``."""
    atom = _check_atom(atom)
    lv = int(Level.parse(level))
    idx = np.arange(DIM)
    digit = (idx // N_LEVELS ** (N_ATOMS - 1 - atom)) % N_LEVELS
    return digit == lv


def replace_level(idx: np.ndarray, atom: int, level: "Level | str | int") -> np.ndarray:
    """Basis indices with ``atom`` moved to ``level``."""
    atom = _check_atom(atom)
    lv = int(Level.parse(level))
    stride = N_LEVELS ** (N_ATOMS - 1 - atom)
    idx = np.asarray(idx)
    digit = (idx // stride) % N_LEVELS
    return idx + (lv - digit) * stride


def computational_indices() -> np.ndarray:
    """Basis indices of the eight |c1 c2 t> states with every atom in {0, 1}."""
    return np.array([index(l) for l in itertools.product(GROUND, repeat=N_ATOMS)])


def embed_qubits(vec8: np.ndarray) -> np.ndarray:
    """Map an 8-dim qubit vector (C1 C2 T order) into the 125-dim space."""
    vec8 = np.asarray(vec8, dtype=complex)
    if vec8.shape != (8,):
        raise ValueError("qubit vector must have length 8")
    psi = np.zeros(DIM, dtype=complex)
    psi[computational_indices()] = vec8
    return psi


def restrict_qubits(psi: np.ndarray) -> np.ndarray:
    return np.asarray(psi)[computational_indices()]
