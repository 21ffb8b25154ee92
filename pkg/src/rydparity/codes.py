"""Syndrome extraction with ideal parity gates on small qubit registers.

Qubits are numbered from 1 in labels (D1, D2, ...) and stored big-endian:
qubit 1 is the most significant bit of the state-vector index.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import gates

MAX_QUBITS = 10
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_DAG = np.diag([1.0, -1j])
PAULI = {"I": gates.I2, "X": gates.X, "Y": gates.Y, "Z": gates.Z}
# B with B P B^dagger = Z
TO_Z = {"Z": gates.I2, "X": H, "Y": H @ S_DAG}

PE_X_GATE = gates.parity_gate("even", gates.PE_X).unitary
PO_X_GATE = gates.parity_gate("odd", gates.PE_X).unitary
PO_SQRT_X_GATE = gates.parity_gate("odd", gates.PO_SQRT_X).unitary


@dataclass
class QubitRegister:
    n: int
    state: np.ndarray
    roles: tuple[str, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"register size must be 1..{MAX_QUBITS}")
        self.state = np.asarray(self.state, dtype=complex)
        if self.state.shape != (2**self.n,):
            raise ValueError("state length does not match register size")
        if not np.isclose(np.vdot(self.state, self.state).real, 1.0, atol=1e-10):
            raise ValueError("register state must be normalized")
        if len(self.roles) != self.n:
            raise ValueError("one role label per qubit required")

    @property
    def ancilla(self) -> int:
        """Position (0-based) of the last ancilla."""
        idx = [i for i, r in enumerate(self.roles) if r.startswith("A")]
        if not idx:
            raise ValueError("register has no ancilla")
        return idx[-1]

    def copy(self) -> "QubitRegister":
        return QubitRegister(self.n, self.state.copy(), self.roles)


@dataclass
class SyndromeRecord:
    label: str
    outcome: int
    syndrome: int
    probability_one: float
    state: np.ndarray = field(repr=False)

    @property
    def deterministic(self) -> bool:
        return min(self.probability_one, 1 - self.probability_one) < 1e-10


def apply_gate(state: np.ndarray, n: int, unitary: np.ndarray, qubits: list[int]) -> np.ndarray:
    """Apply a k-qubit unitary to 0-based ``qubits`` (first listed = most significant)."""
    k = len(qubits)
    if unitary.shape != (2**k, 2**k):
        raise ValueError("unitary size does not match qubit count")
    if len(set(qubits)) != k or any(not 0 <= q < n for q in qubits):
        raise ValueError(f"invalid qubit list {qubits}")
    psi = state.reshape([2] * n)
    psi = np.moveaxis(psi, qubits, list(range(k)))
    shape = psi.shape
    psi = (unitary @ psi.reshape(2**k, -1)).reshape(shape)
    psi = np.moveaxis(psi, list(range(k)), qubits)
    return psi.reshape(-1)


def pauli_string_matrix(n: int, paulis: dict[int, str]) -> np.ndarray:
    """Dense 2^n operator; ``paulis`` maps 0-based qubit to I/X/Y/Z."""
    op = np.array([[1.0 + 0j]])
    for q in range(n):
        op = np.kron(op, PAULI[paulis.get(q, "I")])
    return op


_STRING = re.compile(r"(?:[IXYZ]\d+)+")
_TERM = re.compile(r"([IXYZ])(\d+)")


def parse_pauli(text: str) -> dict[int, str]:
    """'X2', 'Z1X4Z7' or 'I' -> {1-based qubit: letter} (identity gives {})."""
    text = text.strip().upper().replace("D", "")
    if text == "I":
        return {}
    if not _STRING.fullmatch(text):
        raise ValueError(f"cannot parse Pauli string {text!r}")
    out: dict[int, str] = {}
    for letter, num in _TERM.findall(text):
        q = int(num)
        if q in out:
            raise ValueError(f"qubit {q} repeated in {text!r}")
        if letter != "I":
            out[q] = letter
    return out


def encode_repetition(a: complex, b: complex) -> QubitRegister:
    """A|000> + B|111> on D1..D3, ancilla in |0>."""
    if not np.isclose(abs(a) ** 2 + abs(b) ** 2, 1.0, atol=1e-10):
        raise ValueError("|A|^2 + |B|^2 must equal 1")
    psi = np.zeros(16, dtype=complex)
    psi[0b0000] = a
    psi[0b1110] = b
    return QubitRegister(4, psi, ("D1", "D2", "D3", "A1"))


def apply_pauli_error(reg: QubitRegister, error: str | dict) -> QubitRegister:
    """Apply a Pauli string on data qubits (1-based labels)."""
    paulis = parse_pauli(error) if isinstance(error, str) else dict(error)
    n_data = sum(1 for r in reg.roles if r.startswith("D"))
    out = reg.copy()
    for q, p in sorted(paulis.items()):
        if not 1 <= q <= n_data:
            raise ValueError(f"qubit index {q} out of range 1..{n_data}")
        out.state = apply_gate(out.state, reg.n, PAULI[p], [q - 1])
    return out


def measure_ancilla(reg: QubitRegister, rng: np.random.Generator | None = None
                    ) -> tuple[int, float, QubitRegister]:
    """Projective Z measurement of the ancilla.

    Without ``rng`` the more likely outcome is taken (ties go to 0), which is
    exact for every deterministic syndrome.
    """
    anc = reg.ancilla
    psi = reg.state.reshape([2] * reg.n)
    one = np.take(psi, 1, axis=anc)
    p1 = float(np.vdot(one, one).real)
    if rng is None:
        outcome = 1 if p1 > 0.5 else 0
    else:
        outcome = int(rng.random() < p1)
    keep = np.zeros_like(psi)
    idx = [slice(None)] * reg.n
    idx[anc] = outcome
    keep[tuple(idx)] = psi[tuple(idx)]
    p = p1 if outcome else 1 - p1
    out = reg.copy()
    out.state = keep.reshape(-1) / np.sqrt(p)
    return outcome, p1, out


def reset_ancilla(reg: QubitRegister) -> QubitRegister:
    """Flip a measured ancilla back to |0> (requires a definite ancilla value)."""
    anc = reg.ancilla
    psi = reg.state.reshape([2] * reg.n)
    if np.linalg.norm(np.take(psi, 1, axis=anc)) > 1e-10:
        out = reg.copy()
        out.state = apply_gate(reg.state, reg.n, gates.X, [anc])
        if np.linalg.norm(np.take(out.state.reshape([2] * reg.n), 1, axis=anc)) > 1e-10:
            raise ValueError("ancilla is not in a computational basis state")
        return out
    return reg


def _require_fresh_ancilla(reg: QubitRegister) -> None:
    psi = reg.state.reshape([2] * reg.n)
    if np.linalg.norm(np.take(psi, 1, axis=reg.ancilla)) > 1e-10:
        raise ValueError("ancilla must start in |0>")


def repetition_detect(reg: QubitRegister) -> SyndromeRecord:
    """Three PO-sqrt(X) gates on pairs (1,2), (2,3), (1,3), one ancilla readout."""
    _require_fresh_ancilla(reg)
    anc = reg.ancilla
    psi = reg.state
    for a, b in ((0, 1), (1, 2), (0, 2)):
        psi = apply_gate(psi, reg.n, PO_SQRT_X_GATE, [a, b, anc])
    staged = QubitRegister(reg.n, psi, reg.roles)
    outcome, p1, post = measure_ancilla(staged)
    return SyndromeRecord("Z1Z2,Z2Z3,Z1Z3", outcome, -1 if outcome else 1, p1, post.state)


@dataclass(frozen=True)
class Stabilizer:
    """A check measured as a sequence of two-qubit parity checks.

    ``pairs`` holds ((qubit, Pauli), (qubit, Pauli)) with 1-based data qubits.
    """

    label: str
    pairs: tuple[tuple[tuple[int, str], tuple[int, str]], ...]

    @property
    def paulis(self) -> dict[int, str]:
        out = {}
        for pair in self.pairs:
            for q, p in pair:
                out[q] = p
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Stabilizer":
        pairs = tuple(tuple((int(q), str(p)) for q, p in pair) for pair in d["pairs"])
        for pair in pairs:
            if len(pair) != 2 or pair[0][0] == pair[1][0]:
                raise ValueError(f"malformed pair in {d.get('label')}")
            for _, p in pair:
                if p not in TO_Z:
                    raise ValueError(f"unsupported Pauli {p!r}")
        return cls(str(d["label"]), pairs)


def parity_gate_for(n_pairs: int) -> np.ndarray:
    """PE-X for an even number of pair checks, PO-X for an odd number.

    Either way the ancilla ends in |1> exactly when an odd number of pairs
    has odd parity, i.e. when the product of the pair parities is -1.
    """
    return PE_X_GATE if n_pairs % 2 == 0 else PO_X_GATE


def measure_stabilizer(reg: QubitRegister, stab: Stabilizer) -> SyndromeRecord:
    """Accumulate all pair parities on one ancilla, then read it once."""
    if not stab.pairs:
        raise ValueError("stabilizer has no parity checks")
    _require_fresh_ancilla(reg)
    anc = reg.ancilla
    gate = parity_gate_for(len(stab.pairs))
    psi = reg.state
    for (qa, pa), (qb, pb) in stab.pairs:
        a, b = qa - 1, qb - 1
        psi = apply_gate(psi, reg.n, TO_Z[pa], [a])
        psi = apply_gate(psi, reg.n, TO_Z[pb], [b])
        psi = apply_gate(psi, reg.n, gate, [a, b, anc])
        psi = apply_gate(psi, reg.n, TO_Z[pa].conj().T, [a])
        psi = apply_gate(psi, reg.n, TO_Z[pb].conj().T, [b])
    outcome, p1, post = measure_ancilla(QubitRegister(reg.n, psi, reg.roles))
    return SyndromeRecord(stab.label, outcome, -1 if outcome else 1, p1, post.state)


def measure_xzzx_stabilizer(reg: QubitRegister, spec) -> SyndromeRecord:
    """Two ordered parity checks, e.g. Z1Z5 then X2X4, read out on one ancilla."""
    stab = spec if isinstance(spec, Stabilizer) else Stabilizer.from_dict(spec)
    if len(stab.pairs) != 2:
        raise ValueError("an XZZX bulk check needs exactly two parity pairs")
    return measure_stabilizer(reg, stab)


@dataclass(frozen=True)
class Layout:
    name: str
    n_data: int
    stabilizers: tuple[Stabilizer, ...]
    logicals: dict
    notes: str = ""

    @classmethod
    def load(cls, path=None) -> "Layout":
        if path is None:
            text = resources.files("rydparity").joinpath("data/xzzx_layout.json").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        d = json.loads(text)
        return cls(d["name"], int(d["n_data"]),
                   tuple(Stabilizer.from_dict(s) for s in d["stabilizers"]),
                   dict(d["logicals"]), d.get("notes", ""))

    def operator(self, paulis: dict[int, str]) -> np.ndarray:
        return pauli_string_matrix(self.n_data, {q - 1: p for q, p in paulis.items()})

    def codespace_state(self, logical_z: int = 1, seed: int = 7) -> np.ndarray:
        """Project a fixed random state onto the +1 stabilizer space and Zbar = logical_z."""
        rng = np.random.default_rng(seed)
        dim = 2**self.n_data
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        eye = np.eye(dim)
        for s in self.stabilizers:
            psi = 0.5 * (eye + self.operator(s.paulis)) @ psi
        zbar = self.operator(parse_pauli(self.logicals["Z"]))
        psi = 0.5 * (eye + logical_z * zbar) @ psi
        norm = np.linalg.norm(psi)
        if norm < 1e-12:
            raise ValueError("projection onto the code space vanished")
        return psi / norm


def register_with_ancilla(data_state: np.ndarray, n_data: int) -> QubitRegister:
    psi = np.kron(np.asarray(data_state, dtype=complex), np.array([1.0, 0.0]))
    roles = tuple(f"D{i + 1}" for i in range(n_data)) + ("A1",)
    return QubitRegister(n_data + 1, psi, roles)


def xzzx_round(reg: QubitRegister, error_pattern: str | dict = "I",
               layout: Layout | None = None) -> list[SyndromeRecord]:
    """Apply an error, then extract every check in order with one reused ancilla."""
    layout = layout or Layout.load()
    reg = apply_pauli_error(reg, error_pattern)
    records = []
    for stab in layout.stabilizers:
        rec = measure_stabilizer(reg, stab)
        records.append(rec)
        reg = reset_ancilla(QubitRegister(reg.n, rec.state, reg.roles))
    return records


def repetition_table(errors=("I", "X1", "X2", "X3"), a: complex = 1 / np.sqrt(2),
                     b: complex = 1 / np.sqrt(2)) -> list[SyndromeRecord]:
    out = []
    for e in errors:
        rec = repetition_detect(apply_pauli_error(encode_repetition(a, b), e))
        rec.label = e
        out.append(rec)
    return out
