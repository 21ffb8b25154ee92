import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rydparity import codes, gates

PLUS = np.array([1, 1]) / np.sqrt(2)
MINUS = np.array([1, -1]) / np.sqrt(2)
ZERO, ONE = np.array([1.0, 0.0]), np.array([0.0, 1.0])


def kron(*vs):
    out = np.array([1.0 + 0j])
    for v in vs:
        out = np.kron(out, v)
    return out


@pytest.mark.parametrize("error,syndrome", [("I", 1), ("X1", -1), ("X2", -1), ("X3", -1)])
@pytest.mark.parametrize("a", [1.0, 0.0, np.sqrt(0.5), 0.6])
def test_repetition_detection_table(error, syndrome, a):
    b = np.sqrt(1 - a**2) * np.exp(0.3j)
    rec = codes.repetition_table([error], a, b)[0]
    assert rec.syndrome == syndrome
    assert rec.deterministic


def test_repetition_detection_preserves_data():
    a, b = 0.6, 0.8j
    reg = codes.apply_pauli_error(codes.encode_repetition(a, b), "X2")
    rec = codes.repetition_detect(reg)
    expected = np.zeros(16, complex)
    expected[0b0101] = a
    expected[0b1011] = b
    assert abs(np.vdot(expected, rec.state)) == pytest.approx(1.0)


def test_worked_example_four_qubits():
    psi = (kron(ZERO, PLUS, MINUS, ZERO) + kron(ONE, MINUS, PLUS, ONE)) / np.sqrt(2)
    reg = codes.register_with_ancilla(psi, 4)
    stab = codes.Stabilizer("Z1X2X3Z4", (((1, "Z"), (4, "Z")), ((2, "X"), (3, "X"))))
    rec = codes.measure_xzzx_stabilizer(reg, stab)
    assert rec.syndrome == -1 and rec.deterministic


def test_xzzx_check_requires_two_pairs():
    reg = codes.register_with_ancilla(kron(ZERO, ZERO), 2)
    with pytest.raises(ValueError):
        codes.measure_xzzx_stabilizer(reg, codes.Stabilizer("Z1Z2", (((1, "Z"), (2, "Z")),)))


@pytest.mark.parametrize("n_pairs,gate", [(1, codes.PO_X_GATE), (2, codes.PE_X_GATE),
                                          (3, codes.PO_X_GATE)])
def test_gate_choice_by_pair_count(n_pairs, gate):
    np.testing.assert_array_equal(codes.parity_gate_for(n_pairs), gate)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from("XYZ"), min_size=3, max_size=3),
       st.integers(0, 7))
def test_single_pauli_check_matches_expectation(letters, bits):
    # For a product eigenstate the parity check must return the eigenvalue.
    eig = {"Z": (ZERO, ONE), "X": (PLUS, MINUS),
           "Y": (np.array([1, 1j]) / np.sqrt(2), np.array([1, -1j]) / np.sqrt(2))}
    signs = [(bits >> k) & 1 for k in range(3)]
    psi = kron(*[eig[p][s] for p, s in zip(letters, signs)])
    stab = codes.Stabilizer("s", (((1, letters[0]), (2, letters[1])),))
    reg = codes.register_with_ancilla(psi, 3)
    rec = codes.measure_stabilizer(reg, stab)
    assert rec.syndrome == (-1) ** (signs[0] + signs[1])


@pytest.fixture(scope="module")
def layout():
    return codes.Layout.load()


def pauli_commute(a: dict, b: dict) -> bool:
    clash = sum(1 for q in set(a) & set(b) if a[q] != b[q])
    return clash % 2 == 0


def test_layout_checks_commute(layout):
    ops = [s.paulis for s in layout.stabilizers]
    assert all(pauli_commute(a, b) for a, b in itertools.combinations(ops, 2))
    assert len(ops) == 8 and layout.n_data == 9


def test_layout_logicals(layout):
    z = codes.parse_pauli(layout.logicals["Z"])
    x = codes.parse_pauli(layout.logicals["X"])
    assert not pauli_commute(z, x)
    for s in layout.stabilizers:
        assert pauli_commute(z, s.paulis) and pauli_commute(x, s.paulis)


def test_layout_stabilizers_independent(layout):
    # 8 independent generators on 9 qubits leave a 2-dim code space
    dim = 2**9
    proj = np.eye(dim)
    for s in layout.stabilizers:
        proj = proj @ (0.5 * (np.eye(dim) + layout.operator(s.paulis)))
    assert np.trace(proj).real == pytest.approx(2.0)


@pytest.mark.parametrize("logical_z", [1, -1])
def test_codespace_states_give_trivial_syndrome(layout, logical_z):
    data = layout.codespace_state(logical_z)
    recs = codes.xzzx_round(codes.register_with_ancilla(data, 9), "I", layout)
    assert all(r.syndrome == 1 and r.deterministic for r in recs)


@pytest.mark.parametrize("error", ["X5", "Z5", "Y5", "X1", "Z9"])
def test_single_errors_flag_anticommuting_checks(layout, error):
    data = layout.codespace_state(1)
    recs = codes.xzzx_round(codes.register_with_ancilla(data, 9), error, layout)
    e = codes.parse_pauli(error)
    for stab, rec in zip(layout.stabilizers, recs):
        assert rec.syndrome == (1 if pauli_commute(e, stab.paulis) else -1)
        assert rec.deterministic


def test_logical_operator_is_invisible(layout):
    data = layout.codespace_state(1)
    recs = codes.xzzx_round(codes.register_with_ancilla(data, 9), layout.logicals["X"],
                            layout)
    assert all(r.syndrome == 1 for r in recs)


@pytest.mark.parametrize("text,expected", [
    ("I", {}), ("X2", {2: "X"}), ("z1x4z7", {1: "Z", 4: "X", 7: "Z"}), ("D3", None)])
def test_parse_pauli(text, expected):
    if expected is None:
        with pytest.raises(ValueError):
            codes.parse_pauli(text)
    else:
        assert codes.parse_pauli(text) == expected


def test_parse_pauli_rejects_repeats_and_range():
    with pytest.raises(ValueError):
        codes.parse_pauli("X1Z1")
    with pytest.raises(ValueError):
        codes.apply_pauli_error(codes.encode_repetition(1.0, 0.0), "X4")


def test_ancilla_must_be_fresh():
    reg = codes.encode_repetition(1.0, 0.0)
    reg.state = codes.apply_gate(reg.state, 4, gates.X, [3])
    with pytest.raises(ValueError):
        codes.repetition_detect(reg)


def test_sampled_measurement_follows_probability():
    psi = kron(ZERO, PLUS)
    reg = codes.QubitRegister(2, psi, ("D1", "A1"))
    rng = np.random.default_rng(1)
    ones = sum(codes.measure_ancilla(reg, rng)[0] for _ in range(2000))
    assert 900 < ones < 1100


def test_register_validation():
    with pytest.raises(ValueError):
        codes.QubitRegister(2, np.ones(4), ("D1", "A1"))
    with pytest.raises(ValueError):
        codes.encode_repetition(1.0, 1.0)
