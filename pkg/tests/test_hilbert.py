import numpy as np
import pytest
from hypothesis import given, strategies as st

from rydparity import hilbert
from rydparity.hilbert import Level

levels = st.sampled_from(list(Level))


@given(st.tuples(levels, levels, levels))
def test_index_round_trip(labels):
    assert hilbert.labels_of(hilbert.index(labels)) == labels


def test_dimension_and_first_last():
    assert hilbert.DIM == 125
    assert hilbert.index("000") == 0
    assert hilbert.index("PPP") == 124
    assert hilbert.label_string(hilbert.index("0mD")) == "0mD"


def test_index_rejects_bad_input():
    with pytest.raises(ValueError):
        hilbert.index("00")
    with pytest.raises((ValueError, KeyError)):
        hilbert.index("00x")


@pytest.mark.parametrize("atom", [0, 1, 2])
def test_embed_matches_kron(atom):
    op = hilbert.transition(Level.D, Level.g0)
    eye = np.eye(5)
    factors = [eye, eye, eye]
    factors[atom] = op
    expected = np.kron(np.kron(factors[0], factors[1]), factors[2])
    np.testing.assert_array_equal(hilbert.embed(op, atom), expected)


def test_embed_rejects_bad_atom():
    with pytest.raises(ValueError):
        hilbert.embed(np.eye(5), 3)


def test_transition_acts_on_ket():
    np.testing.assert_array_equal(hilbert.transition("D", "0") @ hilbert.ket("0"),
                                  hilbert.ket("D"))


def test_computational_indices_order():
    idx = hilbert.computational_indices()
    names = [hilbert.label_string(int(i)) for i in idx]
    assert names == ["000", "001", "010", "011", "100", "101", "110", "111"]


@given(st.lists(st.floats(-1, 1), min_size=16, max_size=16))
def test_embed_restrict_round_trip(vals):
    v = np.array(vals[:8]) + 1j * np.array(vals[8:])
    np.testing.assert_allclose(hilbert.restrict_qubits(hilbert.embed_qubits(v)), v)


def test_populations_sum_to_norm():
    rng = np.random.default_rng(3)
    psi = rng.standard_normal(125) + 1j * rng.standard_normal(125)
    psi /= np.linalg.norm(psi)
    assert hilbert.populations(psi).sum() == pytest.approx(1.0)


def test_replace_level_maps_indices():
    src = np.array([hilbert.index("D01")])
    assert hilbert.label_string(int(hilbert.replace_level(src, 0, "m")[0])) == "m01"
