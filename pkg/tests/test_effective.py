import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from rydparity import effective, gates, model
from rydparity.model import mhz

freqs = st.floats(0.5, 150.0).map(mhz)


@settings(max_examples=30, deadline=None)
@given(freqs, st.floats(0.05, 20.0).map(mhz), st.sampled_from(effective.BLOCK_IDS),
       st.sampled_from(["0", "1"]))
def test_exchange_blocks_match_numeric(j, j12, block, spectator):
    spec = effective.dd_block_spectrum(j, j12, block)
    m = effective.dd_block_matrix(j, j12, block, spectator)
    numeric = np.linalg.eigvalsh(m)
    np.testing.assert_allclose(np.sort(spec.eigenvalues), numeric, atol=1e-10 * max(j, 1))
    assert effective.eigen_residual(m, spec.eigenvalues, spec.eigenvectors) < 1e-10 * max(j, 1)


@pytest.mark.parametrize("block", ["1A", "1B"])
def test_first_eigenvalue_is_minus_j12(block):
    spec = effective.dd_block_spectrum(mhz(86.0), mhz(10.75), block)
    assert spec.eigenvalues[0] == -mhz(10.75)


def test_block_2c_uses_control_coupling():
    spec = effective.dd_block_spectrum(mhz(86.0), mhz(10.0), "2C")
    np.testing.assert_allclose(sorted(spec.eigenvalues), [-mhz(10.0), mhz(10.0)])


@settings(max_examples=20)
@given(st.floats(0.1, 20.0).map(mhz))
def test_lambda_block(omega_c):
    l0, lm, lp, vecs = effective.omega_c_block_spectrum(omega_c)
    assert (l0, lp, lm) == (0.0, math.sqrt(2) * omega_c, -math.sqrt(2) * omega_c)
    m = effective.omega_c_block_matrix(omega_c)
    assert effective.eigen_residual(m, [l0, lm, lp], vecs) < 1e-12 * omega_c


def test_physical_coupling_halves_splitting():
    m = effective.omega_c_block_matrix(2.0, "physical")
    np.testing.assert_allclose(np.linalg.eigvalsh(m), [-2.0, 0.0, 2.0], atol=1e-12)


def test_unknown_block_rejected():
    with pytest.raises(ValueError):
        effective.block_basis("3Z")


@pytest.mark.parametrize("alpha", [0.529, 0.7584, 42.76])
@pytest.mark.parametrize("frac", [0.1, 0.5, 0.77, 1.0])
def test_cumulative_area_matches_quadrature(alpha, frac):
    p = model.TargetPulse(omega_f=mhz(0.5), alpha=alpha)
    t = frac * p.tau
    pieces = [0.0, min(t, 4 * p.T), t]
    quad = sum(integrate.quad(lambda s: float(p.envelope(s)), lo, hi)[0]
               for lo, hi in zip(pieces, pieces[1:]) if hi > lo)
    assert effective.cumulative_area(t, p) == pytest.approx(quad, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("parity,spec", [("even", gates.PE_X), ("odd", gates.PO_SQRT_X),
                                         ("even", gates.RotationSpec(0.7, 1.1, 0.4))])
def test_area_pi_pulse_gives_ideal_gate(parity, spec):
    # Each half returns the bright state with phase pi; the jump imprints gamma.
    p = model.TargetPulse(omega_f=mhz(0.5), alpha=0.6, gamma=spec.gamma, theta=spec.theta,
                          phi=spec.phi)
    p = p.replace(omega_f=p.omega_f * math.pi / p.area())
    u = effective.EffectiveModel(parity, p).qubit_unitary()
    assert gates.phase_equivalent(u, gates.parity_gate(parity, spec).unitary, tol=1e-9)


def test_effective_propagator_unitary():
    p = model.TargetPulse(omega_f=mhz(0.5069), alpha=0.529)
    eff = effective.EffectiveModel("even", p)
    u = eff.propagator(2.0)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(10), atol=1e-12)


def test_effective_embed_restrict():
    eff = effective.EffectiveModel("odd", model.TargetPulse(omega_f=1.0, alpha=0.5))
    v = np.arange(10) + 1j
    np.testing.assert_array_equal(eff.restrict(eff.embed(v)), v)
    assert len(set(eff.labels)) == 10


def test_hierarchy_ratios():
    cfg = model.SystemConfig()
    r = effective.hierarchy_ratios(cfg, model.TargetPulse(omega_f=mhz(0.5069), alpha=0.529))
    assert r["delta_over_omega_c"] == pytest.approx(86.0 / 3.533)
    assert r["omega_c_over_omega_f"] > 1
