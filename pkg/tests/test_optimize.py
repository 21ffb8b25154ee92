import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rydparity import gates, model, optimize
from rydparity.model import mhz

BOX = ((-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0))


def quadratic(centre):
    c = np.asarray(centre)
    return lambda x: float(np.sum((np.asarray(x) - c) ** 2))


@settings(max_examples=10, deadline=None)
@given(st.tuples(*[st.floats(-1.5, 1.5)] * 3))
def test_nelder_mead_finds_interior_minimum(centre):
    res = optimize.nelder_mead(quadratic(centre), BOX, (0.0, 0.0, 0.0), max_evals=600,
                               xtol=1e-6, step=0.1)
    np.testing.assert_allclose(res.x, centre, atol=1e-3)


def test_minimum_on_boundary_is_reached_by_clipping():
    res = optimize.nelder_mead(quadratic((3.0, 0.0, 0.0)), BOX, (0.0, 0.0, 0.0),
                               max_evals=600, xtol=1e-7, step=0.1)
    assert res.x[0] == pytest.approx(2.0, abs=1e-4)
    assert all(lo <= v <= hi for v, (lo, hi) in zip(res.x, BOX))


def test_budget_is_respected():
    res = optimize.nelder_mead(lambda x: float(np.sum(np.cos(5 * np.asarray(x)))), BOX,
                               (0.1, 0.2, 0.3), max_evals=17, xtol=1e-12)
    assert res.evaluations == 17
    assert not res.converged
    assert res.message == "evaluation budget exhausted"
    assert len(res.trace) == 17


def test_best_cost_trace_is_monotone():
    res = optimize.nelder_mead(quadratic((0.5, -0.5, 1.0)), BOX, (0.0, 0.0, 0.0),
                               max_evals=200)
    best = [t["best_cost"] for t in res.trace]
    assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    assert res.cost == best[-1]


def test_start_point_never_worse():
    f = quadratic((0.3, 0.3, 0.3))
    res = optimize.nelder_mead(f, BOX, (0.3, 0.3, 0.31), max_evals=30)
    assert res.cost <= f((0.3, 0.3, 0.31)) * (1 + 1e-9)


def test_problem_validation():
    cfg = model.SystemConfig()
    with pytest.raises(ValueError, match="outside bounds"):
        optimize.OptimizationProblem(cfg, gates.PE_X, start=(mhz(20.0), mhz(0.5), 0.5))
    with pytest.raises(ValueError, match="noise spec"):
        optimize.OptimizationProblem(cfg, gates.PE_X, start=(mhz(4.0), mhz(0.5), 0.5),
                                     objective="ensemble")
    with pytest.raises(ValueError):
        optimize.OptimizationProblem(cfg, gates.PE_X, start=(mhz(4.0), mhz(0.5), 0.5),
                                     objective="robust")


def test_build_keeps_fixed_parameters():
    cfg = model.SystemConfig(parity="odd")
    prob = optimize.OptimizationProblem(cfg, gates.PO_SQRT_X, start=(mhz(2.0), mhz(0.4), 0.7))
    c, p = prob.build((mhz(2.5), mhz(0.3), 0.8))
    assert (c.delta, c.d, c.tau, c.parity) == (cfg.delta, cfg.d, cfg.tau, "odd")
    assert c.omega_c == mhz(2.5) and p.omega_f == mhz(0.3) and p.alpha == 0.8
    assert p.gamma == gates.PO_SQRT_X.gamma


def test_cost_rejects_out_of_bounds():
    prob = optimize.OptimizationProblem(model.SystemConfig(), gates.PE_X,
                                        start=(mhz(4.0), mhz(0.5), 0.5))
    with pytest.raises(ValueError):
        optimize.cost((mhz(50.0), mhz(0.5), 0.5), prob)
