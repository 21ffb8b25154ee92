"""Bounded Nelder-Mead search over (Omega_c, Omega_f, alpha)."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dynamics, gates, model, noise
from .model import mhz

log = logging.getLogger(__name__)

PARAMETERS = ("omega_c", "omega_f", "alpha")
DEFAULT_BOUNDS = ((mhz(1.0), mhz(8.0)), (mhz(0.05), mhz(1.0)), (0.1, 100.0))


@dataclass
class OptimizationProblem:
    """Gate-infidelity minimisation with J, Delta and tau held fixed.

    ``objective`` is ``"deterministic"`` (1 - F of one noiseless run) or
    ``"ensemble"`` (1 - mean F over ``noise_spec`` with its seed frozen, so all
    candidates see the same draws).
    """

    config: model.SystemConfig
    gate: gates.RotationSpec
    start: tuple[float, float, float]
    bounds: tuple[tuple[float, float], ...] = DEFAULT_BOUNDS
    objective: str = "deterministic"
    noise_spec: noise.NoiseSpec | None = None
    decay: dynamics.DecayModel | None = None
    max_product: float = dynamics.DEFAULT_MAX_PRODUCT

    def __post_init__(self):
        if self.objective not in ("deterministic", "ensemble"):
            raise ValueError("objective must be 'deterministic' or 'ensemble'")
        if self.objective == "ensemble" and self.noise_spec is None:
            raise ValueError("ensemble objective needs a noise spec")
        if len(self.bounds) != 3 or any(lo >= hi for lo, hi in self.bounds):
            raise ValueError("bounds must be three (low, high) pairs with low < high")
        if not self.in_bounds(self.start):
            raise ValueError(f"start point {self.start} outside bounds")

    def in_bounds(self, x) -> bool:
        return all(lo - 1e-12 <= v <= hi + 1e-12 for v, (lo, hi) in zip(x, self.bounds))

    def build(self, x) -> tuple[model.SystemConfig, model.TargetPulse]:
        oc, of, alpha = (float(v) for v in x)
        cfg = self.config.replace(omega_c=oc)
        pulse = model.TargetPulse(omega_f=of, alpha=alpha, tau=cfg.tau, gamma=self.gate.gamma,
                                  theta=self.gate.theta, phi=self.gate.phi)
        return cfg, pulse


@dataclass
class OptimizationResult:
    x: np.ndarray
    cost: float
    evaluations: int
    trace: list[dict] = field(default_factory=list)
    converged: bool = False
    restarts: int = 0
    message: str = ""


def cost(params, problem: OptimizationProblem) -> float:
    """1 - F (or 1 - mean F) at ``params``; integrator failure costs 1."""
    if not problem.in_bounds(params):
        raise ValueError(f"parameters {tuple(params)} outside bounds")
    cfg, pulse = problem.build(params)
    target = gates.parity_gate(cfg.parity, problem.gate).target_state(gates.initial_qubit_state())
    try:
        if problem.objective == "deterministic":
            tr = noise.run_shot(cfg, pulse, model.NoiseDraw.zero(), target, problem.decay,
                                problem.max_product)
            f = float(tr.fidelity[-1])
        else:
            res = noise.ensemble_average(cfg, pulse, problem.noise_spec, problem.gate,
                                         problem.decay, max_product=problem.max_product)
            f = res.mean
    except (dynamics.IntegrationError, dynamics.StabilityError) as exc:
        log.warning("evaluation at %s failed: %s", tuple(params), exc)
        return 1.0
    return float(min(max(1.0 - f, 0.0), 1.0))


def nelder_mead(fun: Callable[[np.ndarray], float], bounds, x0, *, max_evals: int = 500,
                xtol: float = 1e-4, step: float = 0.05, restarts: int = 2,
                seed: int = 0) -> OptimizationResult:
    """Nelder-Mead in coordinates scaled to the unit box, with clipping.

    Convergence is declared when every vertex lies within ``xtol`` (in scaled
    units) of the best one.  After convergence the search restarts from the
    best point with a fresh, randomly oriented simplex while budget remains;
    a restart that fails to improve ends the run.
    """
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    span = hi - lo
    dim = lo.size
    rng = np.random.default_rng(seed)
    cache: dict[tuple, float] = {}
    trace: list[dict] = []
    best = {"u": None, "f": math.inf}

    def to_x(u):
        return lo + np.clip(u, 0.0, 1.0) * span

    def f(u):
        u = np.clip(u, 0.0, 1.0)
        key = tuple(np.round(u, 14))
        if key in cache:
            return cache[key]
        if len(cache) >= max_evals:
            raise StopIteration
        x = to_x(u)
        val = float(fun(x))
        cache[key] = val
        if val < best["f"]:
            best["f"], best["u"] = val, u.copy()
        trace.append({"evaluation": len(cache), "x": x.tolist(), "cost": val,
                      "best_cost": best["f"]})
        return val

    def simplex_around(u0, directions):
        pts = [u0]
        for d in directions:
            p = u0 + step * d
            if np.any(p > 1.0) or np.any(p < 0.0):
                p = u0 - step * d
            pts.append(np.clip(p, 0.0, 1.0))
        return pts

    def run(simplex) -> bool:
        vals = [f(p) for p in simplex]
        while True:
            order = np.argsort(vals, kind="stable")
            simplex = [simplex[i] for i in order]
            vals = [vals[i] for i in order]
            if max(np.max(np.abs(p - simplex[0])) for p in simplex[1:]) < xtol:
                return True
            centroid = np.mean(simplex[:-1], axis=0)
            worst = simplex[-1]
            xr = np.clip(centroid + (centroid - worst), 0.0, 1.0)
            fr = f(xr)
            if fr < vals[0]:
                xe = np.clip(centroid + 2.0 * (centroid - worst), 0.0, 1.0)
                fe = f(xe)
                simplex[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
            elif fr < vals[-2]:
                simplex[-1], vals[-1] = xr, fr
            else:
                if fr < vals[-1]:
                    xc = np.clip(centroid + 0.5 * (xr - centroid), 0.0, 1.0)
                else:
                    xc = np.clip(centroid + 0.5 * (worst - centroid), 0.0, 1.0)
                fc = f(xc)
                if fc < min(fr, vals[-1]):
                    simplex[-1], vals[-1] = xc, fc
                else:
                    for i in range(1, len(simplex)):
                        simplex[i] = np.clip(simplex[0] + 0.5 * (simplex[i] - simplex[0]), 0, 1)
                        vals[i] = f(simplex[i])

    u0 = (np.asarray(x0, dtype=float) - lo) / span
    converged, n_restarts, message = False, 0, "evaluation budget exhausted"
    try:
        converged = run(simplex_around(u0, np.eye(dim)))
        message = "simplex converged"
        while n_restarts < restarts:
            before = best["f"]
            q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
            n_restarts += 1
            converged = run(simplex_around(best["u"].copy(), q.T))
            if best["f"] >= before - 1e-12:
                message = "restart brought no improvement"
                break
    except StopIteration:
        converged = False
        message = "evaluation budget exhausted"
    if best["u"] is None:
        raise RuntimeError("no evaluations were performed")
    return OptimizationResult(to_x(best["u"]), best["f"], len(cache), trace, converged,
                              n_restarts, message)


def minimize(problem: OptimizationProblem, *, max_evals: int = 500, xtol: float = 1e-4,
             step: float = 0.05, restarts: int = 2, seed: int = 0) -> OptimizationResult:
    result = nelder_mead(lambda x: cost(x, problem), problem.bounds, problem.start,
                         max_evals=max_evals, xtol=xtol, step=step, restarts=restarts,
                         seed=seed)
    if all(t["cost"] >= 1.0 for t in result.trace):
        result.message = "all evaluations penalized"
        result.converged = False
    return result


def with_objective(problem: OptimizationProblem, **changes) -> OptimizationProblem:
    return dataclasses.replace(problem, **changes)
