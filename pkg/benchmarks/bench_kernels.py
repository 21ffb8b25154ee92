"""Compare the compiled and pure-Python RK4 kernels on the gate Hamiltonian.

    python benchmarks/bench_kernels.py --tau 0.05 --repeats 3
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from rydparity import dynamics, gates, kernels, model
from rydparity.model import mhz


def timed(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> dict:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tau", type=float, default=0.05, help="simulated window (us)")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--skip-lindblad", action="store_true")
    args = ap.parse_args(argv)

    if not kernels.compiled_available():
        raise SystemExit("compiled kernels are not built; run pip install -e . first")

    cfg = model.SystemConfig(omega_c=mhz(3.533))
    pulse = model.TargetPulse(omega_f=mhz(0.5069), alpha=0.529)
    terms = model.hamiltonian_terms(cfg, pulse)
    grid = dynamics.TimeGrid.for_norm(args.tau, terms.norm_bound())
    psi0 = gates.initial_state()
    rho0 = np.outer(psi0, psi0.conj())
    decay = dynamics.DecayModel()

    results = {"steps": grid.n_steps, "dt": grid.dt}
    for name in ("cython", "python"):
        results[f"schrodinger_{name}_s"] = timed(
            lambda: dynamics.evolve_schrodinger(terms, psi0, grid, backend=name), args.repeats)
        if not args.skip_lindblad:
            results[f"lindblad_{name}_s"] = timed(
                lambda: dynamics.evolve_lindblad(terms, rho0, decay, grid, backend=name),
                max(1, args.repeats - 2))

    a = dynamics.evolve_schrodinger(terms, psi0, grid, backend="cython").final
    b = dynamics.evolve_schrodinger(terms, psi0, grid, backend="python").final
    results["max_state_difference"] = float(np.max(np.abs(a - b)))
    results["schrodinger_speedup"] = results["schrodinger_python_s"] / results["schrodinger_cython_s"]
    if not args.skip_lindblad:
        results["lindblad_speedup"] = results["lindblad_python_s"] / results["lindblad_cython_s"]
    print(json.dumps(results, indent=2))
    return results


if __name__ == "__main__":
    main()
