"""Command-line front end: ``rydparity <subcommand> [--config PATH] ...``.

Each subcommand writes CSV and JSON into ``--out`` plus a gnuplot script for
the curves, and prints one summary line.  Every artifact carries the hash of
the run manifest, and no artifact contains timestamps or thread counts, so a
rerun with the same manifest reproduces the files byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, codes, config as cfgmod, dynamics, effective, gates, hilbert
from . import model, noise, optimize

log = logging.getLogger("rydparity")

OUTPUT_SCHEMA = 1
THREADS_ENV = "RYDPARITY_THREADS"
SUBCOMMANDS = ("simulate", "ensemble", "decay", "validate-effective", "optimize", "codes")


def git_blob_sha1(data: bytes) -> str:
    """Content hash computed the way ``git hash-object`` does."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    config_path: str
    subcommand: str
    seed: int | None
    output_dir: str
    config_hash: str
    tool_version: str
    overrides: tuple[tuple[str, str], ...] = ()

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["overrides"] = {k: v for k, v in self.overrides}
        return d

    @property
    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha1(text.encode()).hexdigest()


# output helpers -------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class Writer:
    def __init__(self, out: Path, manifest: RunManifest):
        self.out = out
        self.manifest = manifest
        out.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self.out / name
        with open(path, "w", newline="\n") as fh:
            fh.write(f"# rydparity output schema {OUTPUT_SCHEMA}; manifest {self.manifest.digest}\n")
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        return path

    def json(self, name: str, payload: dict) -> Path:
        body = {"schema": OUTPUT_SCHEMA, "manifest": self.manifest.to_dict(),
                "manifest_hash": self.manifest.digest, **payload}
        path = self.out / name
        path.write_text(json.dumps(_plain(body), indent=2, sort_keys=True) + "\n")
        return path

    def gnuplot(self, name: str, data: str, title: str, xlabel: str, ylabel: str,
                columns: list[tuple[int, int, str]]) -> Path:
        plots = ", \\\n     ".join(
            f"'{data}' using {x}:{y} with lines title '{t}'" for x, y, t in columns)
        text = (f"# manifest {self.manifest.digest}\n"
                "set datafile separator ','\n"
                "set datafile commentschars '#'\n"
                "set key autotitle columnhead\n"
                f"set title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"
                f"set terminal pngcairo size 900,600\nset output '{Path(name).stem}.png'\n"
                f"plot {plots}\n")
        path = self.out / name
        path.write_text(text)
        return path


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


# subcommands ----------------------------------------------------------------

def _target(rc: cfgmod.RunConfig, system: model.SystemConfig) -> np.ndarray:
    gate = gates.parity_gate(system.parity, rc.rotation())
    return gate.target_state(gates.initial_qubit_state())


def _grid(rc, terms) -> dynamics.TimeGrid:
    integ = rc.integrator
    return dynamics.TimeGrid.for_norm(rc.raw["system"]["tau_us"], terms.norm_bound(),
                                      integ["max_product"], samples=integ["samples"])


def cmd_simulate(rc, args, w: Writer) -> tuple[dict, str]:
    system, pulse = rc.system(), rc.pulse()
    terms = model.hamiltonian_terms(system, pulse)
    grid = _grid(rc, terms)
    tr = dynamics.evolve_schrodinger(terms, gates.initial_state(), grid,
                                     target=_target(rc, system),
                                     max_product=rc.integrator["max_product"],
                                     backend=rc.integrator["backend"])
    comp = hilbert.computational_indices()
    names = [hilbert.label_string(int(i)) for i in comp]
    ryd = np.zeros(hilbert.DIM, bool)
    for atom in range(hilbert.N_ATOMS):
        for lev in hilbert.RYDBERG:
            ryd |= hilbert.atom_levels_mask(atom, lev)
    rows = []
    for k, t in enumerate(tr.times):
        p = tr.populations[k]
        rows.append([t, tr.fidelity[k], *p[comp], p[ryd].sum()])
    w.csv("trajectory.csv", ["t_us", "fidelity", *[f"P_{n}" for n in names], "P_rydberg"], rows)
    w.gnuplot("trajectory.gp", "trajectory.csv", "gate dynamics", "t (us)", "population",
              [(1, 2, "fidelity")] + [(1, 3 + i, f"P_{n}") for i, n in enumerate(names)])
    summary = {"fidelity": float(tr.fidelity[-1]), "norm_drift": tr.norm_drift, "dt": tr.dt,
               "n_steps": grid.n_steps, "pulse_area": pulse.area(), "parity": system.parity}
    w.json("summary.json", summary)
    return summary, f"simulate: fidelity={summary['fidelity']:.6f} norm_drift={tr.norm_drift:.2e}"


def cmd_ensemble(rc, args, w: Writer) -> tuple[dict, str]:
    system, pulse, spec = rc.system(), rc.pulse(), rc.noise_spec()
    res = noise.ensemble_average(system, pulse, spec, rc.rotation(), rc.decay(),
                                 threads=args.threads, keep_curves=args.curves,
                                 max_product=rc.integrator["max_product"],
                                 samples=rc.integrator["samples"],
                                 backend=rc.integrator["backend"])
    w.csv("shots.csv", ["shot", "digest", "fidelity"],
          [[s.index, s.digest, s.fidelity] for s in res.shots])
    if args.curves:
        rows = []
        for s in res.shots:
            if s.curve is None:
                continue
            rows += [[s.index, t, f] for t, f in zip(s.times, s.curve)]
        w.csv("curves.csv", ["shot", "t_us", "fidelity"], rows)
    w.gnuplot("shots.gp", "shots.csv", "per-shot endpoint fidelity", "shot", "fidelity",
              [(1, 3, "fidelity")])
    summary = {**res.summary(), "channels": sorted(rc.raw["noise"]["channels"]),
               "decay": rc.raw["decay"]["enabled"], "parity": system.parity}
    w.json("summary.json", summary)
    return summary, (f"ensemble: mean={res.mean:.6f} std={res.std:.6f} "
                     f"shots={res.fidelities.size}")


def cmd_decay(rc, args, w: Writer) -> tuple[dict, str]:
    system, pulse = rc.system(), rc.pulse()
    terms = model.hamiltonian_terms(system, pulse)
    grid = _grid(rc, terms)
    target = _target(rc, system)
    psi0 = gates.initial_state()
    kw = dict(max_product=rc.integrator["max_product"], backend=rc.integrator["backend"])
    with_decay = dynamics.evolve_lindblad(terms, np.outer(psi0, psi0.conj()), rc.decay_model(),
                                          grid, target=target, **kw)
    without = dynamics.evolve_schrodinger(terms, psi0, grid, target=target, **kw)
    m_mask = np.zeros(hilbert.DIM, bool)
    for atom in range(hilbert.N_ATOMS):
        m_mask |= hilbert.atom_levels_mask(atom, hilbert.Level.m)
    rows = [[t, fd, fn, with_decay.populations[k][m_mask].sum()]
            for k, (t, fd, fn) in enumerate(zip(with_decay.times, with_decay.fidelity,
                                                without.fidelity))]
    w.csv("decay.csv", ["t_us", "fidelity_decay", "fidelity_no_decay", "P_leaked_m"], rows)
    w.gnuplot("decay.gp", "decay.csv", "fidelity with and without decay", "t (us)",
              "fidelity", [(1, 2, "with decay"), (1, 3, "without decay")])
    summary = {"fidelity_decay": float(with_decay.fidelity[-1]),
               "fidelity_no_decay": float(without.fidelity[-1]),
               "trace_drift": with_decay.trace_drift,
               "min_eigenvalue": with_decay.min_eigenvalue, "parity": system.parity}
    w.json("summary.json", summary)
    return summary, (f"decay: with={summary['fidelity_decay']:.6f} "
                     f"without={summary['fidelity_no_decay']:.6f}")


def spectra_check(n_triples: int, seed: int) -> dict:
    """Analytic versus numeric spectra over random (J, J12, Omega_c) triples."""
    rng = np.random.default_rng(seed)
    worst_value, worst_residual, e1_err, lam_err = 0.0, 0.0, 0.0, 0.0
    for _ in range(n_triples):
        j = model.mhz(rng.uniform(20.0, 150.0))
        j12 = model.mhz(rng.uniform(0.1, 10.0))
        oc = model.mhz(rng.uniform(0.5, 10.0))
        for row in effective.spectral_report(j, j12, oc):
            gap = np.max(np.abs(np.sort(row["analytic_eigenvalues"])
                                - np.sort(row["numeric_eigenvalues"])))
            worst_value = max(worst_value, float(gap))
            worst_residual = max(worst_residual, row["max_eigen_residual"])
        spec = effective.dd_block_spectrum(j, j12, effective.BLOCK_IDS[0])
        e1_err = max(e1_err, abs(float(spec.eigenvalues[0]) + j12))
        _, lm, lp, _ = effective.omega_c_block_spectrum(oc)
        lam_err = max(lam_err, abs(lp - math.sqrt(2) * oc), abs(lm + math.sqrt(2) * oc))
    return {"triples": n_triples, "seed": seed, "max_eigenvalue_gap": worst_value,
            "max_eigenvector_residual": worst_residual, "e1_plus_j12": e1_err,
            "lambda_error": lam_err}


def vdw_table(system: model.SystemConfig) -> dict:
    geo = model.geometry_from_displacements(system)
    out = {}
    for name, table in (("D", geo.v_d), ("P", geo.v_p)):
        out[f"V13_{name}_mhz"] = table[(0, 2)] / model.TWO_PI
        out[f"V12_{name}_mhz"] = table[(0, 1)] / model.TWO_PI
    out["J13_mhz"] = geo.j[(0, 2)] / model.TWO_PI
    out["J12_mhz"] = geo.j[(0, 1)] / model.TWO_PI
    return out


def cmd_validate(rc, args, w: Writer) -> tuple[dict, str]:
    v = rc.raw["validate"]
    system, pulse = rc.system(), rc.pulse()
    summary: dict = {"parity": system.parity}
    parts = []
    if v["spectra"]:
        summary["spectra"] = spectra_check(v["random_triples"], v["seed"])
        parts.append(f"spectra_residual={summary['spectra']['max_eigenvector_residual']:.1e}")
    if v["vdw_table"]:
        summary["vdw"] = vdw_table(system)
        parts.append(f"V13_D={summary['vdw']['V13_D_mhz']:.5g}MHz")
    if v["dynamics"]:
        terms = model.hamiltonian_terms(system, pulse)
        rep = effective.compare_dynamics(system, pulse, gate=rc.rotation(),
                                         grid=_grid(rc, terms),
                                         backend=rc.integrator["backend"])
        summary["dynamics"] = rep.to_dict()
        w.csv("effective.csv", ["t_us", "fidelity_full", "fidelity_effective"],
              zip(rep.times, rep.fidelity_original, rep.fidelity_effective))
        w.gnuplot("effective.gp", "effective.csv", "full versus effective model", "t (us)",
                  "fidelity", [(1, 2, "full"), (1, 3, "effective")])
        parts.append(f"endpoint_gap={rep.endpoint_gap:.4f}")
    w.json("report.json", summary)
    return summary, "validate-effective: " + " ".join(parts)


def cmd_optimize(rc, args, w: Writer) -> tuple[dict, str]:
    o = rc.raw["optimize"]
    problem = optimize.OptimizationProblem(
        config=rc.system(), gate=rc.rotation(), start=rc.optimization_start(),
        objective=o["objective"],
        noise_spec=rc.noise_spec() if o["objective"] == "ensemble" else None,
        decay=rc.decay(), max_product=rc.integrator["max_product"])
    start_cost = optimize.cost(problem.start, problem)
    res = optimize.minimize(problem, max_evals=o["max_evals"], xtol=o["xtol"], step=o["step"],
                            restarts=o["restarts"], seed=o["seed"])
    scale = rc.scale
    w.csv("trace.csv", ["evaluation", "omega_c_mhz", "omega_f_mhz", "alpha", "cost",
                        "best_cost"],
          [[t["evaluation"], t["x"][0] / scale, t["x"][1] / scale, t["x"][2], t["cost"],
            t["best_cost"]] for t in res.trace])
    w.gnuplot("trace.gp", "trace.csv", "optimizer convergence", "evaluation", "cost",
              [(1, 6, "best cost")])
    summary = {"start_cost": start_cost, "cost": res.cost, "evaluations": res.evaluations,
               "converged": res.converged, "message": res.message,
               "omega_c_mhz": res.x[0] / scale, "omega_f_mhz": res.x[1] / scale,
               "alpha": res.x[2]}
    w.json("summary.json", summary)
    return summary, f"optimize: cost={res.cost:.6e} (start {start_cost:.6e}) evals={res.evaluations}"


def cmd_codes(rc, args, w: Writer) -> tuple[dict, str]:
    c = rc.raw["codes"]
    errors = args.error or c["errors"]
    rows = []
    if c["scheme"] == "repetition":
        a, b = c["amplitudes"]
        norm = math.hypot(a, b)
        for rec in codes.repetition_table(errors, a / norm, b / norm):
            rows.append([rec.label, "Z1Z2Z3-parity", rec.syndrome, rec.probability_one,
                         rec.deterministic])
    else:
        layout = codes.Layout.load(c["layout"])
        data = layout.codespace_state(1)
        for err in errors:
            reg = codes.register_with_ancilla(data, layout.n_data)
            for rec in codes.xzzx_round(reg, err, layout):
                rows.append([err, rec.label, rec.syndrome, rec.probability_one,
                             rec.deterministic])
    w.csv("syndromes.csv", ["error", "check", "syndrome", "probability_one", "deterministic"],
          rows)
    table = [dict(zip(("error", "check", "syndrome", "probability_one", "deterministic"), r))
             for r in rows]
    summary = {"scheme": c["scheme"], "rows": table}
    w.json("summary.json", summary)
    flagged = sorted({r[0] for r in rows if r[2] == -1})
    line = "codes: " + "; ".join(
        f"{e} syndrome {'-1' if e in flagged else '+1'}" for e in dict.fromkeys(r[0] for r in rows))
    return summary, line


COMMANDS = {"simulate": cmd_simulate, "ensemble": cmd_ensemble, "decay": cmd_decay,
            "validate-effective": cmd_validate, "optimize": cmd_optimize, "codes": cmd_codes}


# argument handling ----------------------------------------------------------

def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise SystemExit(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return max(n, 1)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="override noise.seed")
    common.add_argument("--out", default="rydparity-out", help="output directory")
    common.add_argument("--shots", type=int, help="override noise.shots")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads for ensembles (default ${THREADS_ENV} or 1)")
    common.add_argument("--no-vdw", action="store_true", help="drop van der Waals shifts")
    common.add_argument("--no-stark", action="store_true", help="drop Stark compensation")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rydparity",
                                     description="Parity-controlled Rydberg gate simulator.")
    parser.add_argument("--version", action="version", version=f"rydparity {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="single noiseless trajectory")
    ens = sub.add_parser("ensemble", parents=[common], help="quasi-static noise ensemble")
    ens.add_argument("--curves", action="store_true", help="also write per-shot curves")
    sub.add_parser("decay", parents=[common], help="Lindblad run with and without decay")
    sub.add_parser("validate-effective", parents=[common], help="effective-model report")
    sub.add_parser("optimize", parents=[common], help="Nelder-Mead pulse optimization")
    cd = sub.add_parser("codes", parents=[common], help="syndrome extraction tables")
    cd.add_argument("--error", action="append",
                    help="Pauli error such as X2 or Z1X5 (repeatable)")
    return parser


def _apply_overrides(raw: dict, args) -> list[tuple[str, str]]:
    done = []
    if args.seed is not None:
        raw.setdefault("noise", {})["seed"] = args.seed
        raw.setdefault("optimize", {})["seed"] = args.seed
        done.append(("seed", str(args.seed)))
    if args.shots is not None:
        raw.setdefault("noise", {})["shots"] = args.shots
        done.append(("shots", str(args.shots)))
    if args.no_vdw:
        raw.setdefault("system", {})["vdw"] = False
        done.append(("vdw", "false"))
    if args.no_stark:
        raw.setdefault("system", {})["stark_compensation"] = False
        done.append(("stark_compensation", "false"))
    if getattr(args, "error", None):
        done.append(("errors", ",".join(args.error)))
    return done


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None:
        args.threads = default_threads()
    if args.threads < 1:
        parser.error("--threads must be at least 1")

    try:
        if args.config:
            data = Path(args.config).read_bytes()
            try:
                raw = json.loads(data)
            except json.JSONDecodeError as exc:
                raise cfgmod.ConfigError(f"{args.config}: not valid JSON ({exc})") from None
            if not isinstance(raw, dict):
                raise cfgmod.ConfigError(f"{args.config}: top level must be an object")
        else:
            raw = {"schema_version": cfgmod.SCHEMA_VERSION}
            data = json.dumps(raw, sort_keys=True).encode()
        overrides = _apply_overrides(raw, args)
        rc = cfgmod.from_dict(raw)
    except (cfgmod.ConfigError, OSError) as exc:
        print(f"rydparity: {exc}", file=sys.stderr)
        return 2

    seed = rc.raw["noise"]["seed"] if args.command in ("ensemble", "optimize") else args.seed
    manifest = RunManifest(config_path=str(args.config or "<defaults>"),
                           subcommand=args.command, seed=seed, output_dir=str(args.out),
                           config_hash=git_blob_sha1(data), tool_version=__version__,
                           overrides=tuple(overrides))
    writer = Writer(Path(args.out), manifest)
    try:
        _, line = COMMANDS[args.command](rc, args, writer)
    except (dynamics.IntegrationError, dynamics.StabilityError) as exc:
        print(f"rydparity: {args.command} failed: {exc}", file=sys.stderr)
        return 3
    print(f"{line} [manifest {manifest.digest[:12]}]")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
