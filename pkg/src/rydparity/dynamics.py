"""Fixed-step RK4 integration of the Schrodinger and Lindblad equations."""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
import numpy as np

from . import hilbert, kernels
from .hilbert import Level
from .model import HamiltonianTerms

DEFAULT_MAX_PRODUCT = 0.05
DEFAULT_DT_MAX = 2e-4  # us


class StabilityError(ValueError):
    """Requested step violates dt * max||H|| <= max_product."""

    def __init__(self, dt, norm, max_product):
        self.required_dt = max_product / norm
        super().__init__(
            f"dt = {dt:.3e} us gives dt*||H|| = {dt * norm:.3g} > {max_product}; "
            f"use dt <= {self.required_dt:.3e} us")


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DecayModel:
    """Spontaneous emission from |D>, |P> of every atom into {|0>, |1>, |m>}."""

    gamma_d: float = 1.0 / 508.0
    gamma_p: float = 1.0 / 1140.0
    branching: tuple[float, float, float] = (1 / 8, 1 / 8, 3 / 4)  # to (0, 1, m)

    def __post_init__(self):
        if self.gamma_d < 0 or self.gamma_p < 0:
            raise ValueError("decay rates must be non-negative")
        if any(b < 0 for b in self.branching) or not np.isclose(sum(self.branching), 1.0):
            raise ValueError("branching ratios must be non-negative and sum to 1")

    @classmethod
    def none(cls) -> "DecayModel":
        return cls(0.0, 0.0)

    def jumps(self) -> list[tuple[float, int, Level, Level]]:
        """(rate, atom, to, from) for all 18 channels; L = sqrt(rate) |to><from|."""
        out = []
        for atom in range(hilbert.N_ATOMS):
            for frm, gamma in ((Level.D, self.gamma_d), (Level.P, self.gamma_p)):
                for to, b in zip((Level.g0, Level.g1, Level.m), self.branching):
                    out.append((b * gamma, atom, to, frm))
        return out

    def jump_operators(self) -> list[np.ndarray]:
        return [np.sqrt(r) * hilbert.embed(hilbert.transition(to, frm), atom)
                for r, atom, to, frm in self.jumps()]

    def loss_diagonal(self) -> np.ndarray:
        """Diagonal of sum_j L_j^dagger L_j."""
        g = np.zeros(hilbert.DIM)
        for r, atom, _, frm in self.jumps():
            g[hilbert.atom_levels_mask(atom, frm)] += r
        return g


@dataclass(frozen=True)
class TimeGrid:
    tau: float
    n_steps: int
    stride: int = 1

    def __post_init__(self):
        if self.tau <= 0 or self.n_steps < 1 or self.stride < 1:
            raise ValueError("TimeGrid needs tau > 0, n_steps >= 1, stride >= 1")

    @property
    def dt(self) -> float:
        return self.tau / self.n_steps

    @classmethod
    def for_norm(cls, tau: float, norm: float, max_product: float = DEFAULT_MAX_PRODUCT,
                 dt_max: float = DEFAULT_DT_MAX, samples: int = 200) -> "TimeGrid":
        dt = dt_max if norm <= 0 else min(dt_max, max_product / norm)
        n = int(math.ceil(tau / dt - 1e-9))
        return cls(tau, n, max(1, n // max(samples, 1)))

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.tau, self.n_steps * factor, self.stride * factor)

    def sample_steps(self) -> np.ndarray:
        steps = list(range(0, self.n_steps, self.stride))
        steps.append(self.n_steps)
        return np.array(steps)

    def sample_times(self) -> np.ndarray:
        return self.sample_steps() * self.dt

    def stage_times(self) -> np.ndarray:
        return np.linspace(0.0, self.tau, 2 * self.n_steps + 1)


@dataclass
class Trajectory:
    times: np.ndarray
    populations: np.ndarray  # (samples, 125)
    fidelity: np.ndarray | None
    final: np.ndarray
    states: np.ndarray | None = None
    norm_drift: float = 0.0
    trace_drift: float = 0.0
    min_eigenvalue: float = 0.0
    dt: float = 0.0
    diagnostics: dict = field(default_factory=dict)


def _as_terms(hamiltonian, tau) -> HamiltonianTerms:
    if isinstance(hamiltonian, HamiltonianTerms):
        return hamiltonian
    h = np.asarray(hamiltonian, dtype=complex)
    if h.ndim != 2:
        raise TypeError("hamiltonian must be HamiltonianTerms or a constant matrix")
    return HamiltonianTerms(static=h, channels=[], tau=tau)


def _kernel_args(terms: HamiltonianTerms, grid: TimeGrid, static: np.ndarray):
    arrays = terms.sparse_arrays(static)
    coeffs = np.ascontiguousarray(terms.coefficient_table(grid.stage_times()))
    if coeffs.shape[1] == 0:
        coeffs = np.zeros((2 * grid.n_steps + 1, 1), dtype=complex)
    intp = lambda a: np.ascontiguousarray(a, dtype=np.intp)
    return (intp(arrays["indptr"]), intp(arrays["indices"]), arrays["data"],
            intp(arrays["ch_rows"]), intp(arrays["ch_cols"]),
            np.ascontiguousarray(arrays["ch_vals"]), intp(arrays["ch_ids"]), coeffs)


def check_stability(terms: HamiltonianTerms, grid: TimeGrid,
                    max_product: float = DEFAULT_MAX_PRODUCT) -> float:
    norm = terms.norm_bound()
    if grid.dt * norm > max_product * (1 + 1e-12):
        raise StabilityError(grid.dt, norm, max_product)
    return norm


def evolve_schrodinger(hamiltonian, psi0: np.ndarray, grid: TimeGrid, *,
                       target: np.ndarray | None = None, keep_states: bool = False,
                       max_product: float = DEFAULT_MAX_PRODUCT, backend: str | None = None,
                       norm_tolerance: float = 1e-8) -> Trajectory:
    """Integrate i dpsi/dt = H(t) psi with classical RK4 on a fixed grid.

    No renormalization is applied; the largest norm deviation over the samples
    is reported as ``norm_drift``.
    """
    terms = _as_terms(hamiltonian, grid.tau)
    psi = np.array(psi0, dtype=complex)
    if not np.isclose(np.vdot(psi, psi).real, 1.0, atol=1e-10):
        raise ValueError("initial state is not normalized")
    check_stability(terms, grid, max_product)
    kern = kernels.get_backend(backend)
    args = _kernel_args(terms, grid, terms.static)
    steps = grid.sample_steps()
    pops, fids, states, drift = [], [], [], 0.0

    def record():
        nonlocal drift
        pops.append(np.abs(psi) ** 2)
        drift = max(drift, abs(np.vdot(psi, psi).real - 1.0))
        if target is not None:
            fids.append(abs(np.vdot(target, psi)) ** 2)
        if keep_states:
            states.append(psi.copy())

    record()
    for a, b in zip(steps[:-1], steps[1:]):
        kern.rk4_schrodinger(*args, psi, grid.dt, int(a), int(b - a))
        if not np.all(np.isfinite(psi)):
            raise IntegrationError(f"non-finite state at step {b}")
        record()
    if drift > norm_tolerance:
        warnings.warn(f"norm drift {drift:.2e} exceeds {norm_tolerance:.0e}", RuntimeWarning)
    return Trajectory(times=steps * grid.dt, populations=np.array(pops),
                      fidelity=np.array(fids) if target is not None else None,
                      final=psi, states=np.array(states) if keep_states else None,
                      norm_drift=drift, dt=grid.dt)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def coherence_blocks(pattern: np.ndarray, rho0: np.ndarray,
                     jumps: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Block label per basis index such that rho(t) stays block-diagonal.

    Merges indices linked by the Hamiltonian pattern or by the support of
    ``rho0``, then closes the partition under every jump map.
    """
    n = pattern.shape[0]
    uf = _UnionFind(n)
    for a, b in zip(*np.nonzero(pattern | pattern.T)):
        uf.union(int(a), int(b))
    for a, b in zip(*np.nonzero(np.abs(rho0) > 0)):
        uf.union(int(a), int(b))
    changed = True
    while changed:
        changed = False
        for src, dst in jumps:
            roots = [uf.find(int(s)) for s in src]
            first = {}
            for r, d in zip(roots, dst):
                if r in first:
                    changed |= uf.union(first[r], int(d))
                else:
                    first[r] = int(d)
    roots = np.array([uf.find(a) for a in range(n)])
    _, labels = np.unique(roots, return_inverse=True)
    return labels.astype(np.intp)


def evolve_lindblad(hamiltonian, rho0: np.ndarray, decay: DecayModel, grid: TimeGrid, *,
                    target: np.ndarray | None = None, watch: dict | None = None,
                    max_product: float = DEFAULT_MAX_PRODUCT, backend: str | None = None,
                    trace_tolerance: float = 1e-8, positivity_tolerance: float = 1e-6,
                    keep_states: bool = False) -> Trajectory:
    """Integrate d rho/dt = -i[H, rho] + sum_j D[L_j] rho as a matrix ODE.

    The generator is split as -i(H_eff rho) + h.c. + sum_j L_j rho L_j^dagger with
    H_eff = H - i/2 sum_j L_j^dagger L_j.  Work is restricted to the blocks of
    :func:`coherence_blocks`; entries outside them are identically zero.
    """
    terms = _as_terms(hamiltonian, grid.tau)
    rho = np.array(rho0, dtype=complex)
    if not np.isclose(np.trace(rho).real, 1.0, atol=1e-10):
        raise ValueError("initial density matrix must have unit trace")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("initial density matrix must be Hermitian")
    check_stability(terms, grid, max_product)
    kern = kernels.get_backend(backend)

    static = terms.static - 0.5j * np.diag(decay.loss_diagonal())

    jump_maps = []
    rates = []
    for r, atom, to, frm in decay.jumps():
        if r == 0:
            continue
        src = np.nonzero(hilbert.atom_levels_mask(atom, frm))[0]
        jump_maps.append((src, hilbert.replace_level(src, atom, to)))
        rates.append(r)

    pattern = static != 0
    for ch in terms.channels:
        pattern = pattern | (ch.op != 0)
    labels = coherence_blocks(pattern, rho, jump_maps)

    # Reorder the basis so each block is a contiguous index range.
    perm = np.argsort(labels, kind="stable")
    inv = np.argsort(perm)
    sub = np.ix_(perm, perm)
    permuted = HamiltonianTerms(
        static=static[sub],
        channels=[dataclasses.replace(ch, op=ch.op[sub]) for ch in terms.channels],
        tau=terms.tau)
    args = _kernel_args(permuted, grid, permuted.static)
    blk_of = np.ascontiguousarray(labels[perm], dtype=np.intp)
    counts = np.bincount(labels)
    blk_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.intp)

    j_ptr = np.concatenate([[0], np.cumsum([len(s) for s, _ in jump_maps])]).astype(np.intp)
    j_src = np.concatenate([inv[s] for s, _ in jump_maps]).astype(np.intp) if jump_maps \
        else np.zeros(0, np.intp)
    j_dst = np.concatenate([inv[d] for _, d in jump_maps]).astype(np.intp) if jump_maps \
        else np.zeros(0, np.intp)
    j_rate = np.array(rates, dtype=float)

    rho_p = np.ascontiguousarray(rho[sub])
    back = np.ix_(inv, inv)
    target_p = None if target is None else np.asarray(target, dtype=complex)[perm]
    watch = {name: np.asarray(vec, dtype=complex)[perm] for name, vec in (watch or {}).items()}

    steps = grid.sample_steps()
    pops, fids, states, min_eigs, traces = [], [], [], [], []
    watched = {name: [] for name in watch}

    def record():
        pops.append(np.real(np.diagonal(rho_p))[inv].copy())
        traces.append(np.trace(rho_p).real)
        min_eigs.append(float(np.linalg.eigvalsh(rho_p)[0]))
        if target_p is not None:
            fids.append(float(np.real(np.vdot(target_p, rho_p @ target_p))))
        for name, vec in watch.items():
            watched[name].append(float(np.real(np.vdot(vec, rho_p @ vec))))
        if keep_states:
            states.append(rho_p[back])

    record()
    for a, b in zip(steps[:-1], steps[1:]):
        kern.rk4_lindblad(*args, blk_ptr, blk_of, j_rate, j_ptr, j_src, j_dst,
                          rho_p, grid.dt, int(a), int(b - a))
        if not np.all(np.isfinite(rho_p)):
            raise IntegrationError(f"non-finite density matrix at step {b}")
        record()
        drift = abs(traces[-1] - 1.0)
        if drift > trace_tolerance:
            raise IntegrationError(
                f"trace drift {drift:.2e} exceeds {trace_tolerance:.0e} at t = {b * grid.dt:.4f} us")
    rho = rho_p[back]
    min_eig = min(min_eigs)
    if min_eig < -positivity_tolerance:
        warnings.warn(f"density matrix eigenvalue {min_eig:.2e} below "
                      f"-{positivity_tolerance:.0e}", RuntimeWarning)
    return Trajectory(times=steps * grid.dt, populations=np.array(pops),
                      fidelity=np.array(fids) if target is not None else None,
                      final=rho, states=np.array(states) if keep_states else None,
                      trace_drift=float(np.max(np.abs(np.array(traces) - 1.0))),
                      min_eigenvalue=min_eig, dt=grid.dt,
                      diagnostics={"watch": {k: np.array(v) for k, v in watched.items()},
                                   "block_sizes": counts.tolist()})
