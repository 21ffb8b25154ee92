"""Exchange-split spectra, the Omega_c dressed block and the reduced gate model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import erf

from . import dynamics, gates, hilbert, model
from .hilbert import Level

BLOCK_IDS = ("1A", "1B", "2A", "2B", "2C")


@dataclass(frozen=True)
class BlockSpectrum:
    block_id: str
    basis: tuple[str, ...]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns


def block_basis(block_id: str, spectator: str = "0") -> tuple[str, ...]:
    """Basis labels (C1 C2 T3) of one exchange block; ``spectator`` fills Lambda."""
    if spectator not in ("0", "1"):
        raise ValueError("spectator level must be '0' or '1'")
    s = spectator
    table = {
        "1A": ("DPD", "PDD", "DDP"),
        "1B": ("DPP", "PDP", "PPD"),
        "2A": (f"D{s}P", f"P{s}D"),
        "2B": (f"{s}DP", f"{s}PD"),
        "2C": (f"DP{s}", f"PD{s}"),
    }
    try:
        return table[block_id]
    except KeyError:
        raise ValueError(f"unknown block id {block_id!r}; expected one of {BLOCK_IDS}") from None


def _three_level_pair(j: float, j12: float) -> tuple[np.ndarray, np.ndarray]:
    disc = math.sqrt(8 * j**2 + j12**2)
    e = np.array([-j12, 0.5 * (j12 - disc), 0.5 * (j12 + disc)])
    vecs = np.zeros((3, 3))
    vecs[:, 0] = np.array([-1.0, 1.0, 0.0]) / math.sqrt(2)
    for k in (1, 2):
        norm = math.sqrt(2 * e[k] ** 2 + 4 * j**2)
        vecs[:, k] = np.array([e[k], e[k], 2 * j]) / norm
    return e, vecs


def dd_block_spectrum(j: float, j12: float, block_id: str) -> BlockSpectrum:
    """Closed-form eigenpairs of one dipole-exchange block."""
    if not j > 0:
        raise ValueError("J must be positive")
    basis = block_basis(block_id)
    if block_id in ("1A", "1B"):
        e, v = _three_level_pair(j, j12)
    else:
        g = j12 if block_id == "2C" else j
        e = np.array([-g, g])
        v = np.array([[-1.0, 1.0], [1.0, 1.0]]).T / math.sqrt(2)
    return BlockSpectrum(block_id, basis, e, v)


def dd_block_matrix(j: float, j12: float, block_id: str, spectator: str = "0") -> np.ndarray:
    """Restriction of the full 125-dim exchange Hamiltonian to one block."""
    sample = model.GeometrySample(
        displacements=np.zeros((3, 3)), distances={},
        j={(0, 1): j12, (0, 2): j, (1, 2): j},
        v_d={p: 0.0 for p in model.PAIRS}, v_p={p: 0.0 for p in model.PAIRS})
    h = model.exchange_hamiltonian(sample)
    idx = [hilbert.index(tuple(lab)) for lab in block_basis(block_id, spectator)]
    return h[np.ix_(idx, idx)]


def omega_c_block_matrix(omega_c: float, coupling: str = "eigen") -> np.ndarray:
    """Dressing block in the basis (|E_D0P>, |00P>, |E_0DP>).

    ``coupling="eigen"`` uses bond strength Omega_c, the value for which the
    closed-form eigenpairs below hold.  ``coupling="physical"`` uses
    Omega_c / sqrt(2), the projection of a single control drive onto one
    exchange eigenstate; its spectrum is {0, +-Omega_c}.
    """
    if coupling not in ("eigen", "physical"):
        raise ValueError("coupling must be 'eigen' or 'physical'")
    g = omega_c if coupling == "eigen" else omega_c / math.sqrt(2)
    return np.array([[0, g, 0], [g, 0, g], [0, g, 0]], dtype=float)


def omega_c_block_spectrum(omega_c: float) -> tuple[float, float, float, np.ndarray]:
    """(lambda_0, lambda_1, lambda_2, vectors) with vectors as columns in that order."""
    if not omega_c > 0:
        raise ValueError("Omega_c must be positive")
    r2 = math.sqrt(2)
    vecs = np.array([
        [-1 / r2, 0.0, 1 / r2],
        [0.5, -r2 / 2, 0.5],
        [0.5, r2 / 2, 0.5],
    ]).T
    return 0.0, -r2 * omega_c, r2 * omega_c, vecs


def eigen_residual(matrix: np.ndarray, values, vectors) -> float:
    """max_k ||M v_k - e_k v_k|| plus deviation from unit norm."""
    res = 0.0
    for k, e in enumerate(values):
        v = vectors[:, k]
        res = max(res, float(np.linalg.norm(matrix @ v - e * v)),
                  abs(float(np.linalg.norm(v)) - 1.0))
    return res


def spectral_report(j: float, j12: float, omega_c: float) -> list[dict]:
    rows = []
    for bid in BLOCK_IDS:
        spec = dd_block_spectrum(j, j12, bid)
        for spectator in ("0", "1") if bid.startswith("2") else ("0",):
            m = dd_block_matrix(j, j12, bid, spectator)
            numeric = np.linalg.eigvalsh(m)
            rows.append({
                "block": bid if not bid.startswith("2") else f"{bid}[{spectator}]",
                "analytic_eigenvalues": sorted(spec.eigenvalues.tolist()),
                "numeric_eigenvalues": numeric.tolist(),
                "max_eigen_residual": eigen_residual(m, spec.eigenvalues, spec.eigenvectors),
            })
    l0, l1, l2, vecs = omega_c_block_spectrum(omega_c)
    m = omega_c_block_matrix(omega_c)
    rows.append({
        "block": "lambda",
        "analytic_eigenvalues": sorted([l0, l1, l2]),
        "numeric_eigenvalues": np.linalg.eigvalsh(m).tolist(),
        "max_eigen_residual": eigen_residual(m, [l0, l1, l2], vecs),
        "physical_coupling_eigenvalues":
            np.linalg.eigvalsh(omega_c_block_matrix(omega_c, "physical")).tolist(),
    })
    return rows


# reduced gate model ---------------------------------------------------------

def active_blocks(parity: str) -> list[tuple[str, Level]]:
    """(control pair, Rydberg level of T3) for the two driven control sectors."""
    if parity == "even":
        return [("00", Level.D), ("11", Level.P)]
    if parity == "odd":
        return [("01", Level.D), ("10", Level.P)]
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


@dataclass(frozen=True)
class EffectiveModel:
    """Ten-state reduced system: two driven 3-level blocks plus four idle states."""

    parity: str
    pulse: model.TargetPulse

    @property
    def labels(self) -> list[str]:
        out = []
        for ctrl, ryd in active_blocks(self.parity):
            out += [ctrl + "0", ctrl + "1", ctrl + ryd.name]
        idle = [c for c in ("00", "01", "10", "11") if c not in
                [b for b, _ in active_blocks(self.parity)]]
        for ctrl in idle:
            out += [ctrl + "0", ctrl + "1"]
        return out

    @property
    def full_indices(self) -> np.ndarray:
        return np.array([hilbert.index(tuple(lab)) for lab in self.labels])

    def coupling_matrix(self, om0: complex, om1: complex) -> np.ndarray:
        h = np.zeros((10, 10), dtype=complex)
        for blk in range(2):
            g0, g1, r = 3 * blk, 3 * blk + 1, 3 * blk + 2
            h[r, g0], h[r, g1] = om0, om1
        return h + h.conj().T

    def hamiltonian(self, t: float) -> np.ndarray:
        om0, om1 = self.pulse.rabi(t)
        return self.coupling_matrix(complex(om0), complex(om1))

    def _half_generator(self, second: bool) -> np.ndarray:
        """Matrix M with H(t) = Omega(t) M on one half of the pulse."""
        p = self.pulse
        p1 = (math.pi - p.gamma) if second else 0.0
        s, c = math.sin(p.theta / 2), math.cos(p.theta / 2)
        return self.coupling_matrix(s * np.exp(1j * (p1 - p.phi)), c * np.exp(1j * p1))

    def propagator(self, t: float) -> np.ndarray:
        """Exact U(t): H is Omega(t) times a constant matrix on each half."""
        p = self.pulse
        half = p.tau / 2
        if t <= half:
            return expm(-1j * cumulative_area(t, p) * self._half_generator(False))
        u1 = expm(-1j * cumulative_area(half, p) * self._half_generator(False))
        a2 = cumulative_area(t, p) - cumulative_area(half, p)
        return expm(-1j * a2 * self._half_generator(True)) @ u1

    def restrict(self, psi_full: np.ndarray) -> np.ndarray:
        return np.asarray(psi_full)[self.full_indices]

    def embed(self, psi10: np.ndarray) -> np.ndarray:
        out = np.zeros(hilbert.DIM, dtype=complex)
        out[self.full_indices] = psi10
        return out

    def qubit_unitary(self) -> np.ndarray:
        """8x8 action of U(tau) on the computational subspace."""
        u = self.propagator(self.pulse.tau)
        comp = hilbert.computational_indices()
        pos = {int(k): i for i, k in enumerate(self.full_indices)}
        out = np.zeros((8, 8), dtype=complex)
        for a, ia in enumerate(comp):
            for b, ib in enumerate(comp):
                out[a, b] = u[pos[int(ia)], pos[int(ib)]]
        return out


def cumulative_area(t: float, pulse: model.TargetPulse) -> float:
    """Closed-form integral of the envelope from 0 to t."""
    if t < -1e-12 or t > pulse.tau + 1e-12:
        raise ValueError("t outside [0, tau]")
    t = min(max(t, 0.0), pulse.tau)
    T, w = pulse.T, pulse.alpha * pulse.T
    k = w * math.sqrt(math.pi / 2)

    def seg(lo, hi, centre, off):
        g = k * (erf((hi - centre) / (math.sqrt(2) * w)) - erf((lo - centre) / (math.sqrt(2) * w)))
        return pulse.omega_f * (g - off * (hi - lo)) / (1 - off)

    if t <= 4 * T:
        return seg(0.0, t, 2 * T, pulse.a)
    return seg(0.0, 4 * T, 2 * T, pulse.a) + seg(4 * T, t, 6 * T, pulse.b)


@dataclass
class DeviationReport:
    times: np.ndarray
    fidelity_original: np.ndarray
    fidelity_effective: np.ndarray
    max_gap: float
    endpoint_gap: float
    hierarchy: dict

    def to_dict(self) -> dict:
        return {
            "max_gap": self.max_gap,
            "endpoint_gap": self.endpoint_gap,
            "endpoint_fidelity_original": float(self.fidelity_original[-1]),
            "endpoint_fidelity_effective": float(self.fidelity_effective[-1]),
            "hierarchy": self.hierarchy,
        }


def hierarchy_ratios(config: model.SystemConfig, pulse: model.TargetPulse) -> dict:
    """Scale separations behind the two stated validity conditions."""
    return {
        "delta_over_omega_c": config.delta / config.omega_c,
        "omega_c_over_omega_f": config.omega_c / pulse.omega_f if pulse.omega_f else math.inf,
        "delta_over_omega_f": config.delta / pulse.omega_f if pulse.omega_f else math.inf,
        "note": ("gate derivation orders J = Delta >> Omega_c >> |Omega_0|, |Omega_1|; "
                 "the exchange elimination alone only needs J = Delta >> Omega_c, |Omega_0|, "
                 "|Omega_1|. Both ratios are listed so either reading can be checked."),
    }


def compare_dynamics(config: model.SystemConfig, pulse: model.TargetPulse,
                     psi0_8: np.ndarray | None = None, gate: gates.RotationSpec | None = None,
                     grid: dynamics.TimeGrid | None = None, backend: str | None = None
                     ) -> DeviationReport:
    """Fidelity curves of the full 125-state model and the reduced model."""
    psi0_8 = gates.initial_qubit_state() if psi0_8 is None else np.asarray(psi0_8, complex)
    rot = gate or gates.RotationSpec(pulse.gamma, pulse.theta, pulse.phi)
    target = gates.parity_gate(config.parity, rot).target_state(psi0_8)
    terms = model.hamiltonian_terms(config, pulse)
    grid = grid or dynamics.TimeGrid.for_norm(config.tau, terms.norm_bound())
    traj = dynamics.evolve_schrodinger(terms, hilbert.embed_qubits(psi0_8), grid,
                                       target=target, backend=backend)
    eff = EffectiveModel(config.parity, pulse)
    start = eff.restrict(hilbert.embed_qubits(psi0_8))
    tgt10 = eff.restrict(target)
    f_eff = np.array([abs(np.vdot(tgt10, eff.propagator(t) @ start)) ** 2 for t in traj.times])
    gap = np.abs(traj.fidelity - f_eff)
    return DeviationReport(traj.times, traj.fidelity, f_eff, float(gap.max()),
                           float(gap[-1]), hierarchy_ratios(config, pulse))
