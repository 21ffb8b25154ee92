"""Quasi-static Monte Carlo noise: positions, laser phases and Rabi amplitudes."""

from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, gates, model
from .dynamics import DecayModel, TimeGrid

log = logging.getLogger(__name__)

CONTROL_BEAMS = ("c1_g0", "c1_g1", "c2_g0", "c2_g1")
TARGET_BEAMS = ("t_g0", "t_g1")


@dataclass(frozen=True)
class NoiseSpec:
    """Standard deviations and switches for the three quasi-static channels.

    ``sigma_nm`` is per axis (x, y, z).  ``control_sharing`` decides whether C2
    reuses C1's beam draws: ``"auto"`` shares them for even parity only.
    """

    sigma_nm: tuple[float, float, float] = (22.0, 25.0, 60.0)
    phase_control: float = 0.01 * math.pi
    phase_target: float = 0.01 * math.pi
    amplitude_control: float = 0.008
    amplitude_target: float = 0.008
    position: bool = True
    phase: bool = True
    amplitude: bool = True
    shots: int = 100
    seed: int = 2024
    control_sharing: str = "auto"

    def __post_init__(self):
        values = (*self.sigma_nm, self.phase_control, self.phase_target,
                  self.amplitude_control, self.amplitude_target)
        if any(v < 0 for v in values):
            raise ValueError("noise standard deviations must be non-negative")
        if len(self.sigma_nm) != 3:
            raise ValueError("sigma_nm needs three components")
        if self.shots < 1:
            raise ValueError("shots must be at least 1")
        if self.control_sharing not in ("auto", "shared", "independent"):
            raise ValueError("control_sharing must be auto, shared or independent")

    @classmethod
    def only(cls, channel: str, **kw) -> "NoiseSpec":
        flags = {"position": False, "phase": False, "amplitude": False}
        if channel not in flags:
            raise ValueError(f"unknown channel {channel!r}")
        flags[channel] = True
        return cls(**flags, **kw)

    @classmethod
    def disabled(cls, **kw) -> "NoiseSpec":
        return cls(position=False, phase=False, amplitude=False, **kw)

    def scaled(self, factor: float) -> "NoiseSpec":
        import dataclasses
        return dataclasses.replace(
            self, sigma_nm=tuple(s * factor for s in self.sigma_nm),
            phase_control=self.phase_control * factor, phase_target=self.phase_target * factor,
            amplitude_control=self.amplitude_control * factor,
            amplitude_target=self.amplitude_target * factor)

    def shares_control(self, parity: str) -> bool:
        if self.control_sharing == "auto":
            return parity == "even"
        return self.control_sharing == "shared"


def sample_displacement(sigma: float, zeta1: float, zeta2: float) -> float:
    """Box-Muller deviate sigma * sqrt(-2 ln zeta1) cos(2 pi zeta2)."""
    if not 0.0 < zeta1 <= 1.0:
        raise ValueError("zeta1 must lie in (0, 1]")
    if not 0.0 <= zeta2 <= 1.0:
        raise ValueError("zeta2 must lie in [0, 1]")
    return sigma * math.sqrt(-2.0 * math.log(zeta1)) * math.cos(2.0 * math.pi * zeta2)


def _gaussian(rng: np.random.Generator, sigma: float) -> float:
    while True:
        z1, z2 = rng.random(), rng.random()
        if z1 > 0.0:
            return sample_displacement(sigma, z1, z2)


def shot_rng(seed: int, shot_index: int) -> np.random.Generator:
    """Independent stream per shot, so shots can run in any order."""
    return np.random.default_rng([int(seed), int(shot_index)])


def draw_noise(spec: NoiseSpec, shot_index: int, parity: str = "even") -> model.NoiseDraw:
    """One shot's displacements (um), phase offsets (rad) and amplitude factors.

    Every deviate is drawn whether or not its channel is enabled, so switching a
    channel on or off leaves the other channels' values unchanged.
    """
    rng = shot_rng(spec.seed, shot_index)
    disp = np.array([[_gaussian(rng, s) for s in spec.sigma_nm] for _ in range(3)]) * 1e-3
    phases = {b: _gaussian(rng, spec.phase_control) for b in CONTROL_BEAMS}
    phases.update({b: _gaussian(rng, spec.phase_target) for b in TARGET_BEAMS})
    eps = {b: _gaussian(rng, spec.amplitude_control) for b in CONTROL_BEAMS}
    eps.update({b: _gaussian(rng, spec.amplitude_target) for b in TARGET_BEAMS})
    if spec.shares_control(parity):
        for src, dst in (("c1_g0", "c2_g0"), ("c1_g1", "c2_g1")):
            phases[dst] = phases[src]
            eps[dst] = eps[src]
    if not spec.position:
        disp = np.zeros((3, 3))
    if not spec.phase:
        phases = {b: 0.0 for b in phases}
    if not spec.amplitude:
        eps = {b: 0.0 for b in eps}
    return model.NoiseDraw(displacements=disp, phase=phases,
                           amplitude={b: 1.0 + e for b, e in eps.items()})


def draw_digest(draw: model.NoiseDraw) -> str:
    h = hashlib.sha1()
    h.update(np.ascontiguousarray(draw.displacements, dtype=float).tobytes())
    for beam in model.BEAMS:
        h.update(np.array([draw.phase[beam], draw.amplitude[beam]]).tobytes())
    return h.hexdigest()[:16]


@dataclass
class ShotResult:
    index: int
    fidelity: float
    digest: str
    times: np.ndarray | None = None
    curve: np.ndarray | None = None
    error: str | None = None


@dataclass
class EnsembleResult:
    fidelities: np.ndarray
    shots: list[ShotResult]
    seed: int
    aborted: list[int] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.fidelities))

    @property
    def std(self) -> float:
        n = self.fidelities.size
        return float(np.std(self.fidelities, ddof=1)) if n > 1 else 0.0

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.fidelities.size)

    def summary(self) -> dict:
        return {"shots": int(self.fidelities.size), "mean": self.mean, "std": self.std,
                "stderr": self.stderr, "min": float(self.fidelities.min()),
                "max": float(self.fidelities.max()), "seed": self.seed,
                "aborted": list(self.aborted)}


def run_shot(config: model.SystemConfig, pulse: model.TargetPulse, draw: model.NoiseDraw,
             target: np.ndarray, decay: DecayModel | None = None,
             max_product: float = dynamics.DEFAULT_MAX_PRODUCT, samples: int = 200,
             backend: str | None = None) -> dynamics.Trajectory:
    terms = model.hamiltonian_terms(config, pulse, draw)
    grid = TimeGrid.for_norm(config.tau, terms.norm_bound(), max_product, samples=samples)
    psi0 = gates.initial_state()
    if decay is not None and (decay.gamma_d > 0 or decay.gamma_p > 0):
        rho0 = np.outer(psi0, psi0.conj())
        return dynamics.evolve_lindblad(terms, rho0, decay, grid, target=target,
                                        max_product=max_product, backend=backend)
    return dynamics.evolve_schrodinger(terms, psi0, grid, target=target,
                                       max_product=max_product, backend=backend)


def ensemble_average(config: model.SystemConfig, pulse: model.TargetPulse, spec: NoiseSpec,
                     gate: gates.RotationSpec, decay: DecayModel | None = None, *,
                     threads: int = 1, keep_curves: bool = False,
                     max_product: float = dynamics.DEFAULT_MAX_PRODUCT, samples: int = 200,
                     backend: str | None = None, max_abort_fraction: float = 0.01
                     ) -> EnsembleResult:
    """Mean endpoint fidelity over ``spec.shots`` quasi-static draws.

    Shots are reduced in index order, so the result does not depend on the
    number of worker threads.
    """
    target = gates.parity_gate(config.parity, gate).target_state(gates.initial_qubit_state())

    def one(i: int) -> ShotResult:
        draw = draw_noise(spec, i, config.parity)
        digest = draw_digest(draw)
        try:
            tr = run_shot(config, pulse, draw, target, decay, max_product, samples, backend)
        except (dynamics.IntegrationError, dynamics.StabilityError, ValueError) as exc:
            log.warning("shot %d aborted: %s", i, exc)
            return ShotResult(i, float("nan"), digest, error=str(exc))
        return ShotResult(i, float(tr.fidelity[-1]), digest,
                          tr.times if keep_curves else None,
                          tr.fidelity if keep_curves else None)

    indices = range(spec.shots)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            shots = list(pool.map(one, indices))
    else:
        shots = [one(i) for i in indices]

    aborted = [s.index for s in shots if s.error is not None]
    if len(aborted) > max_abort_fraction * spec.shots:
        raise dynamics.IntegrationError(
            f"{len(aborted)} of {spec.shots} shots aborted (limit {max_abort_fraction:.0%})")
    if aborted:
        log.warning("excluding %d aborted shots: %s", len(aborted), aborted)
    fids = np.array([s.fidelity for s in shots if s.error is None])
    return EnsembleResult(fids, shots, spec.seed, aborted)
