"""Time-dependent three-atom Hamiltonian: drives, exchange, vdW and Stark terms.

Units throughout: hbar = 1, angular frequency in rad/us (so ``2*pi*MHz``),
time in us, length in um.  Interaction constants are stored as
``rad/us * um^3`` (C3) and ``rad/us * um^6`` (C6).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import integrate

from . import hilbert
from .hilbert import Level

TWO_PI = 2.0 * np.pi

# Pairs are always stored with i < j; atom 0 = C1, 1 = C2, 2 = T3.
PAIRS = ((0, 1), (0, 2), (1, 2))

BEAMS = ("c1_g0", "c1_g1", "c2_g0", "c2_g1", "t_g0", "t_g1")


def mhz(value: float) -> float:
    """``2*pi*value`` rad/us."""
    return TWO_PI * value


@dataclass(frozen=True)
class SystemConfig:
    """Physical constants, geometry and control-drive settings of one gate."""

    omega_c: float = mhz(3.533)
    delta: float = mhz(86.0)
    c3: float = mhz(13.0525e3)
    c6_d: float = mhz(1542.60e3)
    c6_p: float = mhz(5486.82e3)
    d: float = 5.334
    polar_angle: float = np.pi / 2
    tau: float = 3.0
    parity: str = "even"
    stark_compensation: bool = True
    vdw: bool = True
    # "bare": control lasers keep detuning delta from the unshifted ground level.
    # "compensated": detuning is referenced to the light-shift-compensated level.
    detuning_reference: str = "bare"
    resonance_tolerance: float = 0.02

    def __post_init__(self):
        for name in ("omega_c", "delta", "d", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.detuning_reference not in ("bare", "compensated"):
            raise ValueError("detuning_reference must be 'bare' or 'compensated'")

    @property
    def nominal_j(self) -> float:
        return dipole_coupling(self.c3, self.polar_angle, self.d)

    def resonance_mismatch(self) -> float:
        """Relative deviation |J - delta| / delta at nominal geometry."""
        return abs(self.nominal_j - self.delta) / self.delta

    def check_resonance(self) -> None:
        if self.resonance_mismatch() > self.resonance_tolerance:
            raise ValueError(
                f"J = {self.nominal_j / TWO_PI:.4f} x 2pi MHz is not resonant with "
                f"delta = {self.delta / TWO_PI:.4f} x 2pi MHz "
                f"(tolerance {self.resonance_tolerance:.3g})")

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def control_drives(self) -> list[tuple[int, Level, Level]]:
        """(atom, ground level, Rydberg level) for every control beam."""
        c2 = ((Level.g0, Level.D), (Level.g1, Level.P)) if self.parity == "even" \
            else ((Level.g0, Level.P), (Level.g1, Level.D))
        return [(0, Level.g0, Level.D), (0, Level.g1, Level.P),
                (1, c2[0][0], c2[0][1]), (1, c2[1][0], c2[1][1])]


@dataclass(frozen=True)
class TargetPulse:
    """Two-segment Gaussian envelope and the geometric phase schedule."""

    omega_f: float
    alpha: float
    tau: float = 3.0
    gamma: float = np.pi
    theta: float = np.pi / 2
    phi: float = np.pi

    def __post_init__(self):
        if self.omega_f < 0:
            raise ValueError("omega_f must be non-negative")
        if self.alpha <= 0 or self.tau <= 0:
            raise ValueError("alpha and tau must be positive")

    @property
    def T(self) -> float:
        return self.tau / 8.0

    @property
    def a(self) -> float:
        T = self.T
        return float(np.exp(-(2 * T) ** 2 / (2 * (self.alpha * T) ** 2)))

    @property
    def b(self) -> float:
        T = self.T
        return float(np.exp(-(self.tau / 2 - 6 * T) ** 2 / (2 * (self.alpha * T) ** 2)))

    def replace(self, **changes) -> "TargetPulse":
        return dataclasses.replace(self, **changes)

    def envelope(self, t):
        return pulse_envelope(t, self)

    def phase1(self, t):
        return phase_schedule(t, self.gamma, self.tau)

    def rabi(self, t):
        """Complex (Omega_0(t), Omega_1(t)) before any noise."""
        t = np.asarray(t, dtype=float)
        env = pulse_envelope(t, self)
        p1 = phase_schedule(t, self.gamma, self.tau)
        p0 = p1 - self.phi
        om0 = env * np.sin(self.theta / 2) * np.exp(1j * p0)
        om1 = env * np.cos(self.theta / 2) * np.exp(1j * p1)
        return om0, om1

    def area(self) -> float:
        """Quadrature of the envelope over [0, tau]."""
        f = lambda t: float(pulse_envelope(t, self))
        left, _ = integrate.quad(f, 0.0, 4 * self.T, limit=200)
        right, _ = integrate.quad(f, 4 * self.T, self.tau, limit=200)
        return left + right


@dataclass(frozen=True)
class GeometrySample:
    displacements: np.ndarray  # (3 atoms, 3 axes) in um
    distances: Mapping[tuple[int, int], float]
    j: Mapping[tuple[int, int], float]
    v_d: Mapping[tuple[int, int], float]
    v_p: Mapping[tuple[int, int], float]


@dataclass(frozen=True)
class NoiseDraw:
    """One quasi-static shot: geometry plus per-beam phase and amplitude errors."""

    displacements: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    phase: Mapping[str, float] = field(default_factory=lambda: {b: 0.0 for b in BEAMS})
    amplitude: Mapping[str, float] = field(default_factory=lambda: {b: 1.0 for b in BEAMS})

    @classmethod
    def zero(cls) -> "NoiseDraw":
        return cls()

    def is_zero(self) -> bool:
        return (not np.any(self.displacements)
                and all(v == 0.0 for v in self.phase.values())
                and all(v == 1.0 for v in self.amplitude.values()))


def dipole_coupling(c3: float, polar_angle: float, distance: float) -> float:
    if not distance > 0:
        raise ValueError(f"interatomic distance must be positive, got {distance}")
    return c3 * (1.0 - 3.0 * np.cos(polar_angle) ** 2) / distance**3


def vdw_coupling(c6: float, distance: float) -> float:
    if not distance > 0:
        raise ValueError(f"interatomic distance must be positive, got {distance}")
    return -c6 / distance**6


def pulse_envelope(t, pulse: TargetPulse):
    t_arr = np.asarray(t, dtype=float)
    tol = 1e-12 * pulse.tau
    if np.any(t_arr < -tol) or np.any(t_arr > pulse.tau + tol):
        raise ValueError("pulse_envelope evaluated outside [0, tau]")
    T, w = pulse.T, pulse.alpha * pulse.T
    a, b = pulse.a, pulse.b
    first = (np.exp(-(t_arr - 2 * T) ** 2 / (2 * w**2)) - a) / (1 - a)
    second = (np.exp(-(t_arr - 6 * T) ** 2 / (2 * w**2)) - b) / (1 - b)
    env = pulse.omega_f * np.where(t_arr <= 4 * T, first, second)
    # rounding leaves ~1e-17 negatives at the segment edges
    env = np.maximum(env, 0.0)
    return env if env.ndim else float(env)


def phase_schedule(t, gamma: float, tau: float):
    """Target phase phi_1: 0 on the first half, pi - gamma on the second."""
    t_arr = np.asarray(t, dtype=float)
    out = np.where(t_arr < tau / 2, 0.0, np.pi - gamma)
    return out if out.ndim else float(out)


def trap_centers(d: float) -> np.ndarray:
    return np.array([[-d, 0.0, 0.0], [d, 0.0, 0.0], [0.0, 0.0, 0.0]])


def geometry_from_displacements(config: SystemConfig, displacements=None) -> GeometrySample:
    disp = np.zeros((3, 3)) if displacements is None else np.asarray(displacements, dtype=float)
    if disp.shape != (3, 3) or not np.all(np.isfinite(disp)):
        raise ValueError("displacements must be a finite (3, 3) array in um")
    pos = trap_centers(config.d) + disp
    dist, j, vd, vp = {}, {}, {}, {}
    for i, k in PAIRS:
        r = float(np.linalg.norm(pos[i] - pos[k]))
        if r <= 0:
            raise ValueError(f"atoms {i} and {k} coincide")
        dist[(i, k)] = r
        j[(i, k)] = dipole_coupling(config.c3, config.polar_angle, r)
        vd[(i, k)] = vdw_coupling(config.c6_d, r) if config.vdw else 0.0
        vp[(i, k)] = vdw_coupling(config.c6_p, r) if config.vdw else 0.0
    return GeometrySample(disp, dist, j, vd, vp)


def _ground_light_shift(config: SystemConfig, rydberg: Level) -> float:
    """Second-order shift of a control ground level driven to ``rydberg``."""
    # D sits at -delta in the drive frame, P at +delta.
    e_r = -config.delta if rydberg == Level.D else config.delta
    return config.omega_c**2 / (0.0 - e_r)


def target_rydberg_shifts(config: SystemConfig, sample: GeometrySample) -> tuple[float, float]:
    """Residual shifts of T3's |D> (controls -> D) and |P> (controls -> P)."""
    oc2, dl = config.omega_c**2, config.delta
    vd = (sample.v_d[(0, 2)], sample.v_d[(1, 2)])
    vp = (sample.v_p[(0, 2)], sample.v_p[(1, 2)])
    for v in vd:
        if np.isclose(dl - v, 0.0):
            raise ValueError("delta resonant with a D-state vdW shift")
    for v in vp:
        if np.isclose(dl + v, 0.0):
            raise ValueError("delta resonant with a P-state vdW shift")
    shift_d = sum(oc2 / (dl - v) for v in vd) - 2 * oc2 / dl
    shift_p = -sum(oc2 / (dl + v) for v in vp) + 2 * oc2 / dl
    return shift_d, shift_p


def stark_compensation(config: SystemConfig, sample: GeometrySample | None = None) -> np.ndarray:
    """Diagonal counter-terms (125x125), calibrated at nominal geometry by default."""
    if sample is None:
        sample = geometry_from_displacements(config)
    diag = np.zeros(hilbert.DIM)
    for atom, ground, ryd in config.control_drives():
        mask = hilbert.atom_levels_mask(atom, ground)
        diag[mask] -= _ground_light_shift(config, ryd)
    shift_d, shift_p = target_rydberg_shifts(config, sample)
    diag[hilbert.atom_levels_mask(2, Level.D)] -= shift_d
    diag[hilbert.atom_levels_mask(2, Level.P)] -= shift_p
    return np.diag(diag).astype(complex)


def control_compensation_shift(config: SystemConfig, ground: Level, rydberg: Level) -> float:
    """Diagonal compensation applied to one control ground level."""
    if not config.stark_compensation:
        return 0.0
    return -_ground_light_shift(config, rydberg)


def exchange_hamiltonian(sample: GeometrySample) -> np.ndarray:
    dp = hilbert.transition(Level.D, Level.P)
    pd = hilbert.transition(Level.P, Level.D)
    h = np.zeros((hilbert.DIM, hilbert.DIM), dtype=complex)
    for i, k in PAIRS:
        a = hilbert.two_site(dp, pd, i, k)
        h += sample.j[(i, k)] * (a + a.conj().T)
    return h


def vdw_hamiltonian(sample: GeometrySample) -> np.ndarray:
    pdd = hilbert.projector(Level.D)
    ppp = hilbert.projector(Level.P)
    h = np.zeros((hilbert.DIM, hilbert.DIM), dtype=complex)
    for i, k in PAIRS:
        h += sample.v_d[(i, k)] * hilbert.two_site(pdd, pdd, i, k)
        h += sample.v_p[(i, k)] * hilbert.two_site(ppp, ppp, i, k)
    return h


@dataclass
class Channel:
    """A drive term ``c(t) A + conj(c(t)) A^dagger``."""

    name: str
    op: np.ndarray
    coeff: Callable[[np.ndarray], np.ndarray]
    max_abs: float


@dataclass
class HamiltonianTerms:
    """H(t) = static + sum_k [c_k(t) A_k + h.c.], kept in separable form."""

    static: np.ndarray
    channels: list[Channel]
    tau: float
    area: float = float("nan")

    def at(self, t: float) -> np.ndarray:
        h = self.static.copy()
        for ch in self.channels:
            c = complex(np.asarray(ch.coeff(np.array([t])))[0])
            h += c * ch.op + np.conj(c) * ch.op.conj().T
        return h

    def coefficient_table(self, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        table = np.empty((times.size, len(self.channels)), dtype=complex)
        for k, ch in enumerate(self.channels):
            table[:, k] = ch.coeff(times)
        return table

    def norm_bound(self) -> float:
        """Upper bound on max_t ||H(t)||_2."""
        bound = float(np.linalg.norm(self.static, 2))
        for ch in self.channels:
            bound += ch.max_abs * float(np.linalg.norm(ch.op + ch.op.conj().T, 2))
        return bound

    def sparse_arrays(self, static: np.ndarray | None = None) -> dict:
        """CSR static part and COO channel entries for the RK4 kernels."""
        s = self.static if static is None else static
        rows, cols = np.nonzero(s)
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(s.shape[0] + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        ch_rows, ch_cols, ch_vals, ch_ids = [], [], [], []
        for k, ch in enumerate(self.channels):
            r, c = np.nonzero(ch.op)
            if np.any(r == c):
                raise ValueError(f"channel {ch.name} has diagonal entries")
            ch_rows.append(r)
            ch_cols.append(c)
            ch_vals.append(ch.op[r, c])
            ch_ids.append(np.full(r.size, k))
        return {
            "indptr": indptr,
            "indices": cols.astype(np.int64),
            "data": np.ascontiguousarray(s[rows, cols], dtype=complex),
            "ch_rows": np.concatenate(ch_rows).astype(np.int64) if ch_rows else np.zeros(0, np.int64),
            "ch_cols": np.concatenate(ch_cols).astype(np.int64) if ch_cols else np.zeros(0, np.int64),
            "ch_vals": np.concatenate(ch_vals).astype(complex) if ch_vals else np.zeros(0, complex),
            "ch_ids": np.concatenate(ch_ids).astype(np.int64) if ch_ids else np.zeros(0, np.int64),
        }


def _disjoint_support(op: np.ndarray) -> bool:
    rows = set(np.nonzero(op)[0])
    cols = set(np.nonzero(op)[1])
    return not rows & cols


def hamiltonian_terms(config: SystemConfig, pulse: TargetPulse,
                      draw: NoiseDraw | None = None) -> HamiltonianTerms:
    """Separable form of the full Hamiltonian for one configuration and noise draw."""
    draw = NoiseDraw.zero() if draw is None else draw
    if not np.isclose(pulse.tau, config.tau):
        raise ValueError("pulse and system disagree on tau")
    sample = geometry_from_displacements(config, draw.displacements)
    static = exchange_hamiltonian(sample)
    if config.vdw:
        static = static + vdw_hamiltonian(sample)
    if config.stark_compensation:
        static = static + stark_compensation(config)

    channels: list[Channel] = []
    for atom, ground, ryd in config.control_drives():
        beam = f"c{atom + 1}_g{int(ground)}"
        sign = 1.0 if ryd == Level.D else -1.0
        freq = sign * config.delta
        if config.detuning_reference == "compensated":
            freq -= control_compensation_shift(config, ground, ryd)
        amp = config.omega_c * draw.amplitude[beam] * np.exp(1j * draw.phase[beam])
        op = hilbert.embed(hilbert.transition(ryd, ground), atom)

        def coeff(t, amp=amp, freq=freq):
            return amp * np.exp(-1j * freq * np.asarray(t, dtype=float))

        channels.append(Channel(beam, op, coeff, abs(amp)))

    for ground, trig in ((Level.g0, np.sin), (Level.g1, np.cos)):
        beam = f"t_g{int(ground)}"
        single = hilbert.transition(Level.D, ground) + hilbert.transition(Level.P, ground)
        op = hilbert.embed(single, 2)
        factor = draw.amplitude[beam] * np.exp(1j * draw.phase[beam])
        shift = -pulse.phi if ground == Level.g0 else 0.0
        weight = trig(pulse.theta / 2)

        def coeff(t, factor=factor, shift=shift, weight=weight):
            t = np.asarray(t, dtype=float)
            return (factor * weight * pulse_envelope(t, pulse)
                    * np.exp(1j * (phase_schedule(t, pulse.gamma, pulse.tau) + shift)))

        channels.append(Channel(beam, op, coeff, abs(factor * weight) * pulse.omega_f))

    for ch in channels:
        assert _disjoint_support(ch.op), ch.name
    return HamiltonianTerms(static=static, channels=channels, tau=config.tau)


def build_hamiltonian(t: float, config: SystemConfig, pulse: TargetPulse,
                      draw: NoiseDraw | None = None) -> np.ndarray:
    if not -1e-12 <= t <= config.tau + 1e-12:
        raise ValueError("t outside [0, tau]")
    return hamiltonian_terms(config, pulse, draw).at(t)


def excitation_number() -> np.ndarray:
    """Diagonal operator counting atoms in |D> or |P>."""
    n = np.zeros(hilbert.DIM)
    for atom in range(3):
        for lv in (Level.D, Level.P):
            n += hilbert.atom_levels_mask(atom, lv)
    return np.diag(n).astype(complex)
