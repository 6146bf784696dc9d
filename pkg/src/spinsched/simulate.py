"""Exact spin dynamics for schedule validation.

Free Hamiltonians, ideal and finite-duration pulse propagators, the
product-operator controlled-not target, gate-level phase extraction,
coherence-order analysis and the simultaneous-soft-pulse artifact metric.

Conventions (see operators.py for the basis): I_z eigenvalues are +/-1/2
with "up" first; Hamiltonians are in rad/s; propagators compose time ordered
with the earliest factor applied first (rightmost in operator products).
Per-spin z phases are the full rotation angles theta_a of exp(-i theta_a
I_az); pair coupling phases are the full J rotation angles theta_ab of
exp(-i theta_ab I_az I_bz), so an antiphase evolution reads (2n+1)*pi.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ScheduleError, SimulationError
from .operators import (
    apply_pi_left,
    collective_op,
    expm_hermitian,
    global_phase_distance,
    rotation,
    single_spin_op,
    spin_m,
    state_bits,
    zeeman_m,
)
from .schedule import Schedule, TimedLayout, antiphase_duration, sign_matrix
from .spin_model import GateSpec, SpinSystem, pair_key

SIZE_CAP = 10  # dense operators up to 1024 x 1024

PULSE_KINDS = ("instantaneous", "rectangular", "gaussian")


@dataclass(frozen=True)
class PulseShape:
    """Soft-pulse envelope.

    duration is the radiofrequency on-time; carrier_offset the pulse centre
    frequency relative to the carrier (None means on resonance with each
    target spin).  The amplitude is always calibrated so the on-resonance
    flip angle is exactly pi.  Gaussian envelopes are truncated where the
    amplitude falls to `truncation` of the peak.
    """

    kind: str = "instantaneous"
    duration: float = 0.0
    carrier_offset: float | None = None
    truncation: float = 0.025

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise SimulationError(f"unknown pulse kind {self.kind!r}")
        if self.kind != "instantaneous" and self.duration <= 0:
            raise SimulationError(f"{self.kind} pulse needs a positive duration")
        if not (0 < self.truncation < 1) and self.kind == "gaussian":
            raise SimulationError("gaussian truncation must sit in (0, 1)")

    def envelope(self, t: np.ndarray) -> np.ndarray:
        """RF amplitude in Hz at offsets t from the pulse centre.

        Rectangular: B1 = 1/(2*duration).  Gaussian: area-normalized so the
        integral over the truncated window equals 1/2 (a pi rotation).
        """
        if self.kind == "rectangular":
            return np.full_like(t, 1.0 / (2.0 * self.duration), dtype=float)
        sigma = (self.duration / 2.0) / np.sqrt(2.0 * np.log(1.0 / self.truncation))
        raw = np.exp(-(t**2) / (2.0 * sigma**2))
        # analytic area over the truncated window
        from math import erf, sqrt

        area = sigma * sqrt(2.0 * np.pi) * erf(
            (self.duration / 2.0) / (sigma * sqrt(2.0))
        )
        return raw / (2.0 * area)


def _check_size(system: SpinSystem):
    if system.n > SIZE_CAP:
        raise SimulationError(
            f"{system.n} spins exceed the dense-operator cap of {SIZE_CAP}"
        )


def free_hamiltonian(system: SpinSystem, coupling_model: str = "weak") -> np.ndarray:
    """H = sum_a 2 pi nu_a I_az + coupling terms, in rad/s.

    Weak coupling keeps only I_az I_bz products (diagonal); the strong model
    uses the full scalar product I_a . I_b, which mixes zero-quantum states.
    """
    _check_size(system)
    if coupling_model not in ("weak", "strong"):
        raise SimulationError(f"unknown coupling model {coupling_model!r}")
    n = system.n
    m = spin_m(n)  # (2^n, n) of +/- 1/2
    diag = 2.0 * np.pi * (m @ np.asarray(system.shifts))
    for (a, b), j in system.couplings.items():
        ia, ib = system.index(a), system.index(b)
        diag = diag + 2.0 * np.pi * j * m[:, ia] * m[:, ib]
    h = np.diag(diag.astype(complex))
    if coupling_model == "strong":
        for (a, b), j in system.couplings.items():
            if j == 0.0:
                continue
            ia, ib = system.index(a), system.index(b)
            xx = single_spin_op(n, ia, "x") @ single_spin_op(n, ib, "x")
            yy = single_spin_op(n, ia, "y") @ single_spin_op(n, ib, "y")
            h = h + 2.0 * np.pi * j * (xx + yy)
    return h


def _events_by_boundary(schedule: Schedule):
    out: dict[int, list] = {}
    for e in schedule.events:
        out.setdefault(e.boundary, []).append(e)
    return out


def ideal_propagator(
    schedule: Schedule,
    layout: TimedLayout,
    system: SpinSystem,
    coupling_model: str = "weak",
) -> np.ndarray:
    """Time-ordered product of segment evolutions and instantaneous pi pulses.

    Pulses act as exp(-i pi sum_targets I_axis) exactly at their boundaries;
    each segment contributes exp(-i H segment_len).
    """
    _check_size(system)
    schedule.validate(system)
    if abs(layout.total - schedule.segments * layout.segment_len) > 1e-9 * max(
        1.0, layout.total
    ):
        raise ScheduleError("layout total does not equal segments * segment_len")
    n = system.n
    d = 2**n
    h = free_hamiltonian(system, coupling_model)
    hdiag = np.diagonal(h)
    is_diag = np.count_nonzero(h - np.diag(hdiag)) == 0
    if is_diag:
        seg_phase = np.exp(-1j * hdiag.real * layout.segment_len)
        seg_op = None
    else:
        seg_op = expm_hermitian(h, layout.segment_len)
    by_boundary = _events_by_boundary(schedule)
    u = np.eye(d, dtype=complex)
    for b in range(schedule.segments + 1):
        for e in by_boundary.get(b, ()):
            targets = (
                range(n) if e.kind == "hard" else [system.index(t) for t in e.targets]
            )
            u = apply_pi_left(u, n, targets, e.axis)
        if b < schedule.segments:
            u = seg_phase[:, None] * u if is_diag else seg_op @ u
    return u


# -- finite pulses -------------------------------------------------------------


@dataclass(frozen=True)
class _RfPulse:
    spin: int
    axis: str
    t_on: float
    t_off: float
    centre: float
    offset: float
    shape: PulseShape
    event_index: int


@dataclass(frozen=True)
class FinitePulseResult:
    """Propagator plus bookkeeping from time-sliced integration."""

    u: np.ndarray
    flagged_overlaps: tuple
    steps_per_pulse: int

    def to_dict(self) -> dict:
        return {
            "flagged_overlaps": [list(f) for f in self.flagged_overlaps],
            "steps_per_pulse": self.steps_per_pulse,
        }


def _rf_windows(schedule, layout, system, shapes):
    """Place each soft event's RF interval on the time axis.

    Interior boundaries centre the pulse on the boundary; windows at boundary
    0 or the terminal boundary hug the outside of the evolution interval
    (they are evolution free in the algebraic model, so they extend the wall
    clock, not the gate time).  Point events are (time, target indices, axis)
    triples for instantaneous rotations.
    """
    pulses, points = [], []
    for idx, e in enumerate(schedule.events):
        t_b = e.boundary * layout.segment_len
        if e.kind == "hard":
            points.append((t_b, tuple(range(system.n)), e.axis))
            continue
        shape = shapes.get(idx) if isinstance(shapes, dict) else shapes
        if shape is None or shape.kind == "instantaneous":
            points.append(
                (t_b, tuple(system.index(x) for x in e.targets), e.axis)
            )
            continue
        p = shape.duration
        if e.boundary == 0:
            centre = -(layout.flank + p / 2.0)
        elif e.boundary == schedule.segments:
            centre = layout.total + layout.flank + p / 2.0
        else:
            centre = t_b
        for label in e.targets:
            offset = (
                system.shift(label)
                if shape.carrier_offset is None
                else shape.carrier_offset
            )
            pulses.append(
                _RfPulse(
                    spin=system.index(label),
                    axis=e.axis,
                    t_on=centre - p / 2.0,
                    t_off=centre + p / 2.0,
                    centre=centre,
                    offset=offset,
                    shape=shape,
                    event_index=idx,
                )
            )
    return pulses, points


def _integrate(h_free, n, t0, t1, pulses, points, steps_per_pulse):
    """March exp(-i H(t) dt) slices from t0 to t1, applying point rotations.

    Active RF terms are piecewise constant per slice, sampled at the slice
    midpoint: 2 pi B(t) (cos(phi) I_x + sin(phi) I_y) with phi the accumulated
    offset phase relative to the pulse centre (plus pi/2 for y pulses).
    """
    d = 2**n
    u = np.eye(d, dtype=complex)
    breaks = {t0, t1}
    for p in pulses:
        breaks.add(min(max(p.t_on, t0), t1))
        breaks.add(min(max(p.t_off, t0), t1))
    for t, _, _ in points:
        breaks.add(min(max(t, t0), t1))
    grid = sorted(breaks)
    hdiag = np.diagonal(h_free)
    free_is_diag = np.count_nonzero(h_free - np.diag(hdiag)) == 0
    point_list = sorted(points, key=lambda pe: pe[0])
    applied = [False] * len(point_list)

    def apply_points_at(t):
        nonlocal u
        for i, (tp, targets, axis) in enumerate(point_list):
            if not applied[i] and abs(tp - t) < 1e-15:
                u = apply_pi_left(u, n, targets, axis)
                applied[i] = True

    apply_points_at(grid[0])
    for a, b in zip(grid[:-1], grid[1:]):
        if b - a > 1e-15:
            active = [p for p in pulses if p.t_on < b - 1e-15 and p.t_off > a + 1e-15]
            if not active:
                if free_is_diag:
                    u = np.exp(-1j * hdiag.real * (b - a))[:, None] * u
                else:
                    u = expm_hermitian(h_free, b - a) @ u
            else:
                dt_want = min(p.shape.duration / steps_per_pulse for p in active)
                n_sub = max(1, int(np.ceil((b - a) / dt_want - 1e-9)))
                dt = (b - a) / n_sub
                ax_ops = {}
                for p in active:
                    if (p.spin, "x") not in ax_ops:
                        ax_ops[(p.spin, "x")] = single_spin_op(n, p.spin, "x")
                        ax_ops[(p.spin, "y")] = single_spin_op(n, p.spin, "y")
                for k in range(n_sub):
                    tm = a + (k + 0.5) * dt
                    h = h_free.copy()
                    for p in active:
                        amp = float(p.shape.envelope(np.array([tm - p.centre]))[0])
                        phi = 2.0 * np.pi * p.offset * (tm - p.centre)
                        if p.axis == "y":
                            phi += np.pi / 2.0
                        h = h + 2.0 * np.pi * amp * (
                            np.cos(phi) * ax_ops[(p.spin, "x")]
                            + np.sin(phi) * ax_ops[(p.spin, "y")]
                        )
                    u = expm_hermitian(h, dt) @ u
        apply_points_at(b)
    return u


def finite_pulse_propagator(
    schedule: Schedule,
    layout: TimedLayout,
    system: SpinSystem,
    shapes,
    steps_per_pulse: int = 200,
) -> FinitePulseResult:
    """Propagator with soft pulses integrated as finite-duration RF.

    shapes is a PulseShape applied to every soft event, or a mapping from
    event index (position in schedule.events) to PulseShape.  Overlapping RF
    windows on coupled spins are simulated as requested (this routine is the
    oracle showing why the verifier forbids them) but reported in the result
    metadata.
    """
    _check_size(system)
    schedule.validate(system)
    if steps_per_pulse < 100:
        raise SimulationError("steps_per_pulse must be at least 100")
    h = free_hamiltonian(system, "weak")
    pulses, points = _rf_windows(schedule, layout, system, shapes)
    flagged = []
    for i, p in enumerate(pulses):
        for q in pulses[i + 1 :]:
            if p.t_on < q.t_off - 1e-15 and q.t_on < p.t_off - 1e-15:
                same_spin = p.spin == q.spin
                la, lb = system.labels[p.spin], system.labels[q.spin]
                coupled = system.j(la, lb) != 0.0 if not same_spin else False
                if same_spin or coupled:
                    flagged.append((p.event_index, q.event_index, la, lb))
    t0 = min([0.0] + [p.t_on for p in pulses])
    t1 = max([layout.total] + [p.t_off for p in pulses])
    u = _integrate(h, system.n, t0, t1, pulses, points, steps_per_pulse)
    return FinitePulseResult(
        u=u, flagged_overlaps=tuple(flagged), steps_per_pulse=steps_per_pulse
    )


# -- gate targets and comparison ------------------------------------------------


def cnot_target() -> np.ndarray:
    """The product-operator controlled-not on two spins, as a 4x4 matrix.

    Evaluates exp(-i pi/2 I_y) exp(-i pi/2 (I_z + S_z)) exp(+i pi/2 2 I_z S_z)
    exp(+i pi/2 I_y) with the control spin S first in the basis order and the
    rotated spin I second.  The result equals the standard controlled-not
    permutation (|00> and |01> fixed, |10> <-> |11>) times the global phase
    exp(-i pi/4).
    """
    m = spin_m(2)  # columns: spin 0 = S (control), spin 1 = I (target)
    m_s, m_i = m[:, 0], m[:, 1]
    f_ry_plus = rotation(2, [1], "y", -np.pi / 2.0)  # exp(+i pi/2 I_y)
    f_coupling = np.diag(np.exp(+1j * np.pi / 2.0 * 2.0 * m_i * m_s))
    f_z = np.diag(np.exp(-1j * np.pi / 2.0 * (m_i + m_s)))
    f_ry_minus = rotation(2, [1], "y", np.pi / 2.0)  # exp(-i pi/2 I_y)
    return f_ry_minus @ f_z @ f_coupling @ f_ry_plus


def coherence_orders(rho: np.ndarray) -> dict:
    """Frobenius amplitude of rho per coherence order p in [-N, N].

    The order of element (k, l) is the total Zeeman quantum number of bra k
    minus that of ket l; the squared amplitudes over all orders sum to the
    squared Frobenius norm of rho.
    """
    d = rho.shape[0]
    n = int(round(np.log2(d)))
    if 2**n != d:
        raise SimulationError(f"operator dimension {d} is not a power of two")
    q = zeeman_m(n)
    p_of = np.rint(q[:, None] - q[None, :]).astype(int)
    return {
        p: float(np.sqrt(np.sum(np.abs(rho[p_of == p]) ** 2)))
        for p in range(-n, n + 1)
    }


def multiple_quantum_amplitude(rho: np.ndarray) -> float:
    """Combined amplitude of all |order| >= 2 coherences."""
    amps = coherence_orders(rho)
    return float(np.sqrt(sum(a**2 for p, a in amps.items() if abs(p) >= 2)))


def _wrap(x: float) -> float:
    return float((x + np.pi) % (2.0 * np.pi) - np.pi)


@dataclass(frozen=True)
class GateReport:
    """Outcome of comparing a simulated propagator with its gate contract."""

    passed: bool
    diagonal: bool
    max_off_diag: float
    distance: float | None
    spin_phases: dict
    coupling_phases: dict
    active_coupling_phase: float | None
    n: int
    failures: tuple = ()
    worst_coherence: dict | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "diagonal": self.diagonal,
            "max_off_diag": self.max_off_diag,
            "distance": self.distance,
            "spin_phases": dict(sorted(self.spin_phases.items())),
            "coupling_phases": [
                {"a": a, "b": b, "radians": v}
                for (a, b), v in sorted(self.coupling_phases.items())
            ],
            "active_coupling_phase": self.active_coupling_phase,
            "n": self.n,
            "failures": list(self.failures),
            "worst_coherence": self.worst_coherence,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def compare_gate(
    u_ref: np.ndarray | None,
    v: np.ndarray,
    gate: GateSpec,
    system: SpinSystem,
    n: int | None = None,
    off_diag_tol: float = 1e-8,
    phase_tol: float = 1e-6,
) -> GateReport:
    """Check a schedule propagator against the gate's phase contract.

    The propagator must be diagonal in the product basis.  Its diagonal is
    decomposed into per-spin z phases and pairwise coupling phases through
    branch-safe ratios of diagonal entries, so wrapped phases never corrupt
    the fit.  Pass requires spectator z phases and all spectator-involving
    coupling phases to vanish (mod 2 pi) and, for coupling gates, the active
    pair phase to sit at (2n+1) pi.  Active-spin z phases are reported but
    not constrained.  The result is invariant under a global phase of v, and
    `distance` reports the phase-aligned deviation from u_ref when given.
    """
    gate.validate_for(system)
    n_gate = gate.n if n is None else n
    nsp = system.n
    d = 2**nsp
    if v.shape != (d, d):
        raise SimulationError(
            f"propagator dimension {v.shape} does not match {nsp} spins"
        )
    diag = np.diagonal(v).copy()
    off = v - np.diag(diag)
    max_off = float(np.max(np.abs(off)))
    failures = []
    worst = None
    if max_off > off_diag_tol:
        k, l = np.unravel_index(np.argmax(np.abs(off)), off.shape)
        bits = state_bits(nsp)
        q = zeeman_m(nsp)
        worst = {
            "magnitude": max_off,
            "bra": "".join(str(b) for b in bits[k]),
            "ket": "".join(str(b) for b in bits[l]),
            "coherence_order": int(round(q[k] - q[l])),
        }
        failures.append(
            f"off-diagonal element {max_off:.3e} between |{worst['bra']}> and "
            f"|{worst['ket']}> (coherence order {worst['coherence_order']})"
        )
        return GateReport(
            passed=False,
            diagonal=False,
            max_off_diag=max_off,
            distance=None if u_ref is None else global_phase_distance(u_ref, v),
            spin_phases={},
            coupling_phases={},
            active_coupling_phase=None,
            n=n_gate,
            failures=tuple(failures),
            worst_coherence=worst,
        )

    # index of the basis state with one subset of spins flipped
    def idx(spins) -> int:
        out = 0
        for s in spins:
            out |= 1 << (nsp - 1 - system.index(s))
        return out

    ref = diag[0]
    single = {}  # arg(V_a / V_0) = theta_a + half the sum of its pair phases
    for a in system.labels:
        single[a] = float(np.angle(diag[idx([a])] / ref))
    # with V_kk = exp(-i [gamma + sum theta_c m_c + sum theta_cd m_c m_d]),
    # the four-entry ratio isolates exactly -theta_ab, branch safe
    pair_phase = {}
    for i, a in enumerate(system.labels):
        for b in system.labels[i + 1 :]:
            r = (diag[idx([a, b])] * ref) / (diag[idx([a])] * diag[idx([b])])
            pair_phase[pair_key(a, b)] = float(-np.angle(r))

    active = gate.active
    active_pair = pair_key(*active) if len(active) == 2 else None
    spectators = gate.spectators(system)

    # the raw single-spin ratio carries half of every pair phase the spin is
    # in; remove the extracted pair estimates (exact for the active pair,
    # wrapped and therefore diagnostic-quality for genuinely failing pairs)
    spin_phases = {}
    for a in system.labels:
        theta = single[a]
        for b in system.labels:
            if b == a:
                continue
            pair = pair_key(a, b)
            if pair == active_pair:
                theta -= (2 * n_gate + 1) * np.pi / 2.0
            else:
                theta -= 0.5 * pair_phase[pair]
        spin_phases[a] = _wrap(theta)

    for a in spectators:
        if abs(spin_phases[a]) > phase_tol:
            failures.append(
                f"spectator {a} keeps z phase {spin_phases[a]:.3e} rad"
            )
    active_coupling = None
    for pair, phase in pair_phase.items():
        if pair == active_pair:
            active_coupling = phase
            err = abs(_wrap(phase - np.pi))  # (2n+1) pi mod 2 pi
            if err > phase_tol:
                failures.append(
                    f"active pair {pair} coupling phase off antiphase by "
                    f"{err:.3e} rad"
                )
        elif abs(_wrap(phase)) > phase_tol:
            failures.append(
                f"pair {pair} keeps coupling phase {phase:.3e} rad"
            )
    return GateReport(
        passed=not failures,
        diagonal=True,
        max_off_diag=max_off,
        distance=None if u_ref is None else global_phase_distance(u_ref, v),
        spin_phases=spin_phases,
        coupling_phases=pair_phase,
        active_coupling_phase=active_coupling,
        n=n_gate,
        failures=tuple(failures),
        worst_coherence=None,
    )


def receiver_reference(
    schedule: Schedule, system: SpinSystem, total: float
) -> np.ndarray:
    """Diagonal correction undoing the free z rotation of never-flipped spins.

    Spins whose sign-matrix row is constant precess for the whole gate; their
    pure z phase is handled by resetting the receiver reference, exactly like
    the active-spin phases.  Returns the diagonal of exp(+i sum_a theta_a
    I_az) with theta_a = 2 pi nu_a T_a over the constant-row spins; multiply
    a propagator by it (rows scaled) to apply the convention.
    """
    m = sign_matrix(schedule, system)
    spins_m = spin_m(system.n)
    phase = np.zeros(2**system.n)
    for label in system.labels:
        if m.is_constant(label):
            t_a = float(m.row(label)[0]) * total
            phase += 2.0 * np.pi * system.shift(label) * t_a * spins_m[
                :, system.index(label)
            ]
    return np.exp(+1j * phase)


def simulate_gate(
    schedule: Schedule,
    system: SpinSystem,
    layout: TimedLayout | None = None,
    coupling_model: str = "weak",
    pulse_model: str = "ideal",
    shapes=None,
    steps_per_pulse: int = 200,
    u_ref: np.ndarray | None = None,
) -> GateReport:
    """Propagate a schedule and compare it against its gate contract.

    Builds the ideal layout from the gate's n when none is given (coupling
    gates only), applies the receiver-reference convention for constant-row
    spins, then runs compare_gate.
    """
    gate = schedule.gate
    if layout is None:
        if gate.kind != "coupling-evolution":
            raise SimulationError("shift gates need an explicit layout")
        j = abs(system.j(*gate.active))
        layout = TimedLayout.from_total(
            schedule, antiphase_duration(j, gate.n), n=gate.n
        )
    if pulse_model == "ideal":
        v = ideal_propagator(schedule, layout, system, coupling_model)
    elif pulse_model == "finite":
        shapes = shapes if shapes is not None else PulseShape(
            kind="rectangular", duration=layout.pulse_len
        )
        v = finite_pulse_propagator(
            schedule, layout, system, shapes, steps_per_pulse
        ).u
    else:
        raise SimulationError(f"unknown pulse model {pulse_model!r}")
    v = receiver_reference(schedule, system, layout.total)[:, None] * v
    return compare_gate(u_ref, v, gate, system, n=layout.n)


# -- simultaneous-pulse artifact metric -----------------------------------------


@dataclass(frozen=True)
class ArtifactMetric:
    """Multiple-quantum and antiphase amplitudes from soft-pulse overlap."""

    arrangement: str
    mq_amplitude: float
    antiphase_amplitude: float
    steps_per_pulse: int

    def to_dict(self) -> dict:
        return {
            "arrangement": self.arrangement,
            "mq_amplitude": self.mq_amplitude,
            "antiphase_amplitude": self.antiphase_amplitude,
            "steps_per_pulse": self.steps_per_pulse,
        }


def _antiphase_amplitude(rho: np.ndarray) -> float:
    ops = []
    for a, b in ((0, 1), (1, 0)):
        for ax in ("x", "y"):
            ops.append(
                2.0 * single_spin_op(2, a, ax) @ single_spin_op(2, b, "z")
            )
    return float(
        np.sqrt(sum(np.real(np.trace(op.conj().T @ rho)) ** 2 for op in ops))
    )


def tsetse_metric(
    system: SpinSystem,
    shape: PulseShape,
    arrangement: str = "simultaneous",
    steps_per_pulse: int = 400,
) -> ArtifactMetric:
    """Quantify the double-resonance artifact of overlapping soft pi pulses.

    Both spins start in longitudinal order (sum I_az).  Simultaneous: both
    soft pi pulses play in one window with the scalar coupling active, which
    creates multiple-quantum coherence in first order.  Staggered: each pulse
    is evaluated on the ideally prepared longitudinal state it would meet in
    a collision-free schedule, where the partner spin stays z-quantized, so
    per-pulse multiple-quantum generation vanishes identically; the reported
    amplitudes combine the two pulses in quadrature.  Instantaneous pulses
    are exact rotations and produce zero for either arrangement.
    """
    if system.n != 2:
        raise SimulationError("the artifact metric works on a two-spin system")
    if arrangement not in ("simultaneous", "staggered"):
        raise SimulationError(f"unknown arrangement {arrangement!r}")
    h = free_hamiltonian(system, "weak")
    rho0 = collective_op(2, [0, 1], "z")

    def evolve_with(pulse_list, rho, t0, t1):
        u = _integrate(h, 2, t0, t1, pulse_list, [], steps_per_pulse)
        return u @ rho @ u.conj().T

    def pulse_for(spin_idx, t_on):
        offset = (
            system.shifts[spin_idx]
            if shape.carrier_offset is None
            else shape.carrier_offset
        )
        return _RfPulse(
            spin=spin_idx,
            axis="x",
            t_on=t_on,
            t_off=t_on + shape.duration,
            centre=t_on + shape.duration / 2.0,
            offset=offset,
            shape=shape,
            event_index=spin_idx,
        )

    if shape.kind == "instantaneous":
        if arrangement == "simultaneous":
            u = apply_pi_left(np.eye(4, dtype=complex), 2, [0, 1], "x")
            rhos = [u @ rho0 @ u.conj().T]
        else:
            rhos = []
            for spin, base in ((0, rho0), (1, _ideal_after(rho0, 0))):
                u = apply_pi_left(np.eye(4, dtype=complex), 2, [spin], "x")
                rhos.append(u @ base @ u.conj().T)
    elif arrangement == "simultaneous":
        rhos = [
            evolve_with(
                [pulse_for(0, 0.0), pulse_for(1, 0.0)], rho0, 0.0, shape.duration
            )
        ]
    else:
        first = evolve_with([pulse_for(0, 0.0)], rho0, 0.0, shape.duration)
        second = evolve_with(
            [pulse_for(1, 0.0)], _ideal_after(rho0, 0), 0.0, shape.duration
        )
        rhos = [first, second]
    mq = float(np.sqrt(sum(multiple_quantum_amplitude(r) ** 2 for r in rhos)))
    ap = float(np.sqrt(sum(_antiphase_amplitude(r) ** 2 for r in rhos)))
    return ArtifactMetric(
        arrangement=arrangement,
        mq_amplitude=mq,
        antiphase_amplitude=ap,
        steps_per_pulse=steps_per_pulse,
    )


def _ideal_after(rho0: np.ndarray, spin: int) -> np.ndarray:
    """Longitudinal state after an ideal pi inversion of one spin."""
    u = apply_pi_left(np.eye(rho0.shape[0], dtype=complex), 2, [spin], "x")
    return u @ rho0 @ u.conj().T
