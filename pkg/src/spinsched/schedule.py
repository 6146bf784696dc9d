"""Schedule data model, algebraic verifier and real-time packer.

A schedule divides the gate duration into equal time segments and places pi
pulse events on segment boundaries.  The per-spin precession sense over the
segments (the sign matrix) is always derived from the events, never stored
independently, so the executable object and its algebra cannot drift apart.

All refocusing arithmetic is done on integer segment counts before any
scaling to seconds, so the verifier is exact rather than tolerance based.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import PackingError, ScheduleError, ValidationError
from .spin_model import (
    CouplingPolicy,
    GateSpec,
    SpinSystem,
    pair_key,
    refocus_pairs,
)

AXES = ("x", "y")
KINDS = ("hard", "soft")


@dataclass(frozen=True)
class PulseEvent:
    """A pi rotation at a segment boundary.

    boundary runs from 0 (before the first segment) to `segments` (after the
    last); events at either end are evolution free and exist for parity and
    error compensation only.
    """

    boundary: int
    targets: tuple[str, ...]
    kind: str = "soft"
    axis: str = "x"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScheduleError(f"unknown event kind {self.kind!r}")
        if self.axis not in AXES:
            raise ScheduleError(f"unknown event axis {self.axis!r}")
        if len(self.targets) == 0:
            raise ScheduleError("event needs at least one target spin")
        if len(set(self.targets)) != len(self.targets):
            raise ScheduleError(f"duplicate targets in event: {self.targets}")
        if self.boundary < 0:
            raise ScheduleError(f"negative boundary {self.boundary}")
        object.__setattr__(self, "targets", tuple(sorted(self.targets)))

    def to_dict(self) -> dict:
        return {
            "boundary": self.boundary,
            "targets": list(self.targets),
            "kind": self.kind,
            "axis": self.axis,
        }


@dataclass(frozen=True)
class Schedule:
    """Equal time segments plus pulse events, with the gate they implement."""

    segments: int
    events: tuple[PulseEvent, ...]
    gate: GateSpec

    def __post_init__(self):
        if self.segments < 1:
            raise ScheduleError("segments must be positive")
        object.__setattr__(
            self, "events", tuple(sorted(self.events, key=lambda e: e.boundary))
        )
        for e in self.events:
            if e.boundary > self.segments:
                raise ScheduleError(
                    f"event boundary {e.boundary} outside [0, {self.segments}]"
                )

    def validate(self, system: SpinSystem) -> None:
        """Check the schedule against a spin system; raises ScheduleError."""
        all_spins = set(system.labels)
        by_boundary: dict[int, set] = {}
        for e in self.events:
            unknown = set(e.targets) - all_spins
            if unknown:
                raise ScheduleError(f"event targets unknown spin(s) {sorted(unknown)}")
            if e.kind == "hard" and set(e.targets) != all_spins:
                raise ScheduleError(
                    f"hard event at boundary {e.boundary} must target all spins"
                )
            if e.kind == "soft" and set(e.targets) >= all_spins:
                raise ScheduleError(
                    f"soft event at boundary {e.boundary} targets every spin; "
                    "use a hard event instead"
                )
            seen = by_boundary.setdefault(e.boundary, set())
            clash = seen & set(e.targets)
            if clash:
                raise ScheduleError(
                    f"boundary {e.boundary} has two events sharing spin(s) "
                    f"{sorted(clash)}"
                )
            seen |= set(e.targets)
        self.gate.validate_for(system)

    def soft_events(self) -> tuple[PulseEvent, ...]:
        return tuple(e for e in self.events if e.kind == "soft")

    def pulse_count(self, label: str) -> int:
        """Total pi pulses seen by one spin (hard events count for all)."""
        return sum(1 for e in self.events if label in e.targets or e.kind == "hard")

    def to_dict(self) -> dict:
        return {
            "segments": self.segments,
            "events": [e.to_dict() for e in self.events],
            "gate": self.gate.to_dict(),
        }

    @classmethod
    def from_dict(cls, raw) -> "Schedule":
        try:
            events = tuple(
                PulseEvent(
                    boundary=int(e["boundary"]),
                    targets=tuple(e["targets"]),
                    kind=str(e.get("kind", "soft")),
                    axis=str(e.get("axis", "x")),
                )
                for e in raw["events"]
            )
            return cls(
                segments=int(raw["segments"]),
                events=events,
                gate=GateSpec.from_dict(raw["gate"]),
            )
        except KeyError as exc:
            raise ScheduleError(f"schedule is missing field {exc}") from None


def load_schedule(path) -> Schedule:
    with open(Path(path), "r", encoding="utf-8") as fh:
        return Schedule.from_dict(json.load(fh))


# -- sign matrix -------------------------------------------------------------


@dataclass(eq=False)
class SignMatrix:
    """Per-spin precession sense (+1/-1) for each time segment."""

    labels: tuple[str, ...]
    rows: np.ndarray  # int8, shape (n_spins, segments)

    @property
    def segments(self) -> int:
        return self.rows.shape[1]

    def row(self, label: str) -> np.ndarray:
        return self.rows[self.labels.index(label)]

    def is_constant(self, label: str) -> bool:
        """True when a row has no sign change (the spin never flips)."""
        r = self.row(label)
        return bool(np.all(r == r[0]))

    def as_dict(self) -> dict:
        return {l: [int(v) for v in self.row(l)] for l in self.labels}


def sign_matrix(schedule: Schedule, system: SpinSystem) -> SignMatrix:
    """Derive the sign matrix: entry [a, k] is (-1)^(flips of a at boundaries <= k).

    Events at boundary `segments` touch no entry; events at boundary 0 invert
    a whole row.
    """
    schedule.validate(system)
    rows = np.ones((system.n, schedule.segments), dtype=np.int8)
    for e in schedule.events:
        if e.boundary >= schedule.segments:
            continue
        for label in e.targets if e.kind == "soft" else system.labels:
            rows[system.index(label), e.boundary :] *= -1
    return SignMatrix(labels=system.labels, rows=rows)


def accumulated_counts(m: SignMatrix):
    """Net evolution in integer segment units: per spin and per pair."""
    per_spin = {l: int(m.row(l).sum()) for l in m.labels}
    per_pair = {}
    for i, a in enumerate(m.labels):
        for b in m.labels[i + 1 :]:
            per_pair[pair_key(a, b)] = int((m.row(a) * m.row(b)).sum())
    return per_spin, per_pair


def accumulated_times(m: SignMatrix, segment_len: float):
    """Net chemical-shift time T_a and coupling time T_ab in seconds.

    T_a = segment_len * sum_k row[a][k] and T_ab the same for the elementwise
    row product.  Zero means refocused; +/- total means the rows are constant
    or identical.
    """
    per_spin, per_pair = accumulated_counts(m)
    return (
        {l: v * segment_len for l, v in per_spin.items()},
        {p: v * segment_len for p, v in per_pair.items()},
    )


# -- verification -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str  # refocus | collision | parity
    spins: tuple[str, ...]
    boundary: int | None
    detail: str

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "spins": list(self.spins),
            "boundary": self.boundary,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class VerifyReport:
    refocus_ok: bool
    collision_ok: bool
    parity_ok: bool
    violations: tuple[Violation, ...]
    t_a: dict
    t_ab: dict
    free_running: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return self.refocus_ok and self.collision_ok and self.parity_ok

    def to_dict(self) -> dict:
        return {
            "refocus_ok": self.refocus_ok,
            "collision_ok": self.collision_ok,
            "parity_ok": self.parity_ok,
            "violations": [v.to_dict() for v in self.violations],
            "t_a": dict(sorted(self.t_a.items())),
            "t_ab": [
                {"a": a, "b": b, "seconds": t}
                for (a, b), t in sorted(self.t_ab.items())
            ],
            "free_running": list(self.free_running),
        }


def verify_schedule(
    schedule: Schedule,
    system: SpinSystem,
    policy: CouplingPolicy,
    gate: GateSpec | None = None,
    segment_len: float = 1.0,
) -> VerifyReport:
    """Check refocusing, pulse-collision and parity constraints.

    Refocusing: for a coupling gate the active pair must accumulate the full
    duration and every other above-threshold pair must accumulate zero; for a
    shift gate the active spin accumulates the full duration and every
    above-threshold pair zero.  Pulsed spectators must have zero net shift
    evolution.  Spectators that never flip (constant rows) cannot be balanced
    by soft pulses at all; they are reported in `free_running` and their pure
    z-rotation is left to the receiver-reference convention, exactly like the
    active-spin phases.

    Collision: no boundary may host soft pulses on two spins closer than
    `min_sim_bond` bonds or `min_sim_freq` Hz, and never a soft event
    together with a hard one.

    Parity: every spin must see an even number of pi pulses in total.
    """
    gate = gate or schedule.gate
    gate.validate_for(system, policy)
    m = sign_matrix(schedule, system)
    counts_a, counts_ab = accumulated_counts(m)
    total = schedule.segments
    violations = []

    pairs = refocus_pairs(system, policy)
    active = gate.active
    active_pair = pair_key(*active) if len(active) == 2 else None
    if gate.kind == "coupling-evolution" and active_pair not in pairs:
        raise ValidationError(
            f"gate pair {active} is not an above-threshold coupling"
        )

    for pair in sorted(pairs):
        want = total if pair == active_pair else 0
        got = counts_ab[pair]
        if got != want:
            kind = "parallel rows" if abs(got) == total else "unbalanced rows"
            violations.append(
                Violation(
                    rule="refocus",
                    spins=pair,
                    boundary=None,
                    detail=(
                        f"coupling time {got} segment(s), expected {want} "
                        f"({kind})"
                    ),
                )
            )

    free_running = []
    for label in system.labels:
        if label in active:
            if gate.kind == "shift-evolution" and counts_a[label] != total:
                violations.append(
                    Violation(
                        rule="refocus",
                        spins=(label,),
                        boundary=None,
                        detail=(
                            f"active shift time {counts_a[label]} segment(s), "
                            f"expected {total}"
                        ),
                    )
                )
            continue
        if m.is_constant(label):
            free_running.append(label)
            continue
        if counts_a[label] != 0:
            violations.append(
                Violation(
                    rule="refocus",
                    spins=(label,),
                    boundary=None,
                    detail=f"spectator shift time {counts_a[label]} segment(s)",
                )
            )

    # collisions, boundary by boundary
    by_boundary: dict[int, dict] = {}
    for e in schedule.events:
        slot = by_boundary.setdefault(e.boundary, {"soft": set(), "hard": False})
        if e.kind == "hard":
            slot["hard"] = True
        else:
            slot["soft"] |= set(e.targets)
    for boundary in sorted(by_boundary):
        slot = by_boundary[boundary]
        if slot["hard"] and slot["soft"]:
            violations.append(
                Violation(
                    rule="collision",
                    spins=tuple(sorted(slot["soft"])),
                    boundary=boundary,
                    detail="soft and hard events share a boundary",
                )
            )
        soft = sorted(slot["soft"])
        for i, a in enumerate(soft):
            for b in soft[i + 1 :]:
                dist = system.bond_distance(a, b)
                too_close_bond = dist is not None and dist < policy.min_sim_bond
                sep = abs(system.shift(a) - system.shift(b))
                too_close_freq = sep < policy.min_sim_freq
                if too_close_bond or too_close_freq:
                    why = []
                    if too_close_bond:
                        why.append(f"{dist} bonds < {policy.min_sim_bond}")
                    if too_close_freq:
                        why.append(f"{sep:g} Hz < {policy.min_sim_freq:g} Hz")
                    violations.append(
                        Violation(
                            rule="collision",
                            spins=(a, b),
                            boundary=boundary,
                            detail="simultaneous soft pulses: " + ", ".join(why),
                        )
                    )

    for label in system.labels:
        npulses = schedule.pulse_count(label)
        if npulses % 2 == 1:
            violations.append(
                Violation(
                    rule="parity",
                    spins=(label,),
                    boundary=None,
                    detail=f"{npulses} pi pulse(s), expected an even count",
                )
            )

    t_a, t_ab_all = accumulated_times(m, segment_len)
    t_ab = {p: t_ab_all[p] for p in pairs}
    rules = {v.rule for v in violations}
    return VerifyReport(
        refocus_ok="refocus" not in rules,
        collision_ok="collision" not in rules,
        parity_ok="parity" not in rules,
        violations=tuple(violations),
        t_a=t_a,
        t_ab=t_ab,
        free_running=tuple(free_running),
    )


# -- timing -------------------------------------------------------------------


def antiphase_duration(j_hz: float, n: int) -> float:
    """Evolution time (2n+1)/(2J) that yields an antiphase multiplet."""
    if j_hz <= 0:
        raise ValidationError(f"coupling must be positive, got {j_hz} Hz")
    if n < 0:
        raise ValidationError(f"n must be non-negative, got {n}")
    return (2 * n + 1) / (2.0 * j_hz)


@dataclass(frozen=True)
class TimedLayout:
    """A schedule mapped onto real time.

    total = segments * segment_len.  Soft pulses occupy windows of
    pulse_len + 2*flank centred on their boundaries; j_phase_error records
    how far the realized coupling phase sits from the exact antiphase
    condition (zero in strict mode).
    """

    total: float
    segment_len: float
    n: int
    pulse_len: float
    flank: float
    j_phase_error: float

    def __post_init__(self):
        if self.total <= 0:
            raise ScheduleError("layout total must be positive")

    @classmethod
    def from_total(
        cls, schedule: Schedule, total: float, n: int = 0,
        pulse_len: float = 0.0, flank: float = 0.0, j_phase_error: float = 0.0,
    ) -> "TimedLayout":
        return cls(
            total=total,
            segment_len=total / schedule.segments,
            n=n,
            pulse_len=pulse_len,
            flank=flank,
            j_phase_error=j_phase_error,
        )

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "segment_len": self.segment_len,
            "n": self.n,
            "pulse_len": self.pulse_len,
            "flank": self.flank,
            "j_phase_error": self.j_phase_error,
        }

    @classmethod
    def from_dict(cls, raw) -> "TimedLayout":
        return cls(
            total=float(raw["total"]),
            segment_len=float(raw["segment_len"]),
            n=int(raw["n"]),
            pulse_len=float(raw["pulse_len"]),
            flank=float(raw["flank"]),
            j_phase_error=float(raw["j_phase_error"]),
        )


def _min_feasible_total(schedule: Schedule, window: float) -> float:
    """Smallest total duration that accommodates every soft-pulse window.

    Each interior boundary owns a time slot reaching to the midpoints of its
    two neighbouring segments, so a centred window fits exactly when it is no
    wider than one segment.  Slots of distinct boundaries are disjoint, which
    also keeps windows of different boundaries from overlapping.  Windows at
    boundary 0 or at the final boundary are placed outside the evolution
    interval (they are evolution free) and do not constrain the total.
    """
    interior = any(
        0 < e.boundary < schedule.segments for e in schedule.soft_events()
    )
    return schedule.segments * window if interior else 0.0


def pack_timed(
    schedule: Schedule,
    system: SpinSystem,
    pulse_len: float,
    flank: float,
    mode: str = "strict",
    phase_tol: float = 0.35,
    gate: GateSpec | None = None,
    n_cap: int = 64,
) -> TimedLayout:
    """Choose n and the total duration so pulse windows fit in real time.

    strict: the smallest n of allowed parity whose exact antiphase duration
    accommodates all windows; the coupling phase error is zero.  stretch: the
    smallest n of allowed parity whose minimal feasible total overshoots the
    antiphase condition by at most phase_tol radians of coupling phase; the
    layout then runs at the larger of the two durations and reports the
    signed overshoot 2*pi*J*(total - antiphase).
    """
    gate = gate or schedule.gate
    if gate.kind != "coupling-evolution":
        raise PackingError("only coupling-evolution gates have an antiphase duration")
    gate.validate_for(system)
    j = abs(system.j(*gate.active))
    if j <= 0:
        raise PackingError(f"active pair {gate.active} has no coupling")
    if pulse_len < 0 or flank < 0:
        raise PackingError("pulse_len and flank must be non-negative")
    if mode not in ("strict", "stretch"):
        raise PackingError(f"unknown packing mode {mode!r}")

    window = pulse_len + 2.0 * flank
    t_min = _min_feasible_total(schedule, window)
    for n in range(n_cap + 1):
        if not gate.allows(n):
            continue
        tau = antiphase_duration(j, n)
        if mode == "strict":
            if tau >= t_min - 1e-12:
                return TimedLayout.from_total(
                    schedule, tau, n=n, pulse_len=pulse_len, flank=flank
                )
        else:
            total = max(tau, t_min)
            err = 2.0 * np.pi * j * (total - tau)
            if err <= phase_tol:
                return TimedLayout.from_total(
                    schedule, total, n=n,
                    pulse_len=pulse_len, flank=flank, j_phase_error=err,
                )
    raise PackingError(
        f"no n <= {n_cap} with parity {gate.n_parity!r} fits: the windows need "
        f"at least {t_min:.6g} s ({schedule.segments} segments of "
        f"{window:.6g} s each)"
    )
