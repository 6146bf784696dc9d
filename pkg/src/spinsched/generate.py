"""Schedule generators for the supported refocusing schemes.

Every generator realizes its target sign pattern with soft pulses only and
finishes with a uniform parity-completion step: each spin left with an odd
pulse count receives one extra soft pulse at the terminal boundary, which is
evolution free, so every spin's pulses come in imperfection-compensating
pairs without touching the sign matrix.  Output schedules are verified
internally and generation fails loudly if any constraint is violated.

Scheme summary (coupling gate on an adjacent pair, m spectators):

  full-coupling   max(2, 2^m) segments; spectator k gets the square-wave row
                  with 2^k sign changes, so all rows are mutually orthogonal
                  and flip boundaries of distinct spectators never coincide.
  chain-3bond     16 segments for any chain length; spins are coloured by
                  chain position modulo 4 into flip classes {1, 2, 4, none},
                  so same-class spins repeat only every fourth position.
  chain-2bond     8 segments, position modulo 3, flip classes {1, 2, none}.
  chain-1bond     2 segments; spins at odd chain distance from the active
                  spin(s) get a single pulse at the midpoint.
  paired          8 segments; the chain-2bond classes re-expressed with every
                  pulsed spin flipping exactly twice (boundaries {1,5} or
                  {3,7}), the arrangement used for the six-proton example.
"""
from __future__ import annotations

from .errors import GenerationError
from .schedule import PulseEvent, Schedule, verify_schedule
from .spin_model import (
    CouplingPolicy,
    GateSpec,
    SpinSystem,
    build_system,
    pair_key,
    refocus_pairs,
)

SCHEMES = ("full-coupling", "chain-3bond", "chain-2bond", "chain-1bond", "paired")


def _walsh_flips(k: int, segments: int) -> tuple[int, ...]:
    """Boundaries of the square-wave row with 2^k sign changes.

    Flips sit at the odd multiples of segments / 2^(k+1), so rows of
    different k never share a boundary.
    """
    step = segments // (2 ** (k + 1))
    return tuple(b for b in range(step, segments, 2 * step) if (b // step) % 2 == 1)


def chain_order(system: SpinSystem) -> tuple[str, ...]:
    """Spins ordered along an unbranched chain, derived from bond distances.

    The chain ends are the most widely separated pair in the bond map; spins
    are then sorted by bond distance from one end.  Carbon-style chains
    (neighbours one bond apart) and proton chains (vicinal neighbours three
    bonds apart) both order correctly.  Ties among spectator spins indicate
    branching and are rejected.
    """
    if system.n == 1:
        return system.labels
    if not system.bonds:
        if system.n == 2:
            return system.labels
        raise GenerationError("chain schemes need a bond map")
    far_pair = max(
        sorted(system.bonds),
        key=lambda p: (system.bonds[p], -system.index(p[0]), -system.index(p[1])),
    )
    start = min(far_pair, key=system.index)
    dist = {}
    for label in system.labels:
        if label == start:
            dist[label] = 0
            continue
        d = system.bond_distance(start, label)
        if d is None:
            raise GenerationError(
                f"no bond distance between chain end {start!r} and {label!r}"
            )
        dist[label] = d
    order = tuple(sorted(system.labels, key=lambda l: (dist[l], system.index(l))))
    seen: dict[int, str] = {}
    for label in order:
        if dist[label] in seen:
            raise GenerationError(
                f"spins {seen[dist[label]]!r} and {label!r} are both {dist[label]} "
                f"bond(s) from {start!r}; the topology branches"
            )
        seen[dist[label]] = label
    return order


def _oriented_chain(system: SpinSystem, gate: GateSpec) -> tuple[str, ...]:
    """Chain order oriented so the active spin(s) sit as early as possible."""
    order = chain_order(system)
    pos = {l: i for i, l in enumerate(order)}
    flipped = tuple(reversed(order))
    fpos = {l: i for i, l in enumerate(flipped)}
    if sorted(fpos[a] for a in gate.active) < sorted(pos[a] for a in gate.active):
        return flipped
    return order


def _check_adjacent_pair(order, gate: GateSpec):
    if gate.kind == "coupling-evolution":
        pos = {l: i for i, l in enumerate(order)}
        a, b = (pos[x] for x in gate.active)
        if abs(a - b) != 1:
            raise GenerationError(
                f"active pair {gate.active} is not adjacent in the chain"
            )


def _events_from_flips(flips_by_spin: dict) -> list[PulseEvent]:
    """Merge per-spin flip boundaries into multi-target events per boundary."""
    by_boundary: dict[int, list] = {}
    for label, flips in flips_by_spin.items():
        for b in flips:
            by_boundary.setdefault(b, []).append(label)
    return [
        PulseEvent(boundary=b, targets=tuple(sorted(spins)), kind="soft", axis="x")
        for b, spins in sorted(by_boundary.items())
    ]


def _complete_parity(events: list[PulseEvent], segments: int) -> list[PulseEvent]:
    counts: dict[str, int] = {}
    for e in events:
        for t in e.targets:
            counts[t] = counts.get(t, 0) + 1
    odd = sorted(t for t, c in counts.items() if c % 2 == 1)
    if odd:
        events = events + [
            PulseEvent(boundary=segments, targets=tuple(odd), kind="soft", axis="x")
        ]
    return events


def _build_full(system: SpinSystem, gate: GateSpec, policy: CouplingPolicy):
    spectators = gate.spectators(system)
    segments = max(2, 2 ** len(spectators))
    flips = {label: _walsh_flips(k, segments) for k, label in enumerate(spectators)}
    return segments, flips


def _build_chain(
    system: SpinSystem,
    gate: GateSpec,
    policy: CouplingPolicy,
    segments: int,
    period: int,
    cascade: list,
    spare: tuple | None,
):
    """Colour chain positions modulo `period` and hand out cascade rows.

    The class mapped to no pulses may not keep an above-threshold coupling to
    an active spin, because a constant row cannot refocus anything; such
    spins get the spare square-wave row on otherwise unused boundaries when
    the scheme has one.
    """
    order = _oriented_chain(system, gate)
    _check_adjacent_pair(order, gate)
    pos = {l: i for i, l in enumerate(order)}
    anchor = max(pos[a] for a in gate.active) + 1
    refpairs = refocus_pairs(system, policy)
    flips = {}
    for label in order:
        if label in gate.active:
            continue
        role = (pos[label] - anchor) % period
        if role < len(cascade):
            flips[label] = cascade[role]
            continue
        couples_active = any(
            pair_key(label, a) in refpairs for a in gate.active
        )
        if couples_active:
            if spare is None:
                raise GenerationError(
                    f"spin {label!r} keeps an above-threshold coupling to "
                    f"the active spin(s) but the scheme has no flip pattern "
                    "left for it"
                )
            flips[label] = spare
        else:
            flips[label] = ()
    return segments, flips


def _build_chain_1bond(system: SpinSystem, gate: GateSpec, policy: CouplingPolicy):
    order = _oriented_chain(system, gate)
    _check_adjacent_pair(order, gate)
    pos = {l: i for i, l in enumerate(order)}
    flips = {}
    for label in order:
        if label in gate.active:
            continue
        d = min(abs(pos[label] - pos[a]) for a in gate.active)
        flips[label] = (1,) if d % 2 == 1 else ()
    return 2, flips


def _scheme_builder(scheme: str):
    if scheme == "full-coupling":
        return _build_full
    if scheme == "chain-3bond":
        return lambda s, g, p: _build_chain(
            s, g, p, 16, 4,
            [_walsh_flips(0, 16), _walsh_flips(1, 16), _walsh_flips(2, 16)],
            spare=_walsh_flips(3, 16),
        )
    if scheme == "chain-2bond":
        return lambda s, g, p: _build_chain(
            s, g, p, 8, 3,
            [_walsh_flips(0, 8), _walsh_flips(1, 8)],
            spare=_walsh_flips(2, 8),
        )
    if scheme == "chain-1bond":
        return _build_chain_1bond
    if scheme == "paired":
        # chain-2bond classes with each single-flip row replaced by a
        # two-flip row, so every pulsed spin gets its pulses in pairs
        return lambda s, g, p: _build_chain(
            s, g, p, 8, 3, [(1, 5), (3, 7)], spare=_walsh_flips(2, 8)
        )
    raise GenerationError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def generate(
    scheme: str, system: SpinSystem, gate: GateSpec, policy: CouplingPolicy
) -> Schedule:
    """Produce a schedule for the scheme, verified against the policy.

    Deterministic: identical inputs give an identical schedule.  Raises
    GenerationError when the scheme's neglect assumptions conflict with the
    couplings the policy demands refocused, naming the offending pair.
    """
    gate.validate_for(system, policy)
    if scheme == "paired" and gate.kind == "shift-evolution":
        raise GenerationError("the paired scheme supports coupling gates only")
    segments, flips = _scheme_builder(scheme)(system, gate, policy)
    events = _complete_parity(_events_from_flips(flips), segments)
    schedule = Schedule(segments=segments, events=tuple(events), gate=gate)
    report = verify_schedule(schedule, system, policy, gate)
    if not report.passed:
        lines = "; ".join(
            f"{v.rule} {'/'.join(v.spins)}"
            + (f" @ boundary {v.boundary}" if v.boundary is not None else "")
            for v in report.violations
        )
        raise GenerationError(
            f"scheme {scheme!r} cannot satisfy the policy on this system: {lines}"
        )
    return schedule


# -- scaling report ------------------------------------------------------------

SCHEME_POLICIES = {
    "full-coupling": CouplingPolicy(j_threshold=0.5, min_sim_bond=1000, min_sim_freq=0.0),
    "chain-3bond": CouplingPolicy(j_threshold=0.5, min_sim_bond=4, min_sim_freq=0.0),
    "chain-2bond": CouplingPolicy(j_threshold=3.0, min_sim_bond=3, min_sim_freq=0.0),
    "chain-1bond": CouplingPolicy(j_threshold=10.0, min_sim_bond=2, min_sim_freq=0.0),
    "paired": CouplingPolicy(j_threshold=3.0, min_sim_bond=3, min_sim_freq=0.0),
}

# canonical coupling sizes by bond separation for synthetic carbon-style chains
_CHAIN_J = {1: 34.0, 2: 4.5, 3: 2.1}


def canonical_chain(n: int, scheme: str) -> SpinSystem:
    """Synthetic n-spin chain carrying only couplings the scheme refocuses."""
    threshold = SCHEME_POLICIES[scheme].j_threshold
    labels = [f"s{i}" for i in range(n)]
    spins = [(l, 60.0 * (i - (n - 1) / 2.0)) for i, l in enumerate(labels)]
    couplings, bonds = {}, {}
    for i in range(n):
        for k in range(i + 1, n):
            d = k - i
            bonds[(labels[i], labels[k])] = d
            j = _CHAIN_J.get(d, 0.0)
            if j >= threshold:
                couplings[(labels[i], labels[k])] = j
    return build_system(spins, couplings, bonds)


def canonical_full(n: int) -> SpinSystem:
    """Synthetic fully-coupled n-spin system."""
    labels = [f"s{i}" for i in range(n)]
    spins = [(l, 60.0 * (i - (n - 1) / 2.0)) for i, l in enumerate(labels)]
    couplings, bonds = {}, {}
    for i in range(n):
        for k in range(i + 1, n):
            couplings[(labels[i], labels[k])] = 2.0 + (k - i)
            bonds[(labels[i], labels[k])] = 2
    return build_system(spins, couplings, bonds)


def soft_pulse_total(schedule: Schedule) -> int:
    """Soft pi pulses applied, counting each target of each event."""
    return sum(len(e.targets) for e in schedule.soft_events())


def pulse_count_report(scheme: str, n_range) -> list[tuple[int, int, int]]:
    """Rows of (N, segments, soft pulse count) for a coupling gate on the
    first two spins of the canonical system of each size."""
    rows = []
    for n in n_range:
        if n < 2:
            raise GenerationError("need at least the two active spins")
        system = (
            canonical_full(n) if scheme == "full-coupling" else canonical_chain(n, scheme)
        )
        gate = GateSpec(
            kind="coupling-evolution",
            active=(system.labels[0], system.labels[1]),
            n=0,
            n_parity="any",
        )
        schedule = generate(scheme, system, gate, SCHEME_POLICIES[scheme])
        rows.append((n, schedule.segments, soft_pulse_total(schedule)))
    return rows
