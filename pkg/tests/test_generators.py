import numpy as np
import pytest

import spinsched as ss
from spinsched.errors import GenerationError
from spinsched.generate import SCHEME_POLICIES, canonical_chain, canonical_full

from conftest import loose_policy, random_chain_system, random_full_system


def flip_counts(schedule, system):
    m = ss.sign_matrix(schedule, system)
    return {
        l: int(np.sum(m.row(l)[1:] != m.row(l)[:-1])) for l in system.labels
    }


def coupling_gate(system, i=0, k=1, n=0):
    return ss.GateSpec(
        kind="coupling-evolution",
        active=(system.labels[i], system.labels[k]),
        n=n,
        n_parity="any",
    )


# -- doubling cascade (dense coupling) -------------------------------------------


def test_full_coupling_five_spins_matches_cascade_counts(fully5, policy_full):
    gate = ss.GateSpec(
        kind="coupling-evolution", active=("I", "S"), n=0, n_parity="even"
    )
    sched = ss.generate("full-coupling", fully5, gate, policy_full)
    assert sched.segments == 8
    counts = flip_counts(sched, fully5)
    assert counts == {"I": 0, "S": 0, "R": 1, "Q": 2, "T": 4}
    assert ss.verify_schedule(sched, fully5, policy_full).passed


def test_full_coupling_no_spectators_two_bare_segments(policy_full):
    sysx = ss.build_system(
        [("A", -30.0), ("B", 40.0)], {("A", "B"): 9.0}, {("A", "B"): 2}
    )
    sched = ss.generate("full-coupling", sysx, coupling_gate(sysx), policy_full)
    assert sched.segments == 2
    assert sched.soft_events() == ()
    assert ss.verify_schedule(sysx and sched, sysx, policy_full).passed


def test_full_coupling_rows_are_mutually_orthogonal_walsh_rows(policy_full):
    sysx = canonical_full(6)
    sched = ss.generate("full-coupling", sysx, coupling_gate(sysx), policy_full)
    m = ss.sign_matrix(sched, sysx)
    spect = [l for l in sysx.labels if l not in sched.gate.active]
    for i, a in enumerate(spect):
        assert m.row(a).sum() == 0
        for b in spect[i + 1 :]:
            assert int(m.row(a) @ m.row(b)) == 0
    # flip boundaries of distinct spectators never coincide
    used = [
        set(
            b
            for e in sched.soft_events()
            if a in e.targets and e.boundary < sched.segments
            for b in [e.boundary]
        )
        for a in spect
    ]
    for i in range(len(used)):
        for k in range(i + 1, len(used)):
            assert not (used[i] & used[k])


def test_shift_gate_reproduces_staggered_fixture_rows(fully4, policy_full):
    gate = ss.GateSpec(kind="shift-evolution", active=("I",))
    sched = ss.generate("full-coupling", fully4, gate, policy_full)
    assert sched.segments == 8
    m = ss.sign_matrix(sched, fully4)
    assert list(m.row("I")) == [1] * 8
    assert list(m.row("S")) == [1, 1, 1, 1, -1, -1, -1, -1]
    assert list(m.row("R")) == [1, 1, -1, -1, -1, -1, 1, 1]
    assert list(m.row("Q")) == [1, -1, -1, 1, 1, -1, -1, 1]
    assert ss.verify_schedule(sched, fully4, policy_full).passed


# -- chain schemes ---------------------------------------------------------------


def test_chain_3bond_nine_spins(chain9, policy_chain3):
    sched = ss.generate("chain-3bond", chain9, coupling_gate(chain9), policy_chain3)
    assert sched.segments == 16
    counts = flip_counts(sched, chain9)
    # one interior spin keeps a bare row, and cascades repeat in 1-2-4 steps
    assert counts["U"] == 0
    assert counts == {
        "I": 0, "S": 0, "R": 1, "Q": 2, "T": 4, "U": 0, "V": 1, "W": 2, "X": 4
    }
    assert ss.verify_schedule(sched, chain9, policy_chain3).passed


def test_chain_2bond_nine_spins_eight_segments(chain9, policy_chain2):
    sched = ss.generate("chain-2bond", chain9, coupling_gate(chain9), policy_chain2)
    assert sched.segments == 8
    assert ss.verify_schedule(sched, chain9, policy_chain2).passed


def test_chain_1bond_two_segments(chain9, policy_chain1):
    sched = ss.generate("chain-1bond", chain9, coupling_gate(chain9), policy_chain1)
    assert sched.segments == 2
    counts = flip_counts(sched, chain9)
    # alternating spins flip once at the midpoint; neighbours never together
    assert counts == {
        "I": 0, "S": 0, "R": 1, "Q": 0, "T": 1, "U": 0, "V": 1, "W": 0, "X": 1
    }
    assert ss.verify_schedule(sched, chain9, policy_chain1).passed


def test_paired_reproduces_inosine_pattern(
    inosine, policy_inosine, paired_schedule
):
    gate = ss.GateSpec(
        kind="coupling-evolution", active=("I", "S"), n=0, n_parity="even"
    )
    sched = ss.generate("paired", inosine, gate, policy_inosine)
    assert sched.to_dict() == paired_schedule.to_dict()
    m = ss.sign_matrix(sched, inosine)
    assert list(m.row("R")) == [1, -1, -1, -1, -1, 1, 1, 1]
    assert list(m.row("Q")) == [1, 1, 1, -1, -1, -1, -1, 1]
    assert list(m.row("T")) == [1] * 8
    assert list(m.row("U")) == [1, -1, -1, -1, -1, 1, 1, 1]


def test_paired_every_pulsed_spin_flips_in_pairs(chain9):
    policy = SCHEME_POLICIES["paired"]
    sysx = canonical_chain(9, "paired")
    sched = ss.generate("paired", sysx, coupling_gate(sysx), policy)
    counts = flip_counts(sched, sysx)
    for label, c in counts.items():
        assert c % 2 == 0
    assert sched.segments == 8


def test_branching_topology_rejected(policy_chain2):
    labels = ["a", "b", "c", "d"]
    # star topology: b bonded to a, c, d
    bonds = {("a", "b"): 1, ("b", "c"): 1, ("b", "d"): 1,
             ("a", "c"): 2, ("a", "d"): 2, ("c", "d"): 2}
    couplings = {("a", "b"): 20.0, ("b", "c"): 20.0, ("b", "d"): 20.0}
    sysx = ss.build_system(
        [(l, 60.0 * i) for i, l in enumerate(labels)], couplings, bonds
    )
    with pytest.raises(GenerationError, match="branch"):
        ss.generate("chain-2bond", sysx, coupling_gate(sysx), loose_policy("chain-2bond"))


def test_unhandled_demanded_pair_is_reported():
    """A long-range coupling the policy demands refocused defeats a chain
    scheme that cannot touch it: spins a full period apart share a flip
    pattern, so their mutual coupling never refocuses."""
    sysx = canonical_chain(9, "chain-2bond")
    couplings = dict(sysx.couplings)
    couplings[("s2", "s5")] = 8.0  # same flip class, three positions apart
    bad = ss.build_system(
        list(zip(sysx.labels, sysx.shifts)), couplings, dict(sysx.bonds)
    )
    with pytest.raises(GenerationError, match="s2/s5"):
        ss.generate("chain-2bond", bad, coupling_gate(bad), SCHEME_POLICIES["chain-2bond"])


def test_nonadjacent_active_pair_rejected(chain9, policy_chain2):
    gate = ss.GateSpec(kind="coupling-evolution", active=("I", "R"), n=0)
    sysx = ss.build_system(
        list(zip(chain9.labels, chain9.shifts)),
        {**chain9.couplings, ("I", "R"): 30.0},
        dict(chain9.bonds),
    )
    with pytest.raises(GenerationError, match="adjacent"):
        ss.generate("chain-2bond", sysx, gate, policy_chain2)


def test_generators_deterministic(chain9, policy_chain3):
    g = coupling_gate(chain9)
    a = ss.generate("chain-3bond", chain9, g, policy_chain3)
    b = ss.generate("chain-3bond", chain9, g, policy_chain3)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("scheme", ("chain-3bond", "chain-2bond", "chain-1bond"))
def test_random_chains_and_gate_placements_verify(scheme):
    """Generated schedules pass verification for random lengths and for
    active pairs at the end or the interior of the chain."""
    rng = np.random.default_rng(20240811)
    policy = loose_policy(scheme)
    for _ in range(25):
        n = int(rng.integers(3, 16))
        sysx = random_chain_system(rng, n, scheme)
        start = int(rng.integers(0, n - 1))
        gate = coupling_gate(sysx, start, start + 1)
        sched = ss.generate(scheme, sysx, gate, policy)
        rep = ss.verify_schedule(sched, sysx, policy, gate)
        assert rep.passed, (scheme, n, start, [str(v) for v in rep.violations])
        # coupling gates keep the active rows constant, so T_active = total
        m = ss.sign_matrix(sched, sysx)
        for a in gate.active:
            assert np.all(m.row(a) == 1)


def test_random_full_coupling_verifies():
    rng = np.random.default_rng(77)
    policy = loose_policy("full-coupling")
    for _ in range(10):
        n = int(rng.integers(3, 7))
        sysx = random_full_system(rng, n)
        pair = sorted(rng.choice(n, size=2, replace=False))
        gate = coupling_gate(sysx, int(pair[0]), int(pair[1]))
        sched = ss.generate("full-coupling", sysx, gate, policy)
        assert ss.verify_schedule(sched, sysx, policy, gate).passed


def test_paired_interior_gate_errors_when_rest_spin_is_near(policy_chain2):
    """The eight-segment paired arrangement has no spare flip pattern that
    avoids its own boundaries, so an interior gate whose neighbourhood needs
    one is refused rather than silently mishandled."""
    sysx = canonical_chain(9, "paired")
    gate = coupling_gate(sysx, 3, 4)
    with pytest.raises(GenerationError):
        ss.generate("paired", sysx, gate, SCHEME_POLICIES["paired"])


# -- scaling report ----------------------------------------------------------------


def test_full_coupling_segments_double_per_added_spin():
    rows = ss.pulse_count_report("full-coupling", range(3, 7))
    segs = [seg for _, seg, _ in rows]
    softs = [c for _, _, c in rows]
    for a, b in zip(segs, segs[1:]):
        assert b == 2 * a
    for a, b in zip(softs, softs[1:]):
        assert b >= 2 * a


@pytest.mark.parametrize(
    "scheme,expected_segments", [("chain-3bond", 16), ("chain-2bond", 8), ("chain-1bond", 2)]
)
def test_chain_segments_constant_up_to_fifteen(scheme, expected_segments):
    rows = ss.pulse_count_report(scheme, range(3, 16))
    assert all(seg == expected_segments for _, seg, _ in rows)


@pytest.mark.parametrize(
    "scheme,period", [("chain-3bond", 4), ("chain-2bond", 3), ("chain-1bond", 2)]
)
def test_chain_counts_grow_linearly_per_group(scheme, period):
    rows = ss.pulse_count_report(scheme, range(3, 16))
    counts = {n: c for n, _, c in rows}
    diffs = {
        counts[n + period] - counts[n]
        for n in range(3, 16 - period)
    }
    assert len(diffs) == 1  # one added group always costs the same


def test_chain_2bond_five_to_seven_first_differences_equal():
    rows = ss.pulse_count_report("chain-2bond", range(5, 8))
    counts = [c for _, _, c in rows]
    assert counts[1] - counts[0] == counts[2] - counts[1]
