import numpy as np
import pytest

import spinsched as ss
from spinsched.fixtures import (
    load_fixture_policy,
    load_fixture_schedule,
    load_fixture_system,
)


@pytest.fixture(scope="session")
def inosine():
    return load_fixture_system("inosine")


@pytest.fixture(scope="session")
def inosine_fiction():
    return load_fixture_system("inosine_fiction")


@pytest.fixture(scope="session")
def chain9():
    return load_fixture_system("chain9")


@pytest.fixture(scope="session")
def fully4():
    return load_fixture_system("fully4")


@pytest.fixture(scope="session")
def fully5():
    return load_fixture_system("fully5")


@pytest.fixture(scope="session")
def colliding_schedule():
    return load_fixture_schedule("colliding_hadamard4")


@pytest.fixture(scope="session")
def staggered_schedule():
    return load_fixture_schedule("staggered_cascade8")


@pytest.fixture(scope="session")
def paired_schedule():
    return load_fixture_schedule("inosine_paired8")


@pytest.fixture(scope="session")
def policy_inosine():
    return load_fixture_policy("policy_inosine")


@pytest.fixture(scope="session")
def policy_allpairs():
    return load_fixture_policy("policy_allpairs")


@pytest.fixture(scope="session")
def policy_full():
    return load_fixture_policy("policy_full")


@pytest.fixture(scope="session")
def policy_chain3():
    return load_fixture_policy("policy_chain3")


@pytest.fixture(scope="session")
def policy_chain2():
    return load_fixture_policy("policy_chain2")


@pytest.fixture(scope="session")
def policy_chain1():
    return load_fixture_policy("policy_chain1")


@pytest.fixture(scope="session")
def coupled_pair():
    """Two coupled spins on resonance, the artifact-metric workhorse."""
    return ss.build_system(
        [("A", 0.0), ("B", 0.0)], {("A", "B"): 12.4}, {("A", "B"): 2}
    )


def random_chain_system(rng, n, scheme):
    """Randomized chain carrying couplings only inside the scheme's range."""
    reach = {"chain-3bond": 3, "chain-2bond": 2, "chain-1bond": 1, "paired": 2}[scheme]
    labels = [f"s{i}" for i in range(n)]
    shifts = rng.uniform(-420.0, 420.0, size=n)
    spins = list(zip(labels, shifts))
    couplings, bonds = {}, {}
    for i in range(n):
        for k in range(i + 1, n):
            d = k - i
            bonds[(labels[i], labels[k])] = d
            if d <= reach:
                couplings[(labels[i], labels[k])] = float(
                    rng.uniform(2.0, 40.0) / d
                )
    return ss.build_system(spins, couplings, bonds)


def random_full_system(rng, n):
    labels = [f"s{i}" for i in range(n)]
    shifts = rng.uniform(-420.0, 420.0, size=n)
    spins = list(zip(labels, shifts))
    couplings, bonds = {}, {}
    for i in range(n):
        for k in range(i + 1, n):
            couplings[(labels[i], labels[k])] = float(rng.uniform(1.0, 15.0))
            bonds[(labels[i], labels[k])] = 2
    return ss.build_system(spins, couplings, bonds)


def loose_policy(scheme):
    """Scheme policy with the frequency criterion relaxed for random shifts."""
    base = {
        "full-coupling": (0.5, 1000),
        "chain-3bond": (0.5, 4),
        "chain-2bond": (0.5, 3),
        "chain-1bond": (0.5, 2),
        "paired": (0.5, 3),
    }[scheme]
    return ss.CouplingPolicy(
        j_threshold=base[0], min_sim_bond=base[1], min_sim_freq=0.0
    )
