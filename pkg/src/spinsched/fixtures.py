"""Bundled example systems, schedules and policies.

Everything here ships inside the package so the command line and the test
suite can exercise realistic inputs without touching the network or the
repository layout.
"""
from __future__ import annotations

import json
from importlib import resources

from .schedule import Schedule
from .spin_model import CouplingPolicy, SpinSystem, validate_system

SYSTEMS = ("inosine", "inosine_fiction", "chain9", "fully4", "fully5")
SCHEDULES = ("colliding_hadamard4", "staggered_cascade8", "inosine_paired8")
POLICIES = (
    "policy_inosine",
    "policy_allpairs",
    "policy_full",
    "policy_chain3",
    "policy_chain2",
    "policy_chain1",
)


def fixture_path(name: str):
    """Filesystem path of a bundled fixture (without the .json suffix)."""
    return resources.files("spinsched").joinpath("data", f"{name}.json")


def _load(name: str) -> dict:
    with resources.files("spinsched").joinpath("data", f"{name}.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return json.load(fh)


def load_fixture_system(name: str) -> SpinSystem:
    return validate_system(_load(name))


def load_fixture_schedule(name: str) -> Schedule:
    return Schedule.from_dict(_load(name))


def load_fixture_policy(name: str) -> CouplingPolicy:
    return CouplingPolicy.from_dict(_load(name))
