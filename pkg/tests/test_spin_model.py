import json

import pytest

import spinsched as ss
from spinsched.errors import ValidationError
from spinsched.spin_model import system_to_dict, validate_system


def test_single_spin_system_is_valid():
    sys1 = validate_system({"spins": [{"label": "A", "shift_hz": 10.0}]})
    assert sys1.n == 1
    assert sys1.shift("A") == 10.0
    assert sys1.couplings == {}


def test_one_sided_coupling_entry_completes_symmetrically():
    raw = {
        "spins": [{"label": "A", "shift_hz": 0.0}, {"label": "B", "shift_hz": 5.0}],
        "couplings": [{"a": "B", "b": "A", "j_hz": 12.4}],
    }
    sys2 = validate_system(raw)
    assert sys2.j("A", "B") == 12.4
    assert sys2.j("B", "A") == 12.4


def test_duplicate_label_is_rejected_by_name():
    raw = {"spins": [{"label": "I", "shift_hz": 0.0}, {"label": "I", "shift_hz": 1.0}]}
    with pytest.raises(ValidationError, match="I"):
        validate_system(raw)


def test_conflicting_coupling_entries_are_rejected():
    raw = {
        "spins": [{"label": "A", "shift_hz": 0.0}, {"label": "B", "shift_hz": 5.0}],
        "couplings": [
            {"a": "A", "b": "B", "j_hz": 12.4},
            {"a": "B", "b": "A", "j_hz": 9.9},
        ],
    }
    with pytest.raises(ValidationError, match="conflicting"):
        validate_system(raw)


def test_self_coupling_and_bad_bond_rejected():
    spins = [{"label": "A", "shift_hz": 0.0}, {"label": "B", "shift_hz": 5.0}]
    with pytest.raises(ValidationError, match="self-coupling"):
        validate_system(
            {"spins": spins, "couplings": [{"a": "A", "b": "A", "j_hz": 1.0}]}
        )
    with pytest.raises(ValidationError, match=">= 1"):
        validate_system(
            {"spins": spins, "bonds": [{"a": "A", "b": "B", "n_bonds": 0}]}
        )


def test_ppm_shift_conversion_needs_spectrometer():
    spins = [{"label": "A", "shift_ppm": 2.0}]
    with pytest.raises(ValidationError, match="spectrometer_mhz"):
        validate_system({"spins": spins})
    sysp = validate_system({"spins": spins, "spectrometer_mhz": 600.0})
    assert sysp.shift("A") == pytest.approx(1200.0)


def test_validate_system_idempotent_on_valid_systems(inosine):
    again = validate_system(system_to_dict(inosine))
    assert again == inosine
    assert system_to_dict(again) == system_to_dict(inosine)


def test_absent_bond_distance_means_far(inosine):
    sysx = ss.build_system([("A", 0.0), ("B", 5.0)])
    assert sysx.bond_distance("A", "B") is None


@pytest.mark.parametrize(
    "threshold,expected",
    [
        (0.5, True),   # documented geminal coupling stays
        (12.4, True),  # threshold is inclusive
        (12.5, False),
    ],
)
def test_refocus_pairs_threshold(inosine, threshold, expected):
    policy = ss.CouplingPolicy(threshold, 4, 20.0)
    pairs = ss.refocus_pairs(inosine, policy)
    assert (("I", "S") in pairs) is expected


def test_refocus_pairs_untracked_pair_excluded(inosine):
    policy = ss.CouplingPolicy(0.5, 4, 20.0)
    pairs = ss.refocus_pairs(inosine, policy)
    # the two parallel-row pairs carry no stored coupling at all
    assert ("I", "T") not in pairs
    assert ("S", "T") not in pairs


def test_refocus_pairs_empty_when_no_couplings_stored():
    sysx = ss.build_system([("A", 0.0), ("B", 5.0), ("C", 10.0)])
    assert ss.refocus_pairs(sysx, ss.CouplingPolicy(0.0, 1, 0.0)) == frozenset()


def test_refocus_pairs_monotone_in_threshold(chain9):
    prev = None
    for thr in (0.0, 1.0, 2.0, 4.0, 10.0, 40.0):
        pairs = ss.refocus_pairs(chain9, ss.CouplingPolicy(thr, 4, 0.0))
        if prev is not None:
            assert pairs <= prev
        prev = pairs


def test_gate_spec_validation():
    with pytest.raises(ValidationError):
        ss.GateSpec(kind="coupling-evolution", active=("I",))
    with pytest.raises(ValidationError):
        ss.GateSpec(kind="shift-evolution", active=("I", "S"))
    with pytest.raises(ValidationError):
        ss.GateSpec(kind="coupling-evolution", active=("I", "S"), n=1, n_parity="even")
    g = ss.GateSpec(kind="coupling-evolution", active=("I", "S"), n=6, n_parity="even")
    assert g.allows(0) and g.allows(6) and not g.allows(3)


def test_gate_below_threshold_pair_rejected(inosine):
    g = ss.GateSpec(kind="coupling-evolution", active=("I", "T"))
    with pytest.raises(ValidationError, match="threshold"):
        g.validate_for(inosine, ss.CouplingPolicy(0.5, 4, 20.0))


def test_policy_fields_non_negative():
    with pytest.raises(ValidationError):
        ss.CouplingPolicy(-1.0, 4, 0.0)


def test_system_file_roundtrip(tmp_path, chain9):
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(system_to_dict(chain9)), encoding="utf-8")
    assert ss.load_system(path) == chain9
