"""Molecular spin-system model: labels, shifts, couplings and bond topology.

Chemical shifts are stored as offsets in Hz from a nominal carrier.  A file
may give shifts in ppm instead, in which case the spectrometer frequency is
required and the conversion happens once at load time; everything downstream
works in Hz and seconds.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError


def pair_key(a: str, b: str) -> tuple[str, str]:
    """Canonical unordered pair key (lexicographic)."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class SpinSystem:
    """An immutable molecule description.

    Attributes
    ----------
    labels : tuple of str
        Spin labels in system order.
    shifts : tuple of float
        Offset of each spin from the carrier, Hz.
    couplings : dict
        Symmetric scalar couplings in Hz, keyed by canonical label pair.
        Absent entries mean J = 0.
    bonds : dict
        Chemical-bond counts between spin pairs.  Absent entries are treated
        as effectively infinite (far apart).
    spectrometer_mhz : float or None
        Metadata only; required to convert ppm shifts at load time.
    """

    labels: tuple[str, ...]
    shifts: tuple[float, ...]
    couplings: dict = field(default_factory=dict)
    bonds: dict = field(default_factory=dict)
    spectrometer_mhz: float | None = None

    def __post_init__(self):
        if len(self.labels) < 1:
            raise ValidationError("a spin system needs at least one spin")
        if len(set(self.labels)) != len(self.labels):
            dupes = sorted({l for l in self.labels if self.labels.count(l) > 1})
            raise ValidationError(f"duplicate spin label(s): {', '.join(dupes)}")
        if len(self.shifts) != len(self.labels):
            raise ValidationError("one shift per spin is required")
        known = set(self.labels)
        for (a, b), j in self.couplings.items():
            if a == b:
                raise ValidationError(f"self-coupling on spin {a!r}")
            if a not in known or b not in known:
                raise ValidationError(f"coupling references unknown pair ({a}, {b})")
            if pair_key(a, b) != (a, b):
                raise ValidationError(f"coupling key ({a}, {b}) is not canonical")
        for (a, b), nb in self.bonds.items():
            if a == b:
                raise ValidationError(f"self-pair in bonds on spin {a!r}")
            if a not in known or b not in known:
                raise ValidationError(f"bond entry references unknown pair ({a}, {b})")
            if int(nb) < 1:
                raise ValidationError(f"bond count for ({a}, {b}) must be >= 1, got {nb}")

    # -- accessors ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown spin label {label!r}") from None

    def shift(self, label: str) -> float:
        return self.shifts[self.index(label)]

    def j(self, a: str, b: str) -> float:
        self.index(a), self.index(b)
        return self.couplings.get(pair_key(a, b), 0.0)

    def bond_distance(self, a: str, b: str):
        """Bond count between two spins, or None when unlisted (far)."""
        self.index(a), self.index(b)
        return self.bonds.get(pair_key(a, b))

    def all_pairs(self):
        for i, a in enumerate(self.labels):
            for b in self.labels[i + 1 :]:
                yield pair_key(a, b)


@dataclass(frozen=True)
class CouplingPolicy:
    """Which couplings matter and when simultaneous soft pulses are allowed.

    j_threshold : minimum |J| in Hz that must be refocused.
    min_sim_bond : minimum bond separation allowing simultaneous soft pulses.
    min_sim_freq : minimum shift separation in Hz allowing simultaneous
        soft pulses.
    """

    j_threshold: float
    min_sim_bond: int
    min_sim_freq: float

    def __post_init__(self):
        if self.j_threshold < 0 or self.min_sim_bond < 0 or self.min_sim_freq < 0:
            raise ValidationError("policy fields must be non-negative")

    @classmethod
    def from_dict(cls, raw) -> "CouplingPolicy":
        try:
            return cls(
                j_threshold=float(raw["j_threshold"]),
                min_sim_bond=int(raw["min_sim_bond"]),
                min_sim_freq=float(raw["min_sim_freq"]),
            )
        except KeyError as exc:
            raise ValidationError(f"policy is missing field {exc}") from None

    def to_dict(self) -> dict:
        return {
            "j_threshold": self.j_threshold,
            "min_sim_bond": self.min_sim_bond,
            "min_sim_freq": self.min_sim_freq,
        }


GATE_KINDS = ("shift-evolution", "coupling-evolution")
N_PARITIES = ("any", "even", "odd")


@dataclass(frozen=True)
class GateSpec:
    """What the schedule is meant to implement.

    kind "shift-evolution" evolves one active spin under its chemical shift;
    "coupling-evolution" evolves an active pair under their scalar coupling
    for (2n+1)/(2J) seconds.  n_parity constrains which n a packer may pick.
    """

    kind: str
    active: tuple[str, ...]
    n: int = 0
    n_parity: str = "any"

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        if self.n_parity not in N_PARITIES:
            raise ValidationError(f"unknown n parity {self.n_parity!r}")
        want = 1 if self.kind == "shift-evolution" else 2
        if len(self.active) != want or len(set(self.active)) != len(self.active):
            raise ValidationError(
                f"{self.kind} needs {want} distinct active spin(s), got {self.active}"
            )
        if self.n < 0:
            raise ValidationError("n must be non-negative")
        if self.n_parity == "even" and self.n % 2 == 1:
            raise ValidationError(f"n={self.n} conflicts with even parity")
        if self.n_parity == "odd" and self.n % 2 == 0:
            raise ValidationError(f"n={self.n} conflicts with odd parity")

    def allows(self, n: int) -> bool:
        if self.n_parity == "even":
            return n % 2 == 0
        if self.n_parity == "odd":
            return n % 2 == 1
        return True

    def validate_for(self, system: SpinSystem, policy: CouplingPolicy | None = None):
        for label in self.active:
            system.index(label)
        if self.kind == "coupling-evolution" and policy is not None:
            j = abs(system.j(*self.active))
            if j < policy.j_threshold or j == 0.0:
                raise ValidationError(
                    f"active pair {self.active} has |J|={j} Hz below the "
                    f"policy threshold {policy.j_threshold} Hz"
                )

    def spectators(self, system: SpinSystem) -> tuple[str, ...]:
        return tuple(l for l in system.labels if l not in self.active)

    @classmethod
    def from_dict(cls, raw) -> "GateSpec":
        try:
            return cls(
                kind=str(raw["kind"]),
                active=tuple(raw["active"]),
                n=int(raw.get("n", 0)),
                n_parity=str(raw.get("n_parity", "any")),
            )
        except KeyError as exc:
            raise ValidationError(f"gate is missing field {exc}") from None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "active": list(self.active),
            "n": self.n,
            "n_parity": self.n_parity,
        }


# -- construction and validation -------------------------------------------


def validate_system(raw) -> SpinSystem:
    """Build a SpinSystem from a raw description, completing symmetry.

    The raw mapping follows the spin-system file schema: ``spins`` is a list
    of {label, shift_hz} (or {label, shift_ppm} when ``spectrometer_mhz`` is
    present), ``couplings`` a list of {a, b, j_hz} and ``bonds`` a list of
    {a, b, n_bonds}.  Pairs may be listed in either order; listing a pair
    twice with conflicting values is an error.
    """
    if isinstance(raw, SpinSystem):
        return raw
    try:
        spin_entries = list(raw["spins"])
    except (KeyError, TypeError):
        raise ValidationError("system description needs a 'spins' array") from None
    mhz = raw.get("spectrometer_mhz")
    labels, shifts = [], []
    for entry in spin_entries:
        label = str(entry["label"])
        if "shift_hz" in entry:
            shift = float(entry["shift_hz"])
        elif "shift_ppm" in entry:
            if mhz is None:
                raise ValidationError(
                    f"spin {label!r} gives shift_ppm but spectrometer_mhz is unset"
                )
            shift = float(entry["shift_ppm"]) * float(mhz)
        else:
            raise ValidationError(f"spin {label!r} has no shift_hz or shift_ppm")
        labels.append(label)
        shifts.append(shift)

    def collect(entries, value_field, cast, what):
        out = {}
        for e in entries:
            a, b = str(e["a"]), str(e["b"])
            if a == b:
                raise ValidationError(f"self-{what} on spin {a!r}")
            key = pair_key(a, b)
            val = cast(e[value_field])
            if key in out and out[key] != val:
                raise ValidationError(
                    f"conflicting {what} entries for pair {key}: "
                    f"{out[key]} vs {val}"
                )
            out[key] = val
        return out

    couplings = collect(raw.get("couplings", []), "j_hz", float, "coupling")
    bonds = collect(raw.get("bonds", []), "n_bonds", int, "bond")
    return SpinSystem(
        labels=tuple(labels),
        shifts=tuple(shifts),
        couplings=couplings,
        bonds=bonds,
        spectrometer_mhz=None if mhz is None else float(mhz),
    )


def system_to_dict(system: SpinSystem) -> dict:
    out = {
        "spins": [
            {"label": l, "shift_hz": s} for l, s in zip(system.labels, system.shifts)
        ],
        "couplings": [
            {"a": a, "b": b, "j_hz": j}
            for (a, b), j in sorted(system.couplings.items())
        ],
        "bonds": [
            {"a": a, "b": b, "n_bonds": nb}
            for (a, b), nb in sorted(system.bonds.items())
        ],
    }
    if system.spectrometer_mhz is not None:
        out["spectrometer_mhz"] = system.spectrometer_mhz
    return out


def load_system(path) -> SpinSystem:
    with open(Path(path), "r", encoding="utf-8") as fh:
        return validate_system(json.load(fh))


def build_system(spins, couplings=None, bonds=None, spectrometer_mhz=None) -> SpinSystem:
    """Convenience constructor from (label, shift) pairs and pair maps."""
    return SpinSystem(
        labels=tuple(l for l, _ in spins),
        shifts=tuple(float(s) for _, s in spins),
        couplings={pair_key(a, b): float(j) for (a, b), j in (couplings or {}).items()},
        bonds={pair_key(a, b): int(nb) for (a, b), nb in (bonds or {}).items()},
        spectrometer_mhz=spectrometer_mhz,
    )


def refocus_pairs(system: SpinSystem, policy: CouplingPolicy) -> frozenset:
    """Pairs whose coupling the verifier must see refocused (or evolved).

    Exactly the stored coupling entries with |J| at or above the policy
    threshold.  Monotone non-increasing in the threshold.
    """
    return frozenset(
        key for key, j in system.couplings.items() if abs(j) >= policy.j_threshold
    )
