"""Batch front door: compile, verify, pack, simulate and report.

Exit codes: 0 on success (and on a passing verification), 1 when a
verification or gate check fails, 2 on usage, schema or infeasibility
errors.  Outputs are deterministic byte for byte; pass --stamp to add a
timestamp to JSON metadata.
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import SpinschedError
from .generate import SCHEMES, generate, pulse_count_report
from .schedule import (
    Schedule,
    TimedLayout,
    antiphase_duration,
    load_schedule,
    pack_timed,
    verify_schedule,
)
from .simulate import PulseShape, simulate_gate, tsetse_metric
from .spectrum import (
    AcquisitionParams,
    simulate_spectrum,
    spectrum_to_csv,
    spectrum_to_svg,
)
from .spin_model import CouplingPolicy, GateSpec, load_system


def _json_arg(value: str) -> dict:
    """Accept either a JSON file path or an inline JSON object."""
    text = value
    p = Path(value)
    if not value.lstrip().startswith("{") and p.exists():
        text = p.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpinschedError(f"not valid JSON (or a JSON file): {value!r}: {exc}")


def _emit(payload: dict, args) -> None:
    if getattr(args, "stamp", False):
        payload = dict(payload)
        payload["stamped_at"] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(payload, indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_text(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_receiver_phase(spec: str | None) -> dict:
    out = {}
    if not spec:
        return out
    for part in spec.split(","):
        label, _, val = part.partition("=")
        if not _:
            raise SpinschedError(
                f"receiver phase entries look like LABEL=RADIANS, got {part!r}"
            )
        out[label.strip()] = float(val)
    return out


def cmd_compile(args) -> int:
    system = load_system(args.system)
    gate = GateSpec.from_dict(_json_arg(args.gate))
    policy = CouplingPolicy.from_dict(_json_arg(args.policy))
    schedule = generate(args.scheme, system, gate, policy)
    _emit(schedule.to_dict(), args)
    return 0


def cmd_verify(args) -> int:
    system = load_system(args.system)
    schedule = load_schedule(args.schedule)
    policy = CouplingPolicy.from_dict(_json_arg(args.policy))
    report = verify_schedule(schedule, system, policy)
    if args.json or args.out:
        _emit(report.to_dict(), args)
    if not args.json:
        status = "PASS" if report.passed else "FAIL"
        sys.stdout.write(
            f"{status}: refocus={report.refocus_ok} collision={report.collision_ok} "
            f"parity={report.parity_ok}\n"
        )
        for v in report.violations:
            where = "" if v.boundary is None else f" @ boundary {v.boundary}"
            sys.stdout.write(
                f"  {v.rule}: {'/'.join(v.spins)}{where}: {v.detail}\n"
            )
        if report.free_running:
            sys.stdout.write(
                "  free-running (receiver-reference) spins: "
                + ", ".join(report.free_running)
                + "\n"
            )
    return 0 if report.passed else 1


def cmd_pack(args) -> int:
    system = load_system(args.system)
    schedule = load_schedule(args.schedule)
    layout = pack_timed(
        schedule,
        system,
        pulse_len=args.pulse_ms / 1000.0,
        flank=args.flank_ms / 1000.0,
        mode=args.mode,
        phase_tol=args.phase_tol,
    )
    _emit(layout.to_dict(), args)
    return 0


def cmd_simulate_gate(args) -> int:
    system = load_system(args.system)
    schedule = load_schedule(args.schedule)
    layout = _layout_for(args, schedule, system)
    report = simulate_gate(
        schedule,
        system,
        layout=layout,
        coupling_model=args.coupling_model,
        pulse_model=args.pulse_model,
        steps_per_pulse=args.steps,
    )
    _emit(report.to_dict(), args)
    return 0 if report.passed else 1


def _layout_for(args, schedule: Schedule, system) -> TimedLayout:
    if getattr(args, "total_ms", None):
        return TimedLayout.from_total(
            schedule, args.total_ms / 1000.0, n=schedule.gate.n
        )
    if getattr(args, "pulse_ms", None) is not None:
        return pack_timed(
            schedule,
            system,
            pulse_len=args.pulse_ms / 1000.0,
            flank=args.flank_ms / 1000.0,
            mode=args.mode,
            phase_tol=args.phase_tol,
        )
    gate = schedule.gate
    if gate.kind != "coupling-evolution":
        raise SpinschedError("shift gates need --total-ms")
    j = abs(system.j(*gate.active))
    return TimedLayout.from_total(
        schedule, antiphase_duration(j, gate.n), n=gate.n
    )


def cmd_tsetse(args) -> int:
    system = load_system(args.system)
    shape = PulseShape(kind=args.shape, duration=args.pulse_ms / 1000.0)
    sim = tsetse_metric(system, shape, "simultaneous", steps_per_pulse=args.steps)
    stag = tsetse_metric(system, shape, "staggered", steps_per_pulse=args.steps)
    ratio = (
        sim.mq_amplitude / stag.mq_amplitude
        if stag.mq_amplitude > 1e-15
        else None  # staggered generation is numerically zero
    )
    _emit(
        {
            "simultaneous": sim.to_dict(),
            "staggered": stag.to_dict(),
            "mq_ratio": ratio,
        },
        args,
    )
    return 0


def cmd_spectrum(args) -> int:
    system = load_system(args.system)
    schedule = layout = None
    if args.schedule:
        schedule = load_schedule(args.schedule)
        layout = _layout_for(args, schedule, system)
    params = AcquisitionParams(
        points=args.points,
        dwell=args.dwell_ms / 1000.0,
        line_broadening=args.lb,
        receiver_phase=_parse_receiver_phase(args.receiver_phase),
    )
    spec = simulate_spectrum(
        system,
        params,
        schedule=schedule,
        layout=layout,
        coupling_model=args.coupling_model,
        pulse_model=args.pulse_model,
        steps_per_pulse=args.steps,
    )
    _write_text(spectrum_to_csv(spec), args.out)
    if args.svg:
        Path(args.svg).write_text(spectrum_to_svg(spec), encoding="utf-8")
    return 0


def cmd_scaling(args) -> int:
    rows = pulse_count_report(args.scheme, range(args.n_min, args.n_max + 1))
    lines = ["N,segments,soft_pulses"]
    lines += [f"{n},{seg},{count}" for n, seg, count in rows]
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinsched",
        description=(
            "Compile, verify, pack and simulate homonuclear refocusing "
            "pulse schedules."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", help="write the result to this file")
        p.add_argument("--stamp", action="store_true", help="add a timestamp")

    p = sub.add_parser("compile", help="generate a schedule for a scheme")
    p.add_argument("--system", required=True)
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--gate", required=True, help="gate JSON (file or inline)")
    p.add_argument("--policy", required=True, help="policy JSON (file or inline)")
    add_common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="check a schedule against its constraints")
    p.add_argument("--system", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--json", action="store_true", help="machine output on stdout")
    add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pack", help="fit pulse windows onto the time axis")
    p.add_argument("--system", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--pulse-ms", type=float, required=True)
    p.add_argument("--flank-ms", type=float, default=0.0)
    p.add_argument("--mode", choices=("strict", "stretch"), default="strict")
    p.add_argument("--phase-tol", type=float, default=0.35)
    add_common(p)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("simulate-gate", help="propagate a schedule and check it")
    p.add_argument("--system", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--pulse-ms", type=float, default=None)
    p.add_argument("--flank-ms", type=float, default=0.0)
    p.add_argument("--mode", choices=("strict", "stretch"), default="stretch")
    p.add_argument("--phase-tol", type=float, default=0.35)
    p.add_argument("--total-ms", type=float, default=None)
    p.add_argument("--coupling-model", choices=("weak", "strong"), default="weak")
    p.add_argument("--pulse-model", choices=("ideal", "finite"), default="ideal")
    p.add_argument("--steps", type=int, default=200)
    add_common(p)
    p.set_defaults(func=cmd_simulate_gate)

    p = sub.add_parser("tsetse", help="simultaneous-pulse artifact metric")
    p.add_argument("--system", required=True, help="a two-spin system file")
    p.add_argument("--pulse-ms", type=float, required=True)
    p.add_argument("--shape", choices=("rectangular", "gaussian"), default="rectangular")
    p.add_argument("--steps", type=int, default=400)
    add_common(p)
    p.set_defaults(func=cmd_tsetse)

    p = sub.add_parser("spectrum", help="synthesize a spectrum as CSV (and SVG)")
    p.add_argument("--system", required=True)
    p.add_argument("--schedule", default=None)
    p.add_argument("--pulse-ms", type=float, default=None)
    p.add_argument("--flank-ms", type=float, default=0.0)
    p.add_argument("--mode", choices=("strict", "stretch"), default="stretch")
    p.add_argument("--phase-tol", type=float, default=0.35)
    p.add_argument("--total-ms", type=float, default=None)
    p.add_argument("--points", type=int, default=4096)
    p.add_argument("--dwell-ms", type=float, default=1.0)
    p.add_argument("--lb", type=float, default=0.5)
    p.add_argument("--receiver-phase", default=None, help="e.g. I=1.5708,S=1.5708")
    p.add_argument("--coupling-model", choices=("weak", "strong"), default="weak")
    p.add_argument("--pulse-model", choices=("ideal", "finite"), default="ideal")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--svg", default=None, help="also write an SVG plot here")
    p.add_argument("--out", help="write the CSV to this file")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("scaling", help="pulse-count table over system sizes")
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=9)
    p.add_argument("--out", help="write the CSV to this file")
    p.set_defaults(func=cmd_scaling)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpinschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
