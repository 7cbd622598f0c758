"""Command-line front door.

Subcommands: ``plan`` (single-joint trajectory to CSV), ``sync``
(multi-joint synchronized trajectories to CSV), ``report`` (mass/MoI
consistency report, optionally with figures), ``serve`` (protocol service or
headless scenario replay).

Setting precedence, lowest to highest: built-in defaults, command-line
flags, config file (``--config``, JSON), then ``CLAWQUAD_*`` environment
variables, so a CI environment can override anything without editing
invocations.  Exit codes: 0 success, 1 runtime or verification failure,
2 usage errors (including unreadable model files).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import kinematics as kin
from . import oracle, protocol, report
from .profile import (DEFAULT_A_MAX, DEFAULT_J_MAX, DEFAULT_RATE_HZ, DEFAULT_V_MAX,
                      MotionLimits, plan, sample, write_csv)
from .server import ProtocolServer, replay_scenario
from .sim import SimConfig, Simulator
from .sync import plan_synchronized, sample_synchronized, write_csv_multi

ENV_PREFIX = "CLAWQUAD_"

USAGE_EXIT = 2
FAILURE_EXIT = 1

_SETTINGS = {
    # name: (parser, default)
    "jmax": (float, DEFAULT_J_MAX),
    "amax": (float, DEFAULT_A_MAX),
    "vmax": (float, DEFAULT_V_MAX),
    "smax": (float, None),
    "rate": (float, DEFAULT_RATE_HZ),
    "model": (str, None),
    "bind": (str, "127.0.0.1:7780"),
}


class CliError(Exception):
    def __init__(self, message, code=FAILURE_EXIT):
        super().__init__(message)
        self.code = code


def _resolve_settings(args) -> dict:
    """defaults < flags < config file < environment."""
    settings = {}
    for name, (parse, default) in _SETTINGS.items():
        value = getattr(args, name, None)
        settings[name] = value if value is not None else default

    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"config file {config_path}: {exc}", USAGE_EXIT)
        for name, value in loaded.items():
            if name not in _SETTINGS:
                raise CliError(f"config file {config_path}: unknown setting {name!r}",
                               USAGE_EXIT)
            settings[name] = _SETTINGS[name][0](value)

    for name, (parse, _) in _SETTINGS.items():
        env = os.environ.get(ENV_PREFIX + name.upper())
        if env is not None:
            try:
                settings[name] = parse(env)
            except ValueError:
                raise CliError(f"bad value for {ENV_PREFIX}{name.upper()}: {env!r}",
                               USAGE_EXIT)
    return settings


def _limits(settings) -> MotionLimits:
    return MotionLimits(j_max=settings["jmax"], a_max=settings["amax"],
                        v_max=settings["vmax"], s_max=settings["smax"])


def _load_model(settings) -> kin.RobotModel:
    path = settings["model"]
    if path is None:
        return kin.DEFAULT_MODEL
    try:
        return kin.load_model(path)
    except (OSError, kin.ModelError) as exc:
        raise CliError(f"model file {path}: {exc}", USAGE_EXIT)


def _read_csv_columns(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.array([[float(v) for v in line.strip().split(",")]
                         for line in fh if line.strip()])
    if data.size == 0:
        data = np.zeros((0, len(header)))
    return header, data


def _verify_against_oracle(path, plans, tolerance=1e-4) -> None:
    """Re-read an exported CSV and check each position column against the
    integration oracle for its plan."""
    _, data = _read_csv_columns(path)
    times = data[:, 0]
    for i, plan_ in enumerate(plans):
        prof = oracle.integrate_plan(plan_)
        ref = oracle.positions_at(prof, times)
        err = float(np.max(np.abs(data[:, 1 + i] - ref))) if len(times) else 0.0
        # CSV carries 6 decimals, so quantization adds up to 5e-7 on top of
        # the integration tolerance.
        if err > tolerance + 1e-6:
            raise CliError(
                f"{path}: column q{i} deviates from the integration oracle "
                f"by {err:.3e} rad (tolerance {tolerance:.1e})")
    print(f"verify: {path} matches the integration oracle for "
          f"{len(plans)} joint(s)")


# -- subcommands ---------------------------------------------------------------

def cmd_plan(args) -> int:
    settings = _resolve_settings(args)
    limits = _limits(settings)
    plan_ = plan(args.phi0, args.phi1, limits)
    sampled = sample(plan_, settings["rate"])
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        write_csv(sampled, fh)
    print(f"type={plan_.traj_type.value} T1={plan_.t1:.6f} T2={plan_.t2:.6f} "
          f"T3={plan_.t3:.6f} T4={plan_.t4:.6f} duration={plan_.duration:.6f} s")
    print(f"wrote {len(sampled.positions)} samples to {args.output}")
    if args.plot:
        report.render_profile_figure(sampled.times, sampled.positions, args.plot,
                                     title=f"{args.phi0:g} -> {args.phi1:g} rad")
        print(f"wrote figure {args.plot}")
    if args.verify:
        _verify_against_oracle(args.output, [plan_])
    return 0


def cmd_sync(args) -> int:
    settings = _resolve_settings(args)
    limits = _limits(settings)
    try:
        with open(args.targets, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
        targets = [float(x) for x in spec["target"]]
        start = [float(x) for x in spec.get("start", [0.0] * len(targets))]
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"targets file {args.targets}: {exc}", USAGE_EXIT)
    sync = plan_synchronized(start, targets, limits)
    times, rows = sample_synchronized(sync, settings["rate"])
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        write_csv_multi(times, rows, fh)
    durations = " ".join(f"{p.duration:.6f}" for p in sync.plans)
    print(f"joints={len(sync.plans)} limiting=q{sync.limiting_index} "
          f"total_duration={sync.total_duration:.6f} s per_joint=[{durations}]")
    print(f"wrote {rows.shape[1]} samples to {args.output}")
    if args.plot:
        report.render_profile_figure(times, rows, args.plot, title="synchronized joints")
        print(f"wrote figure {args.plot}")
    if args.verify:
        _verify_against_oracle(args.output, list(sync.plans))
    return 0


def cmd_report(args) -> int:
    settings = _resolve_settings(args)
    model = _load_model(settings)
    sys.stdout.write(report.format_report(model))
    if args.figures:
        os.makedirs(args.figures, exist_ok=True)
        csv_path = os.path.join(args.figures, "report.csv")
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            report.write_report_csv(model, fh)
        paths = report.render_report_figures(model, args.figures)
        for path in [csv_path] + paths:
            print(f"wrote {path}")
    if not report.mass_budget_ok(model):
        print(f"mass budget violated by {model.mass_identity_error_g():.3f} g "
              f"(tolerance {report.MASS_TOLERANCE_G} g)", file=sys.stderr)
        return FAILURE_EXIT
    return 0


def cmd_serve(args) -> int:
    settings = _resolve_settings(args)
    model = _load_model(settings)
    config = SimConfig(limits=_limits(settings), model=model)
    sim = Simulator(config)

    headless = args.headless or args.scenario is not None or args.ticks is not None
    if headless:
        commands = []
        if args.scenario:
            try:
                with open(args.scenario, "r", encoding="utf-8") as fh:
                    commands = protocol.load_scenario(fh)
            except (OSError, protocol.ProtocolError) as exc:
                raise CliError(f"scenario {args.scenario}: {exc}", USAGE_EXIT)
        trace = None
        if args.trace:
            trace = open(args.trace, "w", encoding="utf-8", newline="\n")
        try:
            replay_scenario(sim, commands, trace=trace, max_ticks=args.ticks)
        finally:
            if trace is not None:
                trace.close()
        state = sim.state()
        print(f"replayed {len(commands)} command(s) in {sim.clock_ms} ticks; "
              f"final mode={state.mode.value}")
        return 0

    host, _, port = settings["bind"].partition(":")
    try:
        server = ProtocolServer(sim, host or "127.0.0.1", int(port or 0))
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot bind {settings['bind']}: {exc}", USAGE_EXIT)
    print(f"serving on {server.address[0]}:{server.address[1]} "
          f"(newline JSON and WebSocket on the same port)", flush=True)
    server.serve_forever()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clawquad",
        description="Trajectory planning, kinematics reports and tele-operation "
                    "service for the claw-legged quadruped.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--jmax", type=float, help="jerk bound, rad/s^3")
        p.add_argument("--amax", type=float, help="acceleration bound, rad/s^2")
        p.add_argument("--vmax", type=float, help="velocity bound, rad/s")
        p.add_argument("--smax", type=float, help="snap bound, rad/s^4 (default 10*jmax)")
        p.add_argument("--rate", type=float, help="sample rate, Hz (default 1000)")
        p.add_argument("--model", help="robot model file (default: shipped model)")
        p.add_argument("--config", help="JSON config file; overrides flags")

    p_plan = sub.add_parser("plan", help="plan one joint move and export CSV")
    p_plan.add_argument("phi0", type=float, help="start position, rad")
    p_plan.add_argument("phi1", type=float, help="target position, rad")
    p_plan.add_argument("--output", "-o", default="trajectory.csv")
    p_plan.add_argument("--plot", help="also render a profile figure to this path")
    p_plan.add_argument("--verify", action="store_true",
                        help="re-read the CSV and check it against the integration oracle")
    add_common(p_plan)
    p_plan.set_defaults(func=cmd_plan)

    p_sync = sub.add_parser("sync", help="plan synchronized joints and export CSV")
    p_sync.add_argument("targets", help='JSON file: {"start": [...], "target": [...]}')
    p_sync.add_argument("--output", "-o", default="sync.csv")
    p_sync.add_argument("--plot", help="also render a profile figure to this path")
    p_sync.add_argument("--verify", action="store_true")
    add_common(p_sync)
    p_sync.set_defaults(func=cmd_sync)

    p_report = sub.add_parser("report", help="mass and MoI consistency report")
    p_report.add_argument("--figures", help="directory for report.csv and figures")
    add_common(p_report)
    p_report.set_defaults(func=cmd_report)

    p_serve = sub.add_parser("serve", help="run the tele-operation service")
    p_serve.add_argument("--bind", help="host:port (default 127.0.0.1:7780)")
    p_serve.add_argument("--scenario", help="scenario file to replay headlessly")
    p_serve.add_argument("--headless", action="store_true",
                         help="run without sockets (implied by --scenario/--ticks)")
    p_serve.add_argument("--ticks", type=int, help="advance exactly N milliseconds")
    p_serve.add_argument("--trace", help="write every event to this file")
    add_common(p_serve)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (kin.ReachabilityError, kin.JointRangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE_EXIT


if __name__ == "__main__":
    sys.exit(main())
