"""Command-line front end.

Subcommands: critical | shoot | scan | lane-emden | profile | verify.

Exit codes: 0 ok, 1 verification failure, 2 usage or domain error,
3 solver budget or per-point failure, 4 profile gate failure.

Every subcommand accepts the shared flags (``-d``, tolerances, ``--format``,
``--out``, ``--config``). A config file holds flat ``key = value`` lines
whose keys are flag names without the leading dashes; flags given on the
command line take precedence over the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .asymptotics import lane_emden
from .errors import (
    AmbiguousNearCritical,
    BudgetExceeded,
    DomainError,
    InvalidBracket,
    ProfileError,
    StepUnderflow,
    TimeOutOfRange,
)
from .mass import ScanError, default_grid, scan, thresholds
from .ode import IntegratorControls, StopRule, integrate
from .params import make_params
from .profile import GridSpec, build_profile, evaluate_solution
from .shooting import find_critical, positivity_components
from .verify import run_all

__all__ = ["main", "build_parser", "load_config"]

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_BUDGET, EXIT_GATE = 0, 1, 2, 3, 4

# shared settings: name -> (type, default)
SHARED = {
    "dimension": (int, 3),
    "rel_tol": (float, 1e-10),
    "abs_tol": (float, 1e-12),
    "event_tol": (float, 1e-12),
    "bisect_tol": (float, 1e-8),
    "max_steps": (int, 1_000_000),
    "format": (str, "csv"),
    "out": (str, None),
}


class GateFailure(Exception):
    """Raised by a command whose result fails its acceptance gate."""

    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    """Shortest round-trip text for a float (integers and flags pass through)."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _json_default(x):
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default, ensure_ascii=False) + "\n"


def load_config(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _shared_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("shared options")
    g.add_argument("-d", "--dimension", type=int, default=None, help="space dimension d >= 3 (default 3)")
    g.add_argument("--rel-tol", type=float, default=None, help="integrator relative tolerance (default 1e-10)")
    g.add_argument("--abs-tol", type=float, default=None, help="integrator absolute tolerance (default 1e-12)")
    g.add_argument("--event-tol", type=float, default=None, help="event location tolerance (default 1e-12)")
    g.add_argument("--bisect-tol", type=float, default=None, help="bracket width for a_c (default 1e-8)")
    g.add_argument("--max-steps", type=int, default=None, help="solver step budget per integration (default 1e6)")
    g.add_argument("--format", choices=["csv", "json"], default=None, help="output format (default csv)")
    g.add_argument("--out", default=None, metavar="PATH", help="write output to PATH instead of stdout")
    g.add_argument("--config", default=None, metavar="PATH", help="flat key = value file of option defaults")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _shared_parser()
    parser = argparse.ArgumentParser(
        prog="pks-selfsimilar",
        description="Self-similar blow-up profiles of the critical degenerate Keller-Segel system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("critical", parents=[common], help="locate the critical shooting height a_c")
    p.add_argument("--bracket", default=None, metavar="LO,HI", help="initial bracket for the bisection")

    p = sub.add_parser("shoot", parents=[common], help="dump one trajectory u(., a)")
    p.add_argument("-a", type=float, required=True, help="shooting height u(0)")
    p.add_argument("--r-max", type=float, default=None, help="integration limit (default 10)")
    p.add_argument("--until-rmax", action="store_true", help="continue through zeros of u up to r-max")
    p.add_argument("--samples", type=int, default=None,
                   help="emit N uniformly spaced dense samples instead of the solver nodes")
    p.add_argument("--components", action="store_true", help="print positivity intervals instead")
    p.add_argument("--r-limit", type=float, default=None,
                   help="radius limit for --components (default 5 R(a_c))")

    p = sub.add_parser("scan", parents=[common], help="tabulate the mass curve on a > a_c")
    p.add_argument("--points", type=int, default=None, help="grid size (default 200)")
    p.add_argument("--lo-offset", type=float, default=None, help="grid starts at a_c (1 + lo-offset); default 1e-3")
    p.add_argument("--hi-factor", type=float, default=None, help="grid ends at hi-factor a_c; default 1e4")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (output does not depend on it)")

    sub.add_parser("lane-emden", parents=[common], help="first zero and mass of the Lane-Emden limit")

    p = sub.add_parser("profile", parents=[common], help="profile table and self-similar solution samples")
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("-a", type=float, default=None, help="shooting height")
    who.add_argument("--a-factor", type=float, default=None,
                     help="shooting height as a multiple of a_c (1 means the upper end of the a_c bracket)")
    p.add_argument("-T", type=float, default=None, help="blow-up time (default 1)")
    p.add_argument("--at", action="append", default=[], metavar="t,radius",
                   help="sample rho and c at time t and physical radius (repeatable)")
    p.add_argument("--per-step", type=int, default=None, help="table nodes per solver step (default 16)")

    sub.add_parser("verify", parents=[common], help="run the invariant checks")
    return parser


def _resolve(args) -> dict:
    """Merge defaults < config file < command-line flags."""
    file_values = load_config(args.config) if args.config else {}
    settings = {}
    for key, (typ, default) in SHARED.items():
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
        elif key in file_values:
            settings[key] = typ(file_values[key])
        else:
            settings[key] = default
    extra = {"points": (int, 200), "lo_offset": (float, 1e-3), "hi_factor": (float, 1e4),
             "r_max": (float, 10.0), "T": (float, 1.0), "per_step": (int, 16)}
    for key, (typ, default) in extra.items():
        if hasattr(args, key):
            flag = getattr(args, key)
            settings[key] = flag if flag is not None else typ(file_values.get(key, default))
    if settings["format"] not in ("csv", "json"):
        raise DomainError(f"format must be csv or json (got {settings['format']!r})")
    return settings


def _controls(s) -> IntegratorControls:
    return IntegratorControls(rel_tol=s["rel_tol"], abs_tol=s["abs_tol"], event_tol=s["event_tol"],
                              max_steps=s["max_steps"])


def _config_echo(s, **more) -> dict:
    echo = {k: s[k] for k in ("dimension", "rel_tol", "abs_tol", "event_tol", "bisect_tol")}
    echo.update(more)
    return echo


def _csv(header, rows) -> list[str]:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return lines


# ---------------------------------------------------------------- commands


def cmd_critical(args, s) -> str:
    params = make_params(s["dimension"])
    bracket = None
    if args.bracket:
        try:
            bracket = tuple(float(x) for x in args.bracket.split(","))
        except ValueError:
            raise InvalidBracket(f"cannot parse bracket {args.bracket!r}") from None
        if len(bracket) != 2:
            raise InvalidBracket(f"bracket needs two values, got {args.bracket!r}")
    crit = find_critical(params, bracket, s["bisect_tol"], _controls(s))
    report = {
        "a_lo": crit.a_lo,
        "a_hi": crit.a_hi,
        "a_c": crit.a_c,
        "R_ac": crit.R_touch,
        "iterations": crit.iterations,
        "stopped_ambiguous": crit.stopped_ambiguous,
    }
    if s["format"] == "json":
        return dump_json({"config": _config_echo(s), "critical": report})
    return "\n".join(_csv(list(report), [list(report.values())])) + "\n"


def cmd_shoot(args, s) -> str:
    params = make_params(s["dimension"])
    if not args.a > 0:
        raise DomainError(f"a must be positive (got {args.a!r})")
    controls = _controls(s)
    if args.components:
        r_limit = args.r_limit
        if r_limit is None:
            r_limit = 5.0 * find_critical(params, tol=s["bisect_tol"], controls=controls).R_touch
        comps = positivity_components(args.a, params, controls, r_limit=r_limit)
        rows = [(c.start, c.end) for c in comps]
        if s["format"] == "json":
            return dump_json({"config": _config_echo(s, a=args.a, r_limit=r_limit),
                              "components": [{"start": a, "end": b} for a, b in rows]})
        return "\n".join(_csv(["start", "end"], rows) + [f"# components,{len(rows)}"]) + "\n"

    stop = StopRule.until_rmax() if args.until_rmax else StopRule.first_u_zero()
    traj = integrate(args.a, params, controls.replace(r_max=s["r_max"]), stop, dense=bool(args.samples))
    if args.samples:
        r = np.linspace(traj.r[0], traj.r[-1], args.samples)
        y = traj(r).T
    else:
        r, y = traj.r, traj.y
    cols = ["r", "u", "du", "theta", "dtheta"]
    rows = [(ri, *yi[:4]) for ri, yi in zip(r, y)]
    events = [(e.kind, e.r) for e in traj.events]
    if s["format"] == "json":
        return dump_json({
            "config": _config_echo(s, a=args.a, r_max=s["r_max"], until_rmax=args.until_rmax),
            "columns": cols,
            "rows": [list(map(float, row)) for row in rows],
            "events": [{"kind": k, "r": float(rr)} for k, rr in events],
            "stopped_by": traj.stopped_by,
        })
    lines = _csv(cols, rows)
    lines += [f"# event,{k},{fmt(rr)}" for k, rr in events]
    lines.append(f"# stopped_by,{traj.stopped_by}")
    return "\n".join(lines) + "\n"


def cmd_scan(args, s) -> str:
    params = make_params(s["dimension"])
    controls = _controls(s)
    crit = find_critical(params, tol=s["bisect_tol"], controls=controls)
    lane = lane_emden(params, controls)
    grid = default_grid(crit.a_hi, s["points"], s["lo_offset"], s["hi_factor"])
    curve = scan(params, grid, controls, lane=lane, a_c=crit.a_hi, jobs=max(1, args.jobs))
    m_c, m_2 = thresholds(curve, lane, params)
    # monotonicity verdicts ignore changes below the integration accuracy;
    # the strict_until entries say where strict decrease stops being resolved
    resolution = 100.0 * s["rel_tol"]
    summary = {
        "a_c": crit.a_c,
        "Mcal_c": lane.mcal_limit,
        "Mcal_2": curve.mcal2,
        "a_at_max": curve.a_at_max,
        "M_c": m_c,
        "M_2": m_2,
        "R_decreasing": curve.R_decreasing,
        "scaledR_decreasing": curve.decreasing("scaled_R", resolution),
        "scaledR_strict_until": curve.resolved_until("scaled_R"),
        "Mcal_decreasing": curve.decreasing("mcal", resolution),
        "Mcal_strict_until": curve.resolved_until("mcal"),
        "resolution": resolution,
        "max_identity_residual": max(pt.identity_residual for pt in curve.points),
    }
    cols = ["a", "R", "scaledR", "Mcal", "Mphys"]
    rows = [(pt.a, pt.R, pt.scaled_R, pt.mcal, pt.mphys) for pt in curve.points]
    if s["format"] == "json":
        echo = _config_echo(s, points=s["points"], lo_offset=s["lo_offset"], hi_factor=s["hi_factor"])
        return dump_json({"config": echo, "summary": summary, "columns": cols,
                          "rows": [list(map(float, row)) for row in rows]})
    lines = _csv(cols, rows)
    lines += [f"# {k},{fmt(v)}" for k, v in summary.items()]
    return "\n".join(lines) + "\n"


def cmd_lane_emden(args, s) -> str:
    params = make_params(s["dimension"])
    lane = lane_emden(params, _controls(s))
    report = {
        "z1": lane.z1,
        "slope_at_z1": lane.slope_at_z1,
        "integral": lane.integral_wp,
        "boundary_term": lane.boundary_term,
        "identity_residual": lane.identity_residual,
        "Mcal_c": lane.mcal_limit,
        "M_c": params.mass_factor * lane.mcal_limit,
    }
    if s["format"] == "json":
        return dump_json({"config": _config_echo(s), "lane_emden": report})
    return "\n".join(_csv(list(report), [list(report.values())])) + "\n"


def _parse_at(text):
    try:
        t, radius = (float(x) for x in text.split(","))
    except ValueError:
        raise DomainError(f"--at expects t,radius (got {text!r})") from None
    return t, radius


def cmd_profile(args, s) -> str:
    params = make_params(s["dimension"])
    controls = _controls(s)
    if args.a is not None:
        a = args.a
    else:
        crit = find_critical(params, tol=s["bisect_tol"], controls=controls)
        a = args.a_factor * crit.a_hi
    if not a > 0:
        raise DomainError(f"a must be positive (got {a!r})")
    T = s["T"]
    if not T > 0:
        raise DomainError(f"T must be positive (got {T!r})")
    samples = [_parse_at(text) for text in args.at]
    table = build_profile(a, params, controls, GridSpec(per_step=s["per_step"]))
    summary = table.summary()
    summary["J_gate_passed"] = table.J_gate_passed
    if not table.J_gate_passed:
        raise GateFailure(f"profile at a={a!r} fails the J gate: maxJdev={table.max_J_dev!r}", EXIT_GATE)
    at_rows = []
    for t, radius in samples:
        sol = evaluate_solution(table, T, t, radius)
        at_rows.append((t, radius, sol.rho, sol.cpot, sol.s))
    cols = ["r", "phi", "xi", "psi", "J"]
    rows = list(zip(table.r, table.phi, table.xi, table.psi, table.J))
    if s["format"] == "json":
        return dump_json({
            "config": _config_echo(s, a=a, T=T, per_step=s["per_step"]),
            "summary": summary,
            "samples": [dict(zip(("t", "radius", "rho", "c", "s"), map(float, row))) for row in at_rows],
            "columns": cols,
            "rows": [list(map(float, row)) for row in rows],
        })
    lines = _csv(cols, rows)
    lines += [f"# {k},{fmt(v)}" for k, v in summary.items()]
    lines += [f"# at,{','.join(fmt(v) for v in row)}" for row in at_rows]
    return "\n".join(lines) + "\n"


def cmd_verify(args, s) -> str:
    params = make_params(s["dimension"])
    results = run_all(params, _controls(s), bisect_tol=s["bisect_tol"])
    if s["format"] == "json":
        text = dump_json({"config": _config_echo(s), "checks": [
            {"name": r.name, "passed": r.passed, "detail": r.detail, "counterexample": r.counterexample}
            for r in results]})
    else:
        text = "\n".join(r.line() for r in results) + "\n"
    if not all(r.passed for r in results):
        raise GateFailure(text, EXIT_VERIFY)
    return text


COMMANDS = {
    "critical": cmd_critical,
    "shoot": cmd_shoot,
    "scan": cmd_scan,
    "lane-emden": cmd_lane_emden,
    "profile": cmd_profile,
    "verify": cmd_verify,
}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = os.path.abspath(out)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _resolve(args)
        text = COMMANDS[args.command](args, settings)
        _emit(text, settings["out"])
        return EXIT_OK
    except GateFailure as exc:
        # verification output is still shown, but no file is written
        sys.stderr.write(str(exc) if str(exc).endswith("\n") else str(exc) + "\n")
        return exc.code
    except (DomainError, InvalidBracket, TimeOutOfRange) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ScanError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BUDGET
    except (BudgetExceeded, StepUnderflow, AmbiguousNearCritical, ProfileError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_BUDGET
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
