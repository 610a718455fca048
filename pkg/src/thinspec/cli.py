"""Command-line entry point: ``thinspec run|manifest|list|params``."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .dynamics import HBAR, NonPhysical, collapse_time_estimate, params_from_trap_length
from .manifest import ManifestError, load_manifest
from .output import write_outputs
from .scenarios import BUILTINS, Scenario, ScenarioError, builtin, compute

ENV_OUT = "THINSPEC_OUT"


def output_dir(arg: str | None) -> str:
    if arg:
        return arg
    return os.environ.get(ENV_OUT) or "."


def run_scenario(s: Scenario, out_dir: str, png: bool = True) -> str:
    """Compute one scenario, write its files and return the summary text."""
    table = compute(s)
    paths = write_outputs(s, table, out_dir, png=png)
    lines = [f"{s.name}: wrote {', '.join(str(p) for p in paths)}"]
    lines += [f"  {item}" for item in table.summary]
    return "\n".join(lines)


def _run_job(args) -> tuple[bool, str]:
    s, out_dir, png = args
    try:
        return True, run_scenario(s, out_dir, png)
    except (ScenarioError, ValueError, OSError, ArithmeticError) as exc:
        return False, f"{s.name}: FAILED: {exc}"


def run_manifest(path: str, out_dir: str, jobs: int = 1, png: bool = True) -> tuple[int, list[str]]:
    """Run every scenario; returns (number of failures, messages in manifest order)."""
    scenarios = load_manifest(path)
    work = [(s, out_dir, png) for s in scenarios]
    if jobs <= 1 or len(work) == 1:
        results = [_run_job(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_job, work))
    failures = sum(1 for ok, _ in results if not ok)
    return failures, [msg for _, msg in results]


def _cmd_run(args) -> int:
    s = builtin(args.name)
    print(run_scenario(s, output_dir(args.out), png=not args.no_png))
    return 0


def _cmd_manifest(args) -> int:
    if args.jobs < 1:
        raise ScenarioError("jobs", f"must be >= 1, got {args.jobs}")
    failures, messages = run_manifest(args.file, output_dir(args.out), args.jobs, png=not args.no_png)
    for msg in messages:
        print(msg)
    if failures:
        print(f"error: {failures} of {len(messages)} scenarios failed", file=sys.stderr)
        return 1
    return 0


def _cmd_list(args) -> int:
    for s in BUILTINS.values():
        print(f"{s.name:<16}{s.model}")
    return 0


def _cmd_params(args) -> int:
    p = params_from_trap_length(args.a_s, args.a_ho, args.rho, args.N, args.omega)
    t_c = collapse_time_estimate(p)
    print(f"u_tilde      = {p.u_tilde:.6e} J")
    print(f"hbar/u_tilde = {HBAR / p.u_tilde:.6e} s")
    print(f"N_eff        = {p.N_eff:.6g}")
    print(f"t_c estimate = {t_c:.6g} s  ({t_c * p.omega_tr:.4g} / omega_tr)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thinspec",
        description="Coherence lifetimes of a finite Bose-Einstein condensate.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one built-in scenario")
    p_run.add_argument("name")
    p_run.add_argument("--out", help=f"output directory (default ${ENV_OUT} or .)")
    p_run.add_argument("--no-png", action="store_true", help="skip the matplotlib rendering")
    p_run.set_defaults(func=_cmd_run)

    p_man = sub.add_parser("manifest", help="run every scenario in a manifest file")
    p_man.add_argument("file")
    p_man.add_argument("--jobs", type=int, default=1)
    p_man.add_argument("--out")
    p_man.add_argument("--no-png", action="store_true")
    p_man.set_defaults(func=_cmd_manifest)

    p_list = sub.add_parser("list", help="print the built-in scenarios")
    p_list.set_defaults(func=_cmd_list)

    p_par = sub.add_parser("params", help="print derived couplings for SI inputs")
    p_par.add_argument("--as", dest="a_s", type=float, required=True, help="scattering length [m]")
    p_par.add_argument("--aho", dest="a_ho", type=float, required=True, help="trap length [m]")
    p_par.add_argument("--rho", type=float, required=True, help="density [m^-3]")
    p_par.add_argument("--N", type=float, required=True, help="atom number")
    p_par.add_argument("--omega", type=float, required=True, help="trap frequency [1/s]")
    p_par.set_defaults(func=_cmd_params)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ManifestError, NonPhysical) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        where = getattr(exc, "filename", None)
        print(f"error: {f'{where}: ' if where else ''}{exc.strerror or exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
