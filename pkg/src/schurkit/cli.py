"""Command-line entry point: ``schurkit run`` for scenario files, direct subcommands for single operators."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .errors import InputError
from .report import dumps
from .scenario import EXIT_INPUT, HANDLERS, run_scenario

ENV_TOL_RANGE = "SCHURKIT_TOL_RANGE"

DIRECT = ("check", "schur", "decompose", "douglas", "witnesses", "phi")


def _env_range() -> float | None:
    raw = os.environ.get(ENV_TOL_RANGE)
    if raw is None or raw.strip() == "":
        return None
    try:
        v = float(raw)
    except ValueError:
        raise InputError(f"{ENV_TOL_RANGE}={raw!r} is not a number") from None
    if not v >= 0:
        raise InputError(f"{ENV_TOL_RANGE} must be non-negative")
    return v


def _load_scenarios(path: Path) -> list[dict]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"{path}: cannot read scenario ({exc})") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if isinstance(data, dict) and "scenarios" in data:
        data = data["scenarios"]
        if not isinstance(data, list) or not data:
            raise InputError(f"{path}: 'scenarios' must be a non-empty list")
        return data
    return [data]


def _output_path(sc: dict, index: int, scenario_file: Path, out_dir: Path | None) -> Path:
    name = sc.get("output") if isinstance(sc, dict) else None
    if not name:
        label = sc.get("name") if isinstance(sc, dict) else None
        name = f"{label or f'scenario{index}'}.report.json"
    p = Path(name)
    if out_dir is not None:
        return out_dir / p.name
    return p if p.is_absolute() else scenario_file.parent / p


def _run_one(args):
    sc, base, env_range, flag_range, out = args
    report, code = run_scenario(sc, base, env_range, flag_range)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps(report), encoding="utf-8")
    return sc.get("name", "?") if isinstance(sc, dict) else "?", report.get("status"), code, str(out), report.get("error")


def cmd_run(ns) -> int:
    path = Path(ns.scenario)
    scenarios = _load_scenarios(path)
    out_dir = Path(ns.out) if ns.out else None
    env_range = _env_range()
    jobs = [(sc, path.parent, env_range, ns.tol_range, _output_path(sc, i, path, out_dir))
            for i, sc in enumerate(scenarios)]
    if ns.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    for name, status, code, out, err in results:
        line = f"{name}: {status} (exit {code}) -> {out}"
        if err:
            line += f"\n  {err}"
        print(line, file=sys.stderr if code else sys.stdout)
    return max(code for _, _, code, _, _ in results)


def cmd_direct(ns) -> int:
    inputs = {}
    if ns.command == "douglas":
        if not (ns.a and ns.b):
            raise InputError("douglas needs --a and --b")
        inputs.update(a=str(Path(ns.a).resolve()), b=str(Path(ns.b).resolve()))
    else:
        if not ns.matrix:
            raise InputError(f"{ns.command} needs --matrix")
        inputs["matrix"] = str(Path(ns.matrix).resolve())
        for key, val in (("m_basis", ns.m_basis), ("n_basis", ns.n_basis)):
            if val:
                inputs[key] = str(Path(val).resolve())
        for key, val in (("m_dim", ns.m_dim), ("n_dim", ns.n_dim)):
            if val is not None:
                inputs[key] = val
    if ns.lam is not None:
        inputs["lambda"] = ns.lam
    sc = {"name": ns.command, "command": ns.command, "seed": ns.seed, "inputs": inputs}
    expect = {}
    for item in ns.expect or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise InputError(f"--expect takes KEY=VALUE, got {item!r}")
        try:
            expect[key] = json.loads(raw)
        except json.JSONDecodeError:
            expect[key] = raw
    if expect:
        sc["expect"] = expect
    report, code = run_scenario(sc, Path.cwd(), _env_range(), ns.tol_range)
    text = dumps(report)
    if ns.out:
        Path(ns.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if report.get("error"):
        print(report["error"], file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schurkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"schurkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario or batch file")
    run.add_argument("scenario", help="scenario JSON (single object or {\"scenarios\": [...]})")
    run.add_argument("--jobs", type=int, default=1, help="parallel workers for batch files")
    run.add_argument("--out", help="directory for reports (default: next to the scenario)")
    run.add_argument("--tol-range", type=float, help="range-inclusion tolerance (overrides env)")
    run.set_defaults(func=cmd_run)

    for name in DIRECT:
        p = sub.add_parser(name, help=f"run the '{name}' command on matrix files")
        p.add_argument("--matrix", help="operator matrix file")
        p.add_argument("--m-basis", help="matrix file whose columns span M")
        p.add_argument("--n-basis", help="matrix file whose columns span N (default: M)")
        p.add_argument("--m-dim", type=int, help="use the leading coordinates as M")
        p.add_argument("--n-dim", type=int, help="use the leading coordinates as N")
        p.add_argument("--lambda", dest="lam", type=float, help="lambda level")
        p.add_argument("--tol-range", type=float, help="range-inclusion tolerance (overrides env)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--expect", action="append", metavar="KEY=VALUE",
                       help="assert a verdict (JSON value); repeatable")
        p.add_argument("--out", help="write the report here instead of stdout")
        if name == "douglas":
            p.add_argument("--a", help="left-hand matrix A in A = BC")
            p.add_argument("--b", help="factor matrix B in A = BC")
        p.set_defaults(func=cmd_direct)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which matches the input-error code
        return int(exc.code or 0)
    if ns.command in HANDLERS and ns.command not in DIRECT:
        parser.error(f"{ns.command} is only available through scenario files")
    try:
        return ns.func(ns)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
