"""Declarative scenarios: validate, dispatch to the library, compare against expectations.

A scenario is a JSON object::

    {"name": "...", "command": "check", "seed": 0,
     "inputs": {...}, "tolerances": {"range": 1e-8}, "expect": {"complementable": false},
     "output": "check.report.json"}

Operators come from ``inputs.matrix`` (file path or inline rows) or
``inputs.blocks`` ({a, b, c, d}, canonical coordinates). Subspaces come from
``m_basis``/``n_basis`` (path or inline rows; columns span the subspace) or
``m_dim``/``n_dim`` (leading coordinates).

Expectations compare against ``verdicts``: booleans and strings must match
exactly, numbers within relative 1e-6, and ``{"le": x}``, ``{"ge": x}``,
``{"lt": x}``, ``{"gt": x}`` or ``{"value": x, "rtol": r}`` give other
comparisons.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import __version__
from . import blockops as bo
from . import comptest as ct
from . import convlab as cl
from . import douglas as dg
from . import numkernel as nk
from . import powseries as ps
from . import schur as sc
from .config import DEFAULT, Tolerances
from .errors import InputError, SchurkitError, SequenceError
from .matio import read_matrix
from .report import timestamp

COMMANDS = ("decompose", "check", "schur", "douglas", "witnesses", "phi", "converge",
            "closure", "lambda-growth", "series", "product-closure")

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

NUMBER_RTOL = 1e-6


# --------------------------------------------------------------------------- inputs

def _matrix(value, base: Path, what: str) -> np.ndarray:
    if isinstance(value, str):
        path = Path(value)
        return read_matrix(path if path.is_absolute() else base / path)
    if isinstance(value, (int, float)):
        return np.array([[float(value)]])
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what}: not a numeric matrix ({exc})") from None
    if arr.ndim == 1:
        arr = arr[None, :]
    return nk.as_mat(arr, what)


def _subspace(inputs: dict, key: str, ambient: int, base: Path):
    if f"{key}_basis" in inputs:
        raw = _matrix(inputs[f"{key}_basis"], base, f"{key}_basis")
        if raw.shape[0] != ambient:
            raise InputError(f"{key}_basis has {raw.shape[0]} rows, operator needs {ambient}")
        return bo.orthonormalize(raw)
    if f"{key}_dim" in inputs:
        k = inputs[f"{key}_dim"]
        if not isinstance(k, int) or not 0 <= k <= ambient:
            raise InputError(f"{key}_dim must be an integer in 0..{ambient}")
        return bo.leading(ambient, k)
    return None


def load_operator(inputs: dict, base: Path, prefix: str = "") -> bo.BlockOp:
    """Block form of the operator named by ``{prefix}matrix`` / ``{prefix}blocks`` plus subspaces."""
    blocks = inputs.get(f"{prefix}blocks")
    if blocks is not None:
        if not isinstance(blocks, dict) or set(blocks) != set("abcd"):
            raise InputError(f"{prefix}blocks needs exactly the keys a, b, c, d")
        parts = [_matrix(blocks[k], base, f"{prefix}blocks.{k}") for k in "abcd"]
        try:
            return bo.from_blocks(*parts)
        except ValueError as exc:
            raise InputError(f"{prefix}blocks: incompatible block shapes ({exc})") from None
    if f"{prefix}matrix" not in inputs:
        raise InputError(f"inputs need '{prefix}matrix' or '{prefix}blocks'")
    t = _matrix(inputs[f"{prefix}matrix"], base, f"{prefix}matrix")
    m = _subspace(inputs, "m", t.shape[1], base)
    n = _subspace(inputs, "n", t.shape[0], base)
    if m is None:
        raise InputError("inputs need 'm_basis' or 'm_dim'")
    if n is None:
        if t.shape[0] != t.shape[1]:
            raise InputError("inputs need 'n_basis' or 'n_dim' for a non-square operator")
        n = m
    return bo.decompose(t, m, n)


def _need(inputs: dict, key: str, kind=None):
    if key not in inputs:
        raise InputError(f"missing required input '{key}'")
    v = inputs[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise InputError(f"input '{key}' must be a finite number")
        return float(v)
    if kind is int and (isinstance(v, bool) or not isinstance(v, int)):
        raise InputError(f"input '{key}' must be an integer")
    return v


def _lam(inputs: dict, required: bool = True):
    if "lambda" not in inputs and not required:
        return None
    lam = _need(inputs, "lambda", float)
    if lam <= 0:
        raise InputError("lambda must be positive")
    return lam


# --------------------------------------------------------------------------- commands

def _cmd_decompose(inputs, base, seed, tol):
    blk = load_operator(inputs, base)
    t = bo.assemble(blk)
    sw = bo.norm_sandwich(blk)
    rt = bo.round_trip_error(t, blk)
    verdicts = {"round_trip_error": rt, "round_trip_ok": rt <= 1e-12, "sandwich_holds": sw.holds}
    details = {"blocks": {k: getattr(blk, k) for k in "abcd"}, "norm_sandwich": sw._asdict(),
               "dims": {"M": blk.m_sub.dim, "M_perp": blk.m_perp.dim,
                        "N": blk.n_sub.dim, "N_perp": blk.n_perp.dim}}
    return verdicts, details, {"round_trip_ok": True, "sandwich_holds": True}


def _cmd_check(inputs, base, seed, tol):
    blk = load_operator(inputs, base)
    rep = ct.check(blk, tol)
    verdicts = {"complementable": rep.complementable, "lambda_min": rep.lambda_min,
                "lambda_char2_bound": rep.lambda_char2_bound,
                "residual_c_in_d": rep.residual_c_in_d,
                "residual_bstar_in_dstar": rep.residual_bstar_in_dstar,
                "gap_c_in_d": rep.gap_c_in_d, "gap_bstar_in_dstar": rep.gap_bstar_in_dstar}
    lam = _lam(inputs, required=False)
    details = {"report": rep.summary()}
    if lam is not None:
        verdicts["in_psi"] = rep.accepts(lam)
        if rep.complementable:
            verdicts["ball_inclusion_residual"] = max(
                ct.ball_inclusion_residual(blk.c, blk.d, lam, seed=seed, tol=tol),
                ct.ball_inclusion_residual(blk.b.T, blk.d.T, lam, seed=seed + 1, tol=tol))
    if rep.complementable:
        details["z"], details["y"] = rep.z, rep.y
    return verdicts, details, {}


def _cmd_schur(inputs, base, seed, tol):
    blk = load_operator(inputs, base)
    routes = sc.all_routes(blk, tol)
    if not routes:
        rep = ct.check(blk, tol)
        verdicts = {"defined": False, "routes": [], "residual_c_in_d": rep.residual_c_in_d,
                    "residual_bstar_in_dstar": rep.residual_bstar_in_dstar}
        return verdicts, {}, {}
    gap = sc.max_route_gap(routes)
    first = next(iter(routes.values()))
    verdicts = {"defined": True, "routes": [r.value for r in routes], "max_route_gap": gap,
                "routes_agree": gap <= 1e-7}
    details = {"core": first.core, "full": first.full,
               "per_route": {r.value: {"core": res.core, "dual_gap": res.dual_gap,
                                       "condition": res.condition} for r, res in routes.items()}}
    return verdicts, details, {"routes_agree": True}


def _cmd_douglas(inputs, base, seed, tol):
    a = _matrix(_need(inputs, "a"), base, "a")
    b = _matrix(_need(inputs, "b"), base, "b")
    test = dg.range_included(a, b, tol)
    verdicts = {"included": test.included, "range_residual": test.residual}
    if not test.included:
        return verdicts, {}, {}
    sol = dg.reduced_solution(a, b, tol)
    inf = dg.douglas_inf_check(a, b, sol, tol=tol)
    verdicts.update({
        "factorization_residual": sol.residual, "range_constraint": sol.range_residual,
        "norm_c": sol.norm_c, "inf_lambda": inf.inf_lambda,
        "matches_sq_norm": inf.matches_sq_norm, "matches_linear": inf.matches_linear,
        "kernel_a_equals_kernel_c": dg.kernels_agree(a, sol.c, tol),
        "kernel_a_equals_kernel_b": (dg.kernels_agree(a, b, tol) if a.shape[1] == b.shape[1] else None),
    })
    ok = sol.residual <= tol.douglas and sol.range_residual <= tol.douglas
    verdicts["certified"] = ok
    return verdicts, {"c": sol.c}, {"certified": True, "matches_sq_norm": True}


def _cmd_witnesses(inputs, base, seed, tol):
    blk = load_operator(inputs, base)
    rep = ct.check(blk, tol)
    if not rep.complementable:
        return {"complementable": False}, {}, {}
    w = ct.ando_witnesses(blk, tol)
    res = ct.ando_residuals(blk, w)
    verdicts = {"complementable": True, "max_identity_residual": float(res.max()),
                "witnesses_ok": bool(res.max() <= 1e-8)}
    return verdicts, {"m_r": w.m_r, "m_ell": w.m_ell, "identity_residuals": res}, {"witnesses_ok": True}


def _cmd_phi(inputs, base, seed, tol):
    blk = load_operator(inputs, base)
    lam = _lam(inputs)
    lev = ct.phi_levels(blk, tol)
    ph = ct.phi_membership(blk, lam, tol)
    in_psi, in_perp, rep, rep_perp = ct.psi_membership(blk, lam, tol)
    verdicts = {"in_phi_l": ph.in_phi_l, "in_phi_r": ph.in_phi_r, "in_phi": ph.in_phi,
                "in_psi": in_psi, "in_psi_perp": in_perp,
                "phi_level_l": lev[0], "phi_level_r": lev[1],
                "lambda_min": rep.lambda_min, "lambda_min_perp": rep_perp.lambda_min}
    return verdicts, {}, {}


def _sequence(inputs, seed) -> cl.OpSequence:
    spec = dict(_need(inputs, "sequence"))
    kind = spec.pop("kind", None)
    n_max = spec.pop("n_max", 10)
    if kind == "explicit_list":
        raise InputError("explicit_list sequences are library-only; give a generator kind")
    return cl.gen_sequence(kind, n_max=n_max, seed=seed, **spec)


def _cmd_converge(inputs, base, seed, tol):
    seq = _sequence(inputs, seed)
    samples = inputs.get("samples", 32)
    v = cl.detect_convergence(seq, samples=samples, seed=seed, tol=tol)
    bc = cl.block_convergence(seq, tol)
    verdicts = {"uniform": v.uniform, "strong_on_samples": v.strong_on_samples,
                "block_lower_ok": bc.lower_ok, "block_upper_ok": bc.upper_ok,
                "block_equivalence": bc.equivalence_holds,
                "limit_complementable": ct.check(seq.limit_blk(), tol).complementable}
    details = {"sequence": {"kind": seq.kind, "n_max": seq.n_max, "params": seq.params},
               "convergence": v.summary(), "blocks": bc.summary()}
    try:
        crit = cl.theorem_conv_criterion(seq, tol=tol)
    except SequenceError as exc:
        details["criterion"] = {"error": str(exc), "index": exc.index}
    else:
        verdicts.update({"criterion_holds": crit.criterion_holds,
                         "bounded_lambda": crit.bounded_lambda,
                         "gamma_criterion": crit.gamma_criterion,
                         "criterion_consistent": crit.consistent})
        details["criterion"] = crit.summary()
    if seq.kind in ("ptwise_killer", "ptwise2_killer"):
        br = cl.boundary_report(seq, samples=samples, seed=seed, tol=tol)
        verdicts.update({"min_range_residual": float(br.residuals.min()),
                         "min_range_gap": float(br.gaps.min()),
                         "final_strong_gap": float(br.strong.strong_gaps[-1].max()),
                         "final_c_strong_gap": float(br.c_strong_gaps[-1])})
        details["boundary"] = br.summary()
    intrinsic = {"block_lower_ok": True, "block_upper_ok": True}
    if "criterion_consistent" in verdicts:
        intrinsic["criterion_consistent"] = True
    return verdicts, details, intrinsic


def _cmd_closure(inputs, base, seed, tol):
    lam = _lam(inputs)
    rep = cl.closure_probe(lam, trials=inputs.get("trials", 100), seed=seed,
                           dim=inputs.get("dim", 8), split=inputs.get("split", 4),
                           n_max=inputs.get("n_max", 40), tol=tol)
    verdicts = {"accepted": rep.accepted, "trials": rep.trials,
                "counterexamples": len(rep.counterexamples),
                "max_limit_lambda_min": rep.max_limit_lambda}
    return verdicts, rep.summary(), {}


def _cmd_lambda_growth(inputs, base, seed, tol):
    dims = inputs.get("dims", [4, 8, 16, 32])
    if not dims or not all(isinstance(k, int) and k > 0 for k in dims):
        raise InputError("dims must be a non-empty list of positive integers")
    rep = cl.lambda_growth_probe(dims, tol)
    verdicts = {"strictly_increasing": rep.strictly_increasing,
                "growth_ratio": rep.lambda_min[-1] / rep.lambda_min[0]}
    return verdicts, rep.summary(), {}


def _cmd_series(inputs, base, seed, tol):
    rule = ps.CoeffRule.from_dict(_need(inputs, "coeff"))
    n_max = inputs.get("n_max", 200)
    lam = _lam(inputs, required=False)
    if lam is not None:
        blk = load_operator(inputs, base)
        t = bo.assemble(blk)
    else:
        blk = None
        t = _matrix(_need(inputs, "matrix"), base, "matrix")
    spec = ps.SeriesSpec(t, rule, n_max)
    diag = ps.series_diagnostics(spec)
    verdicts = {k: diag[k] for k in ("converges", "status", "beta_witness", "cauchy",
                                     "closed_form_gap", "bound_holds")}
    details = {"diagnostics": diag}
    if blk is not None:
        run = ps.power_membership_run(blk, lam, rule, inputs.get("membership_n_max", 50), tol)
        verdicts["membership_all_hold"] = run.all_hold
        verdicts["series_skipped"] = run.series_skipped
        details["membership"] = run.summary()
    return verdicts, details, {}


def _cmd_product_closure(inputs, base, seed, tol):
    lam = _lam(inputs)
    pairs = []
    if "random" in inputs:
        cfg = inputs["random"]
        for i in range(cfg.get("pairs", 100)):
            pairs.append(cl.random_phi_pair(dim=cfg.get("dim", 8), split=cfg.get("split", 4),
                                            lam=lam, seed=seed + i))
    else:
        pairs.append((load_operator(inputs, base, "t1_"), load_operator(inputs, base, "t2_")))
    keys = ("in_phi_l", "in_phi_r", "in_phi", "in_psi", "in_psi_perp")
    counts = dict.fromkeys(keys, 0)
    rows = []
    for t1, t2 in pairs:
        r = ct.product_closure_check(t1, t2, lam, tol)
        for k in keys:
            counts[k] += bool(getattr(r, k))
        rows.append(r.summary())
    n = len(pairs)
    verdicts = {"pairs": n, **{f"all_{k}": counts[k] == n for k in keys}, "counts": counts}
    return verdicts, {"per_pair": rows}, {}


HANDLERS = {
    "decompose": _cmd_decompose, "check": _cmd_check, "schur": _cmd_schur,
    "douglas": _cmd_douglas, "witnesses": _cmd_witnesses, "phi": _cmd_phi,
    "converge": _cmd_converge, "closure": _cmd_closure, "lambda-growth": _cmd_lambda_growth,
    "series": _cmd_series, "product-closure": _cmd_product_closure,
}


# --------------------------------------------------------------------------- expectations

def _compare(expected, actual) -> bool:
    if isinstance(expected, dict):
        if actual is None or isinstance(actual, (bool, str)):
            return False
        a = float(actual)
        ops = {"le": a.__le__, "ge": a.__ge__, "lt": a.__lt__, "gt": a.__gt__}
        for key, bound in expected.items():
            if key in ops:
                if not ops[key](float(bound)):
                    return False
            elif key == "value":
                rtol = float(expected.get("rtol", NUMBER_RTOL))
                if not abs(a - float(bound)) <= rtol * max(1.0, abs(float(bound))):
                    return False
            elif key != "rtol":
                raise InputError(f"unknown comparison {key!r}")
        return True
    if isinstance(expected, bool) or expected is None or isinstance(expected, str):
        return expected == actual
    if isinstance(expected, (int, float)):
        if actual is None or isinstance(actual, (bool, str)):
            return False
        return abs(float(actual) - expected) <= NUMBER_RTOL * max(1.0, abs(expected))
    return expected == actual


def evaluate(expect: dict, verdicts: dict, intrinsic: dict) -> list[dict]:
    out = []
    for key, want in {**intrinsic, **expect}.items():
        if key not in verdicts:
            raise InputError(f"expectation on unknown verdict {key!r}; available: {', '.join(verdicts)}")
        have = verdicts[key]
        out.append({"key": key, "expected": want, "actual": have,
                    "source": "scenario" if key in expect else "intrinsic",
                    "passed": _compare(want, have)})
    return out


# --------------------------------------------------------------------------- driver

def effective_tolerances(overrides: dict | None, env_range: float | None = None,
                         flag_range: float | None = None) -> Tolerances:
    """Defaults, then the environment, then the scenario file, then the command-line flag."""
    tol = DEFAULT
    if env_range is not None:
        tol = tol.replace(range=env_range)
    if overrides:
        unknown = set(overrides) - set(DEFAULT.as_dict())
        if unknown:
            raise InputError(f"unknown tolerance keys: {', '.join(sorted(unknown))}")
        vals = {}
        for k, v in overrides.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v >= 0:
                raise InputError(f"tolerance '{k}' must be a non-negative number")
            vals[k] = float(v)
        tol = tol.replace(**vals)
    if flag_range is not None:
        tol = tol.replace(range=flag_range)
    return tol


def validate(sc_: dict) -> None:
    if not isinstance(sc_, dict):
        raise InputError("scenario must be a JSON object")
    for key in ("name", "command"):
        if key not in sc_:
            raise InputError(f"scenario is missing '{key}'")
    if sc_["command"] not in HANDLERS:
        raise InputError(f"unknown command {sc_['command']!r}; expected one of {', '.join(COMMANDS)}")
    seed = sc_.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise InputError("seed must be a non-negative integer")
    for key in ("inputs", "expect", "tolerances"):
        if key in sc_ and not isinstance(sc_[key], dict):
            raise InputError(f"'{key}' must be a JSON object")


def run_scenario(sc_: dict, base: Path, env_range: float | None = None,
                 flag_range: float | None = None) -> tuple[dict, int]:
    """Execute one scenario; returns the report and the exit code."""
    report = {"tool": "schurkit", "version": __version__, "timestamp": timestamp(), "scenario": sc_}
    try:
        validate(sc_)
        tol = effective_tolerances(sc_.get("tolerances"), env_range, flag_range)
        report["tolerances"] = tol.as_dict()
        seed = sc_.get("seed", 0)
        verdicts, details, intrinsic = HANDLERS[sc_["command"]](sc_.get("inputs", {}), base, seed, tol)
        assertions = evaluate(sc_.get("expect", {}), verdicts, intrinsic)
    except (InputError, OSError) as exc:
        report.update(status="error", error=str(exc))
        return report, EXIT_INPUT
    except SchurkitError as exc:
        # mathematical failure inside a command whose inputs were valid
        report.update(status="fail", error=f"{type(exc).__name__}: {exc}")
        return report, EXIT_FAIL
    ok = all(a["passed"] for a in assertions)
    report.update(status="pass" if ok else "fail", verdicts=verdicts, assertions=assertions, details=details)
    return report, EXIT_PASS if ok else EXIT_FAIL
