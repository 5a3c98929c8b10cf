"""Schur complement T/(M,N) by the classical, reduced-solution and weak (E, F) routes."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import blockops as bo
from . import numkernel as nk
from .blockops import BlockOp
from .comptest import check
from .config import Tolerances, resolve
from .douglas import range_included, reduced_solution
from .errors import NotComplementableError, SchurkitError, SingularBlockError

Mat = np.ndarray

ROUTE_AGREEMENT = 1e-8


class Route(str, Enum):
    CLASSICAL = "classical"
    REDUCED_Z = "reduced_z"
    REDUCED_Y = "reduced_y"
    WEAK_EF = "weak_ef"


@dataclass(frozen=True)
class SchurResult:
    core: Mat
    full: Mat
    route: Route
    dual_gap: float | None = None
    condition: float | None = None


def _result(blk: BlockOp, core: Mat, route: Route, **extra) -> SchurResult:
    zero = blk.with_blocks(a=core, b=np.zeros_like(blk.b), c=np.zeros_like(blk.c), d=np.zeros_like(blk.d))
    return SchurResult(core, bo.assemble(zero), route, **extra)


def relative_gap(x: Mat, y: Mat) -> float:
    return nk.fro(x - y) / (1.0 + max(nk.fro(x), nk.fro(y)))


def schur_classical(blk: BlockOp, tol: Tolerances | None = None) -> SchurResult:
    """``A - B D^{-1} C`` for square invertible D."""
    tol = resolve(tol)
    d = blk.d
    if d.shape[0] != d.shape[1]:
        raise SingularBlockError(f"D is {d.shape[0]}x{d.shape[1]}, not square; use schur_reduced")
    if d.shape[0] and nk.rank(d, tol.rank) < d.shape[0]:
        raise SingularBlockError("D is singular; use schur_reduced")
    if d.size == 0:
        return _result(blk, blk.a.copy(), Route.CLASSICAL, condition=1.0)
    cond = float(np.linalg.cond(d))
    core = blk.a - blk.b @ np.linalg.solve(d, blk.c)
    return _result(blk, core, Route.CLASSICAL, condition=cond)


def schur_reduced(blk: BlockOp, tol: Tolerances | None = None) -> SchurResult:
    """``A - B Z`` with Z the reduced solution of ``C = D Z``, checked against ``A - Y C``."""
    rep = check(blk, tol)
    if not rep.complementable:
        raise NotComplementableError("Schur complement undefined: not complementable",
                                     rep.residual_c_in_d, rep.residual_bstar_in_dstar)
    core_z = blk.a - blk.b @ rep.z
    core_y = blk.a - rep.y @ blk.c
    gap = relative_gap(core_z, core_y)
    if gap > ROUTE_AGREEMENT:
        raise SchurkitError(f"A - BZ and A - YC disagree (relative gap {gap:.3e})")
    return _result(blk, core_z, Route.REDUCED_Z, dual_gap=gap)


def schur_dual(blk: BlockOp, tol: Tolerances | None = None) -> SchurResult:
    """``A - Y C`` with ``Y^T`` the reduced solution of ``B^T = D^T Y^T``."""
    rep = check(blk, tol)
    if not rep.complementable:
        raise NotComplementableError("Schur complement undefined: not complementable",
                                     rep.residual_c_in_d, rep.residual_bstar_in_dstar)
    return _result(blk, blk.a - rep.y @ blk.c, Route.REDUCED_Y)


class WeakCheck(NamedTuple):
    weakly: bool
    residuals: tuple[float, float]


def _weak_factors(blk: BlockOp, tol: Tolerances) -> tuple[Mat, Mat]:
    # |D*|^{1/2} (on N^perp) and |D|^{1/2} (on M^perp)
    return nk.moduli_sqrt(blk.d, tol.rank)


def weak_check(blk: BlockOp, tol: Tolerances | None = None) -> WeakCheck:
    tol = resolve(tol)
    left, right = _weak_factors(blk, tol)
    rc = range_included(blk.c, left, tol)
    rb = range_included(blk.b.T, right, tol)
    return WeakCheck(rc.included and rb.included, (rc.residual, rb.residual))


def schur_weak(blk: BlockOp, tol: Tolerances | None = None) -> SchurResult:
    """``A - E^T F`` with F, E the reduced solutions of ``C = |D*|^{1/2} U X`` and ``B^T = |D|^{1/2} X``."""
    tol = resolve(tol)
    wc = weak_check(blk, tol)
    if not wc.weakly:
        raise NotComplementableError("Schur complement undefined: not weakly complementable", *wc.residuals)
    left, right = _weak_factors(blk, tol)
    u, _ = nk.polar(blk.d, tol.rank)
    f = reduced_solution(blk.c, left @ u, tol).c
    e = reduced_solution(blk.b.T, right, tol).c
    return _result(blk, blk.a - e.T @ f, Route.WEAK_EF)


def all_routes(blk: BlockOp, tol: Tolerances | None = None) -> dict[Route, SchurResult]:
    """Every route that applies to ``blk``; classical only when D is square and invertible."""
    out: dict[Route, SchurResult] = {}
    try:
        out[Route.CLASSICAL] = schur_classical(blk, tol)
    except SingularBlockError:
        pass
    if check(blk, tol).complementable:
        out[Route.REDUCED_Z] = schur_reduced(blk, tol)
        out[Route.REDUCED_Y] = schur_dual(blk, tol)
    if weak_check(blk, tol).weakly:
        out[Route.WEAK_EF] = schur_weak(blk, tol)
    return out


def max_route_gap(results: dict[Route, SchurResult]) -> float:
    cores = [r.core for r in results.values()]
    gaps = [relative_gap(x, y) for i, x in enumerate(cores) for y in cores[i + 1:]]
    return max(gaps, default=0.0)
