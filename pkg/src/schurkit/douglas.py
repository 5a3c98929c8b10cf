"""Douglas factorization ``A = B C``: range inclusion tests and the reduced solution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import numkernel as nk
from .config import Tolerances, resolve
from .errors import InputError, RangeInclusionError

Mat = np.ndarray


class RangeTest(NamedTuple):
    included: bool
    residual: float


def _range_projector_residual(a: Mat, b: Mat, tol: Tolerances) -> Mat:
    u, _, _ = nk.truncated_svd(b, tol.rank)
    return a - u @ (u.T @ a)


def range_included(a: Mat, b: Mat, tol: Tolerances | None = None) -> RangeTest:
    """Test ``R(a) <= R(b)`` via ``||(I - b b^+) a||_F / (1 + ||a||_F)``."""
    tol = resolve(tol)
    a, b = nk.as_mat(a, "a"), nk.as_mat(b, "b")
    if a.shape[0] != b.shape[0]:
        raise InputError(f"row counts differ: a is {a.shape}, b is {b.shape}")
    residual = nk.fro(_range_projector_residual(a, b, tol)) / (1.0 + nk.fro(a))
    return RangeTest(residual <= tol.range, residual)


def range_gap(a: Mat, b: Mat, tol: Tolerances | None = None) -> float:
    """Sine of the largest principal angle between R(a) and R(b) (0 when included).

    Unlike the residual in ``range_included`` this does not depend on the size
    of the columns of ``a``, which matters when the offending directions are
    tiny but genuinely outside R(b).
    """
    tol = resolve(tol)
    qa, _, _ = nk.truncated_svd(a, tol.rank)
    if qa.shape[1] == 0:
        return 0.0
    return nk.op_norm(_range_projector_residual(qa, b, tol))


@dataclass(frozen=True)
class DouglasSolution:
    c: Mat
    residual: float
    norm_c: float
    range_residual: float


def reduced_solution(a: Mat, b: Mat, tol: Tolerances | None = None) -> DouglasSolution:
    """Minimal-norm solution ``c = b^+ a`` of ``a = b c``; raises when R(a) is not in R(b)."""
    tol = resolve(tol)
    test = range_included(a, b, tol)
    if not test.included:
        raise RangeInclusionError("R(A) is not contained in R(B)", test.residual)
    a, b = nk.as_mat(a), nk.as_mat(b)
    bp = nk.pinv(b, tol.rank)
    c = bp @ a
    residual = nk.fro(b @ c - a) / (1.0 + nk.fro(a))
    range_residual = nk.fro(c - bp @ (b @ c)) / (1.0 + nk.fro(c))
    return DouglasSolution(c, residual, nk.op_norm(c), range_residual)


class InfCheck(NamedTuple):
    inf_lambda: float
    norm_c: float
    norm_c_sq: float
    matches_sq_norm: bool
    matches_linear: bool


PSD_FLOOR = -1e-10


def _dominates(lam: float, k: Mat) -> bool:
    if k.size == 0:
        return True
    return float(np.linalg.eigvalsh(lam * np.eye(k.shape[0]) - k)[0]) >= PSD_FLOOR * (1.0 + lam)


def douglas_inf_check(a: Mat, b: Mat, sol: DouglasSolution, grid: int = 60,
                      tol: Tolerances | None = None) -> InfCheck:
    """Bisect for the least ``lam`` with ``a a^T <= lam b b^T`` and compare with ``||c||``.

    The classical identity is ``inf lam = ||c||^2``; both the squared and the
    linear comparison are reported. The order is tested on R(b), which
    contains R(a): in the left singular basis ``b b^T = S^2``, and the
    congruence by ``S^{-1}`` turns ``lam S^2 - U^T a a^T U >= 0`` into
    ``lam I - K >= 0`` with ``K = S^{-1} U^T a a^T U S^{-1}``. The congruence
    keeps the eigenvalue floor meaningful when b is ill-conditioned.
    """
    tol = resolve(tol)
    a, b = nk.as_mat(a), nk.as_mat(b)
    u, s, _ = nk.truncated_svd(b, tol.rank)
    w = (u.T @ a) / s[:, None]
    k = w @ w.T
    g = nk.gamma(b, tol.rank)
    hi = max(1.0, nk.op_norm(a) ** 2 / g**2) if np.isfinite(g) else 1.0
    lo = 0.0
    while not _dominates(hi, k):
        hi *= 2.0
    for _ in range(grid):
        mid = 0.5 * (lo + hi)
        if _dominates(mid, k):
            hi = mid
        else:
            lo = mid
    inf_lambda = hi
    nc = sol.norm_c
    return InfCheck(
        inf_lambda, nc, nc**2,
        abs(inf_lambda - nc**2) <= 1e-6 * (1.0 + nc**2),
        abs(inf_lambda - nc) <= 1e-6 * (1.0 + nc),
    )


def kernels_agree(x: Mat, y: Mat, tol: Tolerances | None = None) -> bool:
    """``N(x) == N(y)`` for two maps on the same domain, via ranks of the stacked map."""
    tol = resolve(tol)
    x, y = nk.as_mat(x), nk.as_mat(y)
    if x.shape[1] != y.shape[1]:
        raise InputError("kernels live in different spaces")
    r = nk.rank(np.vstack([x, y]), tol.rank)
    return r == nk.rank(x, tol.rank) == nk.rank(y, tol.rank)
