"""Dense real linear-algebra kernel.

Every routine here is backed by a single thin SVD so that rank decisions are
made the same way everywhere: a singular value counts as nonzero only when it
exceeds ``RankTolerance.threshold``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .config import RankTolerance
from .errors import DecompositionError, InputError

Mat = np.ndarray

DEFAULT_RANK_TOL = RankTolerance()


def as_mat(m, name: str = "matrix") -> Mat:
    """Return ``m`` as a finite 2-D float64 array, or raise InputError."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


class SvdFactors(NamedTuple):
    u: Mat
    sigma: np.ndarray
    vt: Mat


def svd(m: Mat) -> SvdFactors:
    m = as_mat(m)
    r, c = m.shape
    k = min(r, c)
    if k == 0:
        return SvdFactors(np.zeros((r, 0)), np.zeros(0), np.zeros((0, c)))
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD did not converge for {r}x{c} input: {exc}") from exc
    return SvdFactors(u, s, vt)


def _threshold(f: SvdFactors, shape, tol: RankTolerance) -> float:
    smax = float(f.sigma[0]) if f.sigma.size else 0.0
    return tol.threshold(smax, shape)


def _rank_from(f: SvdFactors, shape, tol: RankTolerance) -> int:
    if f.sigma.size == 0:
        return 0
    return int(np.count_nonzero(f.sigma > _threshold(f, shape, tol)))


def rank(m: Mat, tol: RankTolerance = DEFAULT_RANK_TOL) -> int:
    m = as_mat(m)
    return _rank_from(svd(m), m.shape, tol)


def truncated_svd(m: Mat, tol: RankTolerance = DEFAULT_RANK_TOL) -> SvdFactors:
    """SVD restricted to the singular triplets above the rank threshold."""
    m = as_mat(m)
    f = svd(m)
    k = _rank_from(f, m.shape, tol)
    return SvdFactors(f.u[:, :k], f.sigma[:k], f.vt[:k, :])


def pinv(m: Mat, tol: RankTolerance = DEFAULT_RANK_TOL) -> Mat:
    u, s, vt = truncated_svd(m, tol)
    return (vt.T / s) @ u.T


def gamma(m: Mat, tol: RankTolerance = DEFAULT_RANK_TOL) -> float:
    """Reduced minimum modulus: the smallest singular value above the rank threshold.

    The zero operator has no such value and gets ``math.inf``.
    """
    s = truncated_svd(m, tol).sigma
    return float(s[-1]) if s.size else math.inf


def op_norm(m: Mat) -> float:
    m = as_mat(m)
    if m.size == 0:
        return 0.0
    return float(svd(m).sigma[0])


def fro(m: Mat) -> float:
    return float(np.linalg.norm(m)) if np.size(m) else 0.0


def polar(m: Mat, tol: RankTolerance = DEFAULT_RANK_TOL) -> tuple[Mat, Mat]:
    """Polar decomposition ``m = u @ modulus``.

    ``modulus`` is ``(m^T m)^{1/2}``; ``u`` is the partial isometry that is the
    identity-like map on range(modulus) and zero on the kernel of ``m``.
    """
    m = as_mat(m)
    f = svd(m)
    k = _rank_from(f, m.shape, tol)
    modulus = (f.vt.T * f.sigma) @ f.vt
    u = f.u[:, :k] @ f.vt[:k, :]
    return u, modulus


def _check_symmetric_psd(m: Mat, atol: float) -> tuple[np.ndarray, Mat]:
    scale = 1.0 + fro(m)
    if fro(m - m.T) > atol * scale:
        raise InputError("matrix is not symmetric")
    w, v = np.linalg.eigh((m + m.T) / 2)
    if w.size and w[0] < -atol * scale:
        raise InputError(f"matrix is indefinite (smallest eigenvalue {w[0]:.3e})")
    return np.clip(w, 0.0, None), v


def sqrt_psd(m: Mat) -> Mat:
    m = as_mat(m)
    if m.shape[0] != m.shape[1]:
        raise InputError(f"sqrt_psd needs a square matrix, got {m.shape}")
    w, v = _check_symmetric_psd(m, 1e-10)
    return (v * np.sqrt(w)) @ v.T


def moduli_sqrt(m: Mat, tol: RankTolerance = DEFAULT_RANK_TOL) -> tuple[Mat, Mat]:
    """Return ``(|m^T|^{1/2}, |m|^{1/2})`` straight from the SVD factors of ``m``.

    Singular values below the rank threshold are dropped before the square
    root so that the ranges agree with those of ``m`` and ``m^T``.
    """
    u, s, vt = truncated_svd(m, tol)
    rs = np.sqrt(s)
    return (u * rs) @ u.T, (vt.T * rs) @ vt


def projector(basis: Mat) -> Mat:
    return basis @ basis.T
