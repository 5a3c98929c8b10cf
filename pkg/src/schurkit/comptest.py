"""(M, N)-complementability: verdicts, minimal-lambda certificates, Ando witnesses, phi classes.

In finite dimensions the ball inclusion ``C(B_M) <= lam D(B_{M^perp})`` holds
exactly when R(C) <= R(D) and ``||D^+ C|| <= lam`` (the minimal-norm preimage
of ``Cx`` is ``D^+ C x``). ``check`` uses that closed form;
``ball_inclusion_residual`` is a sampling oracle that does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import blockops as bo
from . import numkernel as nk
from .blockops import BlockOp
from .config import Tolerances, resolve
from .douglas import range_gap, range_included
from .errors import InputError, MembershipError, NotComplementableError

Mat = np.ndarray

LAMBDA_SLACK = 1e-8
# relative excess treated as roundoff by the sampling oracle
ORACLE_ROUNDOFF = 1e-12


@dataclass(frozen=True)
class ComplementabilityReport:
    complementable: bool
    residual_c_in_d: float
    residual_bstar_in_dstar: float
    z: Mat | None = field(default=None, repr=False)
    y: Mat | None = field(default=None, repr=False)
    lambda_min: float | None = None
    lambda_char2_bound: float | None = None
    # scale-free counterparts of the residuals (sine of the largest principal angle)
    gap_c_in_d: float = 0.0
    gap_bstar_in_dstar: float = 0.0

    def accepts(self, lam: float, slack: float = LAMBDA_SLACK) -> bool:
        """Membership in psi(M, N, lam)."""
        return self.complementable and self.lambda_min <= lam + slack

    def summary(self) -> dict:
        return {
            "complementable": self.complementable,
            "residual_c_in_d": self.residual_c_in_d,
            "residual_bstar_in_dstar": self.residual_bstar_in_dstar,
            "lambda_min": self.lambda_min,
            "lambda_char2_bound": self.lambda_char2_bound,
            "gap_c_in_d": self.gap_c_in_d,
            "gap_bstar_in_dstar": self.gap_bstar_in_dstar,
        }


def check(blk: BlockOp, tol: Tolerances | None = None) -> ComplementabilityReport:
    tol = resolve(tol)
    rc = range_included(blk.c, blk.d, tol)
    rb = range_included(blk.b.T, blk.d.T, tol)
    d_rank = nk.rank(blk.d, tol.rank)
    if d_rank == 0:
        bound = math.inf
    else:
        g = nk.gamma(blk.d, tol.rank)
        # gamma(D^T) == gamma(D): same nonzero singular values
        bound = max(nk.op_norm(blk.c) / g, nk.op_norm(blk.b) / g)
    gaps = {"gap_c_in_d": range_gap(blk.c, blk.d, tol),
            "gap_bstar_in_dstar": range_gap(blk.b.T, blk.d.T, tol)}
    if not (rc.included and rb.included):
        return ComplementabilityReport(False, rc.residual, rb.residual, lambda_char2_bound=bound, **gaps)
    dp = nk.pinv(blk.d, tol.rank)
    z = dp @ blk.c
    y = blk.b @ dp
    lam = max(nk.op_norm(z), nk.op_norm(y))
    return ComplementabilityReport(True, rc.residual, rb.residual, z, y, lam, bound, **gaps)


def ball_inclusion_residual(c: Mat, d: Mat, lam: float, samples: int = 10_000, seed: int = 0,
                            tol: Tolerances | None = None) -> float:
    """Sampling oracle for ``C(B_M) <= lam D(B_{M^perp})``.

    For random unit ``x`` the minimal-norm preimage of ``Cx`` under ``D`` is found
    by LAPACK least squares; the result is ``max ||preimage|| / lam - 1`` clipped
    at 0 (excess up to 1e-12 counts as roundoff), or ``inf`` if some ``Cx`` is
    not reachable at all.
    """
    if lam <= 0:
        raise InputError("lambda must be positive")
    tol = resolve(tol)
    c, d = nk.as_mat(c, "c"), nk.as_mat(d, "d")
    if c.shape[1] == 0 or c.shape[0] == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((c.shape[1], samples))
    x /= np.linalg.norm(x, axis=0)
    cx = c @ x
    if d.shape[1] == 0:
        return 0.0 if nk.fro(cx) <= tol.range else math.inf
    smax = nk.op_norm(d)
    rcond = tol.rank.threshold(smax, d.shape) / smax if smax > 0 else None
    pre, *_ = np.linalg.lstsq(d, cx, rcond=rcond)
    miss = np.linalg.norm(d @ pre - cx, axis=0)
    if np.any(miss > tol.range * (1.0 + np.linalg.norm(cx, axis=0))):
        return math.inf
    excess = float(np.max(np.linalg.norm(pre, axis=0))) / lam - 1.0
    return excess if excess > ORACLE_ROUNDOFF else 0.0


@dataclass(frozen=True)
class AndoWitnesses:
    m_r: Mat
    m_ell: Mat


def ando_witnesses(blk: BlockOp, tol: Tolerances | None = None) -> AndoWitnesses:
    rep = check(blk, tol)
    if not rep.complementable:
        raise NotComplementableError("no Ando witnesses: operator is not complementable",
                                     rep.residual_c_in_d, rep.residual_bstar_in_dstar)
    tol = resolve(tol)
    dp = nk.pinv(blk.d, tol.rank)
    dm, dn = blk.m_sub.dim, blk.n_sub.dim
    dmp, dnp = blk.m_perp.dim, blk.n_perp.dim
    right = BlockOp(blk.m_sub, blk.m_sub, np.zeros((dm, dm)), np.zeros((dm, dmp)),
                    rep.z, dp @ blk.d, blk.m_perp, blk.m_perp)
    left = BlockOp(blk.n_sub, blk.n_sub, np.zeros((dn, dn)), rep.y,
                   np.zeros((dnp, dn)), blk.d @ dp, blk.n_perp, blk.n_perp)
    return AndoWitnesses(bo.assemble(right), bo.assemble(left))


def ando_residuals(blk: BlockOp, w: AndoWitnesses) -> np.ndarray:
    """Relative residuals of the four defining identities of (P_r, P_l)-complementability."""
    t = bo.assemble(blk)
    qr = np.eye(blk.domain_dim) - blk.m_sub.projector
    ql = np.eye(blk.codomain_dim) - blk.n_sub.projector

    def rel(lhs, rhs):
        return nk.fro(lhs - rhs) / (1.0 + nk.fro(rhs))

    return np.array([
        rel(qr @ w.m_r, w.m_r),
        rel(ql @ t @ w.m_r, ql @ t),
        rel(w.m_ell @ ql, w.m_ell),
        rel(w.m_ell @ t @ qr, t @ qr),
    ])


class PhiMembership(NamedTuple):
    in_phi_l: bool
    in_phi_r: bool
    in_phi: bool


def _require_square(blk: BlockOp) -> None:
    if blk.domain_dim != blk.codomain_dim:
        raise InputError(
            f"phi classes need H = K; got dim H = {blk.domain_dim}, dim K = {blk.codomain_dim}"
        )


def phi_levels(blk: BlockOp, tol: Tolerances | None = None) -> tuple[float, float]:
    """Least lambda for phi_L and phi_R membership (``inf`` when the range test fails).

    phi_L splits into ``A x = lam B y`` and ``C x = lam D y`` with one shared
    ``y``, i.e. a Douglas problem for the stacked columns [A; C] against [B; D].
    phi_R is the same test for the transposed blocks.
    """
    _require_square(blk)
    tol = resolve(tol)
    pairs = (
        (np.vstack([blk.a, blk.c]), np.vstack([blk.b, blk.d])),
        (np.vstack([blk.a.T, blk.b.T]), np.vstack([blk.c.T, blk.d.T])),
    )
    levels = []
    for lhs, rhs in pairs:
        if not range_included(lhs, rhs, tol).included:
            levels.append(math.inf)
        else:
            levels.append(nk.op_norm(nk.pinv(rhs, tol.rank) @ lhs))
    return levels[0], levels[1]


def phi_membership(blk: BlockOp, lam: float, tol: Tolerances | None = None,
                   slack: float = LAMBDA_SLACK) -> PhiMembership:
    if lam <= 0:
        raise InputError("lambda must be positive")
    lev_l, lev_r = phi_levels(blk, tol)
    in_l = lev_l <= lam + slack
    in_r = lev_r <= lam + slack
    return PhiMembership(in_l, in_r, in_l and in_r)


@dataclass(frozen=True)
class ProductClosureReport:
    lam: float
    in_phi_l: bool
    in_phi_r: bool
    in_phi: bool
    in_psi: bool
    in_psi_perp: bool
    lambda_min: float | None
    lambda_min_perp: float | None
    phi_levels: tuple[float, float]

    @property
    def all_hold(self) -> bool:
        return self.in_phi_l and self.in_phi_r and self.in_phi and self.in_psi and self.in_psi_perp

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "in_phi_l": self.in_phi_l,
            "in_phi_r": self.in_phi_r,
            "in_phi": self.in_phi,
            "in_psi": self.in_psi,
            "in_psi_perp": self.in_psi_perp,
            "lambda_min": self.lambda_min,
            "lambda_min_perp": self.lambda_min_perp,
            "phi_level_l": self.phi_levels[0],
            "phi_level_r": self.phi_levels[1],
        }


def psi_membership(blk: BlockOp, lam: float, tol: Tolerances | None = None,
                   slack: float = LAMBDA_SLACK) -> tuple[bool, bool, ComplementabilityReport, ComplementabilityReport]:
    """Membership in psi(M, N, lam) and in psi(M^perp, N^perp, lam)."""
    rep = check(blk, tol)
    rep_perp = check(bo.swap(blk), tol)
    return rep.accepts(lam, slack), rep_perp.accepts(lam, slack), rep, rep_perp


def product_closure_check(t1: BlockOp, t2: BlockOp, lam: float,
                          tol: Tolerances | None = None) -> ProductClosureReport:
    """Evaluate the product closure conclusions for ``T1 T2`` given T1 in phi_R and T2 in phi_L."""
    _require_square(t1)
    _require_square(t2)
    if not phi_membership(t1, lam, tol).in_phi_r:
        raise MembershipError(f"T1 is not in phi_R(M, N, {lam})")
    if not phi_membership(t2, lam, tol).in_phi_l:
        raise MembershipError(f"T2 is not in phi_L(M, N, {lam})")
    prod = bo.assemble(t1) @ bo.assemble(t2)
    blk = bo.decompose(prod, t2.m_sub, t1.n_sub, m_perp=t2.m_perp, n_perp=t1.n_perp)
    levels = phi_levels(blk, tol)
    ph = phi_membership(blk, lam, tol)
    in_psi, in_perp, rep, rep_perp = psi_membership(blk, lam, tol)
    return ProductClosureReport(lam, ph.in_phi_l, ph.in_phi_r, ph.in_phi, in_psi, in_perp,
                                rep.lambda_min, rep_perp.lambda_min, levels)
