"""2x2 block form of an operator with respect to subspace pairs (M, N).

Subspaces are carried as orthonormal bases. Block entries are coordinates in
those bases, so ``a`` is ``U_N^T T U_M`` and so on; the orthogonal complements
are fixed once when a BlockOp is built so that decompose/assemble round-trip.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import numkernel as nk
from .config import RankTolerance
from .errors import InputError

Mat = np.ndarray

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class Subspace:
    ambient_dim: int
    basis: Mat

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.float64)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            raise InputError(f"basis shape {b.shape} does not match ambient dimension {self.ambient_dim}")
        if b.shape[1] > self.ambient_dim:
            raise InputError("more basis vectors than the ambient dimension")
        gram_err = nk.fro(b.T @ b - np.eye(b.shape[1]))
        if gram_err > ORTHO_TOL:
            raise InputError(f"basis is not orthonormal (Gram error {gram_err:.3e})")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> Mat:
        return nk.projector(self.basis)

    def rotated(self, q: Mat) -> "Subspace":
        """Same subspace, basis replaced by ``basis @ q`` for an orthogonal ``q``."""
        return Subspace(self.ambient_dim, self.basis @ q)


def orthonormalize(raw: Mat, tol: RankTolerance = nk.DEFAULT_RANK_TOL) -> Subspace:
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim == 1:
        raw = raw[:, None]
    raw = nk.as_mat(raw, "raw basis")
    u, _, _ = nk.truncated_svd(raw, tol)
    return Subspace(raw.shape[0], u)


def coordinate_subspace(ambient_dim: int, indices) -> Subspace:
    """Span of the canonical basis vectors at ``indices``."""
    idx = list(indices)
    return Subspace(ambient_dim, np.eye(ambient_dim)[:, idx])


def leading(ambient_dim: int, k: int) -> Subspace:
    return coordinate_subspace(ambient_dim, range(k))


def complement(s: Subspace) -> Subspace:
    n, k = s.ambient_dim, s.dim
    if k == 0:
        return Subspace(n, np.eye(n))
    u, _, _ = np.linalg.svd(s.basis, full_matrices=True)
    return Subspace(n, u[:, k:])


@dataclass(frozen=True)
class BlockOp:
    """Blocks of ``T: H -> K`` w.r.t. ``H = M + M^perp`` and ``K = N + N^perp``."""

    m_sub: Subspace
    n_sub: Subspace
    a: Mat
    b: Mat
    c: Mat
    d: Mat
    m_perp: Subspace
    n_perp: Subspace

    def __post_init__(self):
        dm, dmp = self.m_sub.dim, self.m_perp.dim
        dn, dnp = self.n_sub.dim, self.n_perp.dim
        expected = {"a": (dn, dm), "b": (dn, dmp), "c": (dnp, dm), "d": (dnp, dmp)}
        for name, shape in expected.items():
            blk = np.asarray(getattr(self, name), dtype=np.float64)
            # empty blocks arrive in whatever shape numpy produced (e.g. (0,) or (1, 0))
            blk = blk.reshape(shape) if blk.size == 0 and 0 in shape else nk.as_mat(blk, name)
            if blk.shape != shape:
                raise InputError(f"block {name} has shape {blk.shape}, expected {shape}")
            object.__setattr__(self, name, blk)
        if dm + dmp != self.m_sub.ambient_dim or dn + dnp != self.n_sub.ambient_dim:
            raise InputError("subspace and complement dimensions do not add up")

    @property
    def domain_dim(self) -> int:
        return self.m_sub.ambient_dim

    @property
    def codomain_dim(self) -> int:
        return self.n_sub.ambient_dim

    def with_blocks(self, a=None, b=None, c=None, d=None) -> "BlockOp":
        return BlockOp(
            self.m_sub, self.n_sub,
            self.a if a is None else a, self.b if b is None else b,
            self.c if c is None else c, self.d if d is None else d,
            self.m_perp, self.n_perp,
        )

    def rotated(self, qm, qmp, qn, qnp) -> "BlockOp":
        """Re-express the same operator after rotating each stored basis."""
        return decompose(
            assemble(self),
            self.m_sub.rotated(qm), self.n_sub.rotated(qn),
            m_perp=self.m_perp.rotated(qmp), n_perp=self.n_perp.rotated(qnp),
        )


def decompose(t: Mat, m: Subspace, n: Subspace, *, m_perp: Subspace | None = None,
              n_perp: Subspace | None = None) -> BlockOp:
    t = nk.as_mat(t, "operator")
    if t.shape != (n.ambient_dim, m.ambient_dim):
        raise InputError(
            f"operator shape {t.shape} incompatible with subspaces of ambient "
            f"dimensions (K={n.ambient_dim}, H={m.ambient_dim})"
        )
    mp = complement(m) if m_perp is None else m_perp
    np_ = complement(n) if n_perp is None else n_perp
    um, ump, un, unp = m.basis, mp.basis, n.basis, np_.basis
    return BlockOp(
        m, n,
        un.T @ t @ um, un.T @ t @ ump,
        unp.T @ t @ um, unp.T @ t @ ump,
        mp, np_,
    )


def split(t: Mat, k_m: int, k_n: int | None = None) -> BlockOp:
    """Decompose against the leading ``k_m`` (domain) and ``k_n`` (codomain) coordinates."""
    t = nk.as_mat(t, "operator")
    k_n = k_m if k_n is None else k_n
    return decompose(t, leading(t.shape[1], k_m), leading(t.shape[0], k_n))


def from_blocks(a, b, c, d) -> BlockOp:
    """Build a BlockOp in canonical coordinates from explicit blocks."""
    a, b, c, d = (np.atleast_2d(np.asarray(x, dtype=np.float64)) for x in (a, b, c, d))
    top = np.hstack([a, b])
    bottom = np.hstack([c, d])
    t = np.vstack([top, bottom])
    return split(t, a.shape[1], a.shape[0])


def assemble(blk: BlockOp) -> Mat:
    um, ump = blk.m_sub.basis, blk.m_perp.basis
    un, unp = blk.n_sub.basis, blk.n_perp.basis
    return (un @ blk.a @ um.T + un @ blk.b @ ump.T
            + unp @ blk.c @ um.T + unp @ blk.d @ ump.T)


def swap(blk: BlockOp) -> BlockOp:
    """Block form of the same operator w.r.t. (M^perp, N^perp)."""
    return BlockOp(blk.m_perp, blk.n_perp, blk.d, blk.c, blk.b, blk.a, blk.m_sub, blk.n_sub)


class NormSandwich(NamedTuple):
    lower: float
    norm: float
    upper: float
    holds: bool


def norm_sandwich(blk: BlockOp) -> NormSandwich:
    norms = [nk.op_norm(x) for x in (blk.a, blk.b, blk.c, blk.d)]
    lower, upper = max(norms), sum(norms)
    norm = nk.op_norm(assemble(blk))
    holds = lower <= norm + 1e-10 and norm <= upper + 1e-10
    return NormSandwich(lower, norm, upper, holds)


def block_gaps(blk: BlockOp, other: BlockOp) -> np.ndarray:
    """Spectral-norm distances of the four blocks, in the order a, b, c, d."""
    return np.array([
        nk.op_norm(getattr(blk, name) - getattr(other, name)) for name in "abcd"
    ])


def round_trip_error(t: Mat, blk: BlockOp) -> float:
    return nk.fro(assemble(blk) - t) / (1.0 + nk.fro(t))
