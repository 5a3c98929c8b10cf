"""Operator-sequence laboratory.

Generators for the worked example sequences and for finite-truncation versions
of the boundary constructions, convergence detectors, and probes for the
limit theorems. Strong convergence can only be observed on finitely many
vectors here; reports call it "strong-on-samples".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import blockops as bo
from . import numkernel as nk
from .blockops import BlockOp, Subspace
from .comptest import check
from .config import Tolerances, resolve
from .douglas import range_gap, range_included
from .errors import InputError, SequenceError

Mat = np.ndarray

KINDS = (
    "paper_example_n_inverse",
    "positive_l2_truncation",
    "ptwise_killer",
    "ptwise2_killer",
    "explicit_list",
    "random_complementable",
)


# --------------------------------------------------------------------------- tail tests

class TailTest(NamedTuple):
    vanishes: bool
    tail_below: bool
    slope: float | None


def tends_to_zero(values, eps: float = 1e-6) -> TailTest:
    """Finite-horizon test for ``values[n] -> 0``.

    Passes when the last quarter of the sequence is below ``eps``, or when a
    log-log fit over that quarter has slope below -0.5 (per decade of n).
    """
    v = np.abs(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        return TailTest(True, True, None)
    start = (3 * n) // 4
    tail = v[start:]
    below = bool(np.all(tail <= eps))
    idx = np.arange(start + 1, n + 1, dtype=float)
    pos = tail > 0
    slope = None
    if np.count_nonzero(pos) >= 2 and np.ptp(idx[pos]) > 0:
        slope = float(np.polyfit(np.log10(idx[pos]), np.log10(tail[pos]), 1)[0])
    return TailTest(below or (slope is not None and slope < -0.5), below, slope)


# --------------------------------------------------------------------------- sequences

@dataclass(frozen=True)
class OpSequence:
    kind: str
    params: dict
    n_max: int
    seed: int
    m_sub: Subspace
    n_sub: Subspace
    limit: Mat
    _term: Callable[[int], Mat] = field(repr=False, compare=False)
    info: dict = field(default_factory=dict, compare=False)

    def term(self, n: int) -> Mat:
        if not 1 <= n <= self.n_max:
            raise InputError(f"term index {n} outside 1..{self.n_max}")
        return self._term(n)

    def terms(self):
        for n in range(1, self.n_max + 1):
            yield n, self.term(n)

    def block(self, t: Mat) -> BlockOp:
        return bo.decompose(t, self.m_sub, self.n_sub,
                            m_perp=self.info["m_perp"], n_perp=self.info["n_perp"])

    def term_blk(self, n: int) -> BlockOp:
        return self.block(self.term(n))

    def limit_blk(self) -> BlockOp:
        return self.block(self.limit)


def _random_orthogonal(rng, n: int) -> Mat:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _random_subspace(rng, ambient: int, k: int) -> Subspace:
    return Subspace(ambient, _random_orthogonal(rng, ambient)[:, :k])


def _with_norm(rng, shape, norm: float) -> Mat:
    x = rng.standard_normal(shape)
    s = nk.op_norm(x)
    return x * (norm / s) if s > 0 else x


def _clamp(x: Mat, bound: float) -> Mat:
    s = nk.op_norm(x)
    return x * (bound / s) if s > bound else x


def _canonical(dim_h: int, k_m: int, dim_k: int | None = None, k_n: int | None = None):
    dim_k = dim_h if dim_k is None else dim_k
    k_n = k_m if k_n is None else k_n
    m, n = bo.leading(dim_h, k_m), bo.leading(dim_k, k_n)
    return m, n, bo.complement(m), bo.complement(n)


def _make(kind, params, n_max, seed, subs, limit, term, **info) -> OpSequence:
    m, n, mp, np_ = subs
    info.update(m_perp=mp, n_perp=np_)
    return OpSequence(kind, dict(params), n_max, seed, m, n, limit, term, info)


def _from_blocks(subs, a, b, c, d) -> Mat:
    m, n, mp, np_ = subs
    return bo.assemble(BlockOp(m, n, a, b, c, d, mp, np_))


def _paper_example(n_max: int, seed: int, k: int = 1) -> OpSequence:
    subs = _canonical(2 * k, k)
    eye = np.eye(k)

    def term(n):
        return _from_blocks(subs, eye, eye, (1 + 1 / n) * eye, eye / n)

    limit = _from_blocks(subs, eye, eye, eye, np.zeros((k, k)))
    return _make("paper_example_n_inverse", {"k": k}, n_max, seed, subs, limit, term)


def positive_l2_operator(k: int) -> Mat:
    """Truncation of ``[[D, P], [P, D]]`` with ``D = diag(1/i^2)`` and P the
    projector onto the span of ``(1, 1/2, 1/3, ...)``."""
    i = np.arange(1, k + 1, dtype=float)
    d = np.diag(1.0 / i**2)
    v = (1.0 / i) / np.linalg.norm(1.0 / i)
    p = np.outer(v, v)
    return np.block([[d, p], [p, d]])


def _positive_l2(n_max: int, seed: int, k: int = 3) -> OpSequence:
    subs = _canonical(2 * k, k)
    t = positive_l2_operator(k)
    return _make("positive_l2_truncation", {"k": k}, n_max, seed, subs, t, lambda n: t)


def _explicit(n_max: int | None, seed: int, terms, limit, k_m: int, k_n: int | None = None) -> OpSequence:
    mats = [nk.as_mat(t, f"term {i + 1}") for i, t in enumerate(terms)]
    if not mats:
        raise InputError("explicit_list needs at least one term")
    shape = mats[0].shape
    if any(t.shape != shape for t in mats):
        raise InputError("explicit_list terms must share one shape")
    limit = nk.as_mat(limit, "limit")
    if limit.shape != shape:
        raise InputError(f"limit shape {limit.shape} differs from term shape {shape}")
    subs = _canonical(shape[1], k_m, shape[0], k_n)
    n_max = len(mats) if n_max is None else n_max
    if n_max > len(mats):
        raise InputError(f"n_max={n_max} exceeds the {len(mats)} listed terms")
    return _make("explicit_list", {"k_m": k_m, "k_n": k_n}, n_max, seed, subs, limit,
                 lambda n: mats[n - 1])


def _random_complementable(n_max: int, seed: int, dim: int = 8, split: int = 4, lam: float = 5.0,
                           variant: str = "perturbed", power: float = 2.0) -> OpSequence:
    """Sequences inside psi(M, N, lam) built as ``C_n = D_n Z_n``, ``B_n = Y_n D_n``.

    ``variant``: ``perturbed`` (all blocks move by O(n^-power)), ``constant``,
    ``increasing`` (lambda_n increases to lam), ``rank_deficient`` (perturbed,
    with a rank-deficient limiting D).
    """
    if not 0 < split < dim:
        raise InputError(f"split must lie strictly between 0 and dim={dim}")
    if variant not in ("perturbed", "constant", "increasing", "rank_deficient"):
        raise InputError(f"unknown variant {variant!r}")
    rng = np.random.default_rng(seed)
    m, n = _random_subspace(rng, dim, split), _random_subspace(rng, dim, split)
    subs = (m, n, bo.complement(m), bo.complement(n))
    dm = dn = split
    dmp = dnp = dim - split
    d0 = rng.standard_normal((dnp, dmp))
    if variant == "rank_deficient":
        r = max(1, min(dnp, dmp) // 2)
        d0 = rng.standard_normal((dnp, r)) @ rng.standard_normal((r, dmp))
    a0 = rng.standard_normal((dn, dm))
    if variant == "increasing":
        z0 = _with_norm(rng, (dmp, dm), lam)
        # keep Y below the growing Z so lambda_n itself increases to lam
        y0 = _with_norm(rng, (dn, dnp), lam * rng.uniform(0.3, 0.9))
    else:
        z0 = _with_norm(rng, (dmp, dm), lam * rng.uniform(0.3, 1.0))
        y0 = _with_norm(rng, (dn, dnp), lam * rng.uniform(0.3, 1.0))
    still = variant in ("constant", "increasing")
    e_d, e_z, e_y, e_a = (np.zeros_like(x) if still else rng.standard_normal(x.shape)
                          for x in (d0, z0, y0, a0))

    def term(k):
        s = float(k) ** -power
        dk = d0 + s * e_d
        if variant == "increasing":
            zk = z0 * (1 - 1 / (k + 1))
        else:
            zk = _clamp(z0 + s * e_z, lam)
        yk = _clamp(y0 + s * e_y, lam)
        return _from_blocks(subs, a0 + s * e_a, yk @ dk, dk @ zk, dk)

    limit = _from_blocks(subs, a0, y0 @ d0, d0 @ z0, d0)
    params = {"dim": dim, "split": split, "lam": lam, "variant": variant, "power": power}
    return _make("random_complementable", params, n_max, seed, subs, limit, term)


def _killer_base(rng, k: int, decay: float, rank_c: int | None):
    q1, q2 = _random_orthogonal(rng, k), _random_orthogonal(rng, k)
    d = (q1 * decay ** np.arange(k)) @ q2.T
    if rank_c is None:
        c = q1 @ _random_orthogonal(rng, k)
    else:
        z = rng.standard_normal((k, rank_c)) @ rng.standard_normal((rank_c, k))
        c = d @ z
        c /= nk.op_norm(c)
    a = rng.standard_normal((k, k)) / math.sqrt(k)
    b = rng.standard_normal((k, k)) / math.sqrt(k)
    return a, b, c, d


def _ordered_family(d: Mat, basis: Mat, tol: Tolerances) -> Mat:
    """Orthonormal family spanning ``basis``, ordered by decreasing ``||D a_i||``."""
    if basis.shape[1] == 0:
        return basis
    _, _, vt = np.linalg.svd(d @ basis, full_matrices=True)
    return basis @ vt.T


def _ptwise(n_max: int, seed: int, k: int = 64, decay: float = 0.7, tol: Tolerances | None = None) -> OpSequence:
    """Finite truncation of the D_n construction: D_n kills D on span{a_n, a_{n+1}, ...}.

    The family is an orthonormal basis of ``D^{-1}(R(C)) & N(D)^perp`` ordered
    by the singular values of D restricted to it, so ``D a_i != 0`` lies in R(C).
    """
    tol = resolve(tol)
    rng = np.random.default_rng(seed)
    a, b, c, d = _killer_base(rng, k, decay, None)
    qc = nk.truncated_svd(c, tol.rank).u
    w = bo.orthonormalize(nk.pinv(d, tol.rank) @ qc, tol.rank).basis
    fam = _ordered_family(d, w, tol)
    if n_max > fam.shape[1]:
        raise InputError(f"n_max={n_max} exceeds the family size {fam.shape[1]} available in D^-1(R(C))")
    subs = _canonical(2 * k, k)

    def d_n(n):
        tail = fam[:, n - 1:]
        return d - d @ tail @ tail.T

    def term(n):
        return _from_blocks(subs, a, b, c, d_n(n))

    limit = _from_blocks(subs, a, b, c, d)
    return _make("ptwise_killer", {"k": k, "decay": decay}, n_max, seed, subs, limit, term,
                 family=fam, family_images=np.linalg.norm(d @ fam, axis=0))


def _ptwise2(n_max: int, seed: int, k: int = 64, rank_c: int = 2, decay: float = 0.7,
             tol: Tolerances | None = None) -> OpSequence:
    """Finite truncation of the (C_n, D_n) construction for finite-rank C.

    The family a_i spans N(D)^perp minus D^{-1}(R(C)); f_i spans N(C); the
    isometry h sends f_i to a_i and C_n = C + D h on span{f_n, f_{n+1}, ...}.
    """
    tol = resolve(tol)
    if not 0 < rank_c < k:
        raise InputError(f"rank_c must lie strictly between 0 and k={k}")
    rng = np.random.default_rng(seed)
    a, b, c, d = _killer_base(rng, k, decay, rank_c)
    qc = nk.truncated_svd(c, tol.rank).u
    w = bo.orthonormalize(nk.pinv(d, tol.rank) @ qc, tol.rank)
    row_space = bo.orthonormalize(d.T, tol.rank)
    # N(D)^perp minus W: complement of W inside the row space of D
    inside = row_space.basis - w.basis @ (w.basis.T @ row_space.basis)
    outside = bo.orthonormalize(inside, tol.rank).basis
    fam_a = _ordered_family(d, outside, tol)
    _, s, vt = np.linalg.svd(c)
    r = int(np.count_nonzero(s > tol.rank.threshold(s[0], c.shape)))
    fam_f = vt[r:, :].T
    size = min(fam_a.shape[1], fam_f.shape[1])
    if n_max > size:
        raise InputError(f"n_max={n_max} exceeds the family size {size}")
    fam_a, fam_f = fam_a[:, :size], fam_f[:, :size]
    subs = _canonical(2 * k, k)

    def c_n(n):
        return c + d @ fam_a[:, n - 1:] @ fam_f[:, n - 1:].T

    def d_n(n):
        tail = fam_a[:, n - 1:]
        return d - d @ tail @ tail.T

    def term(n):
        return _from_blocks(subs, a, b, c_n(n), d_n(n))

    limit = _from_blocks(subs, a, b, c, d)
    return _make("ptwise2_killer", {"k": k, "rank_c": rank_c, "decay": decay}, n_max, seed, subs,
                 limit, term, family=fam_a, family_f=fam_f,
                 family_images=np.linalg.norm(d @ fam_a, axis=0))


def gen_sequence(kind: str, n_max: int | None = 10, seed: int = 0, **params) -> OpSequence:
    if n_max is None and kind != "explicit_list":
        raise InputError("n_max is required for generated sequences")
    if n_max is not None and (isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 1):
        raise InputError("n_max must be a positive integer")
    builders = {
        "paper_example_n_inverse": _paper_example,
        "positive_l2_truncation": _positive_l2,
        "ptwise_killer": _ptwise,
        "ptwise2_killer": _ptwise2,
        "explicit_list": _explicit,
        "random_complementable": _random_complementable,
    }
    if kind not in builders:
        raise InputError(f"unknown sequence kind {kind!r}; expected one of {', '.join(KINDS)}")
    try:
        return builders[kind](n_max, seed, **params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {kind}: {exc}") from exc


# --------------------------------------------------------------------------- detectors

@dataclass(frozen=True)
class ConvergenceVerdict:
    uniform_gaps: np.ndarray
    strong_gaps: np.ndarray  # (n_max, n_samples)
    uniform: bool
    strong_on_samples: bool
    uniform_test: TailTest
    criterion_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def summary(self) -> dict:
        return {
            "uniform": self.uniform,
            "strong_on_samples": self.strong_on_samples,
            "uniform_tail_slope": self.uniform_test.slope,
            "uniform_gaps": self.uniform_gaps,
            "max_strong_gap_per_n": self.strong_gaps.max(axis=1) if self.strong_gaps.size else [],
            "n_samples": int(self.strong_gaps.shape[1]),
        }


def sample_vectors(dim: int, samples: int, seed: int) -> Mat:
    """Canonical basis followed by ``samples`` seeded random unit vectors (as columns)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((dim, samples))
    if samples:
        x /= np.linalg.norm(x, axis=0)
    return np.hstack([np.eye(dim), x])


def detect_convergence(seq: OpSequence, limit: Mat | None = None, samples: int = 32, seed: int = 0,
                       tol: Tolerances | None = None) -> ConvergenceVerdict:
    tol = resolve(tol)
    limit = seq.limit if limit is None else nk.as_mat(limit, "limit")
    if limit.shape != seq.limit.shape:
        raise InputError(f"limit shape {limit.shape} differs from term shape {seq.limit.shape}")
    xs = sample_vectors(limit.shape[1], samples, seed)
    ugaps = np.empty(seq.n_max)
    sgaps = np.empty((seq.n_max, xs.shape[1]))
    for n, t in seq.terms():
        diff = t - limit
        ugaps[n - 1] = nk.op_norm(diff)
        sgaps[n - 1] = np.linalg.norm(diff @ xs, axis=0)
    ut = tends_to_zero(ugaps, tol.conv)
    strong = True
    for j in range(sgaps.shape[1]):
        col = sgaps[:, j]
        if tends_to_zero(col, tol.conv).vanishes:
            continue
        # dominated by a vanishing envelope
        if ut.vanishes and np.all(col <= ugaps * (1 + 1e-12) + 1e-15):
            continue
        strong = False
        break
    return ConvergenceVerdict(ugaps, sgaps, ut.vanishes, strong, ut)


@dataclass(frozen=True)
class BlockConvergenceReport:
    total_gaps: np.ndarray
    block_gaps: np.ndarray  # (n_max, 4)
    lower_ok: bool          # every block gap <= total gap
    upper_ok: bool          # total gap <= 4 * max block gap
    sum_ok: bool            # total gap <= sum of block gaps
    total_vanishes: bool
    blocks_vanish: bool

    @property
    def equivalence_holds(self) -> bool:
        return self.total_vanishes == self.blocks_vanish

    def summary(self) -> dict:
        return {
            "lower_ok": self.lower_ok, "upper_ok": self.upper_ok, "sum_ok": self.sum_ok,
            "total_vanishes": self.total_vanishes, "blocks_vanish": self.blocks_vanish,
            "equivalence_holds": self.equivalence_holds,
            "total_gaps": self.total_gaps, "block_gaps": self.block_gaps,
        }


def block_convergence(seq: OpSequence, tol: Tolerances | None = None) -> BlockConvergenceReport:
    """Total gap ``||T_n - T||`` against the four block gaps, term by term."""
    tol = resolve(tol)
    lim = seq.limit_blk()
    total = np.empty(seq.n_max)
    blocks = np.empty((seq.n_max, 4))
    for n, t in seq.terms():
        total[n - 1] = nk.op_norm(t - seq.limit)
        blocks[n - 1] = bo.block_gaps(seq.block(t), lim)
    bmax = blocks.max(axis=1)
    return BlockConvergenceReport(
        total, blocks,
        bool(np.all(bmax <= total + 1e-10)),
        bool(np.all(total <= 4 * bmax + 1e-10)),
        bool(np.all(total <= blocks.sum(axis=1) + 1e-10)),
        tends_to_zero(total, tol.conv).vanishes,
        all(tends_to_zero(blocks[:, j], tol.conv).vanishes for j in range(4)),
    )


# --------------------------------------------------------------------------- limit theorems

@dataclass(frozen=True)
class ConvCriterionReport:
    lambda_min: np.ndarray
    d_gap: np.ndarray
    product: np.ndarray
    gamma_ratio: np.ndarray
    beta: np.ndarray
    criterion_holds: bool
    bounded_lambda: bool
    gamma_criterion: bool
    limit_complementable: bool
    limit_lambda_min: float | None
    consistent: bool
    sup_estimate: float = math.nan

    def summary(self) -> dict:
        return {
            "criterion_holds": self.criterion_holds,
            "bounded_lambda": self.bounded_lambda,
            "gamma_criterion": self.gamma_criterion,
            "limit_complementable": self.limit_complementable,
            "limit_lambda_min": self.limit_lambda_min,
            "consistent": self.consistent,
            "sup_lambda": float(self.beta[-1]),
            "sup_lambda_estimate": self.sup_estimate,
            "per_n": {
                "lambda_min": self.lambda_min, "d_gap": self.d_gap, "product": self.product,
                "gamma_ratio": self.gamma_ratio, "beta": self.beta,
            },
        }


BETA_PLATEAU = 1e-2


def theorem_conv_criterion(seq: OpSequence, limit_blk: BlockOp | None = None,
                           tol: Tolerances | None = None) -> ConvCriterionReport:
    """Evaluate ``lam_n ||D - D_n|| -> 0`` and its corollaries along a sequence.

    Each conclusion is cross-checked by running ``check`` on the limit:
    a vanishing product (or gamma ratio) must come with a complementable
    limit, and a bounded lambda sequence with ``lambda_min(limit) <= sup lam_n``.
    """
    tol = resolve(tol)
    lim = seq.limit_blk() if limit_blk is None else limit_blk
    lams, gaps, ratios = [], [], []
    for n, t in seq.terms():
        blk = seq.block(t)
        rep = check(blk, tol)
        if not rep.complementable:
            raise SequenceError("sequence term is not complementable", n)
        lams.append(rep.lambda_min)
        g = nk.op_norm(lim.d - blk.d)
        gaps.append(g)
        gd = nk.gamma(blk.d, tol.rank)
        ratios.append(g / gd if math.isfinite(gd) else (0.0 if g == 0 else math.inf))
    lams, gaps, ratios = map(np.asarray, (lams, gaps, ratios))
    prod = lams * gaps
    beta = np.maximum.accumulate(lams)
    start = (3 * seq.n_max) // 4
    ref = beta[min(start, seq.n_max - 1)]
    bounded = bool(beta[-1] <= ref * (1 + BETA_PLATEAU) + 1e-12)
    crit = tends_to_zero(prod, tol.conv).vanishes
    gam = bool(np.all(np.isfinite(ratios))) and tends_to_zero(ratios, tol.conv).vanishes
    lrep = check(lim, tol)
    consistent = True
    if (crit or gam) and not lrep.complementable:
        consistent = False
    # sup over all n is only seen up to n_max; allow four times the drift of
    # beta over the last quarter, which covers O(1/n) and faster approach
    sup_est = float(beta[-1] + 4.0 * (beta[-1] - ref))
    if bounded and not lrep.accepts(sup_est, 1e-6):
        consistent = False
    return ConvCriterionReport(lams, gaps, prod, ratios, beta, crit, bounded, gam,
                               lrep.complementable, lrep.lambda_min, consistent, sup_est)


@dataclass(frozen=True)
class ClosureReport:
    lam: float
    trials: int
    accepted: int
    counterexamples: list
    max_limit_lambda: float
    variants: dict

    def summary(self) -> dict:
        return {
            "lambda": self.lam, "trials": self.trials, "accepted": self.accepted,
            "counterexamples": self.counterexamples,
            "max_limit_lambda_min": self.max_limit_lambda, "variants": self.variants,
        }


CLOSURE_VARIANTS = ("perturbed", "increasing", "rank_deficient", "constant")


def closure_probe(lam: float, trials: int = 100, seed: int = 0, dim: int = 8, split: int = 4,
                  n_max: int = 40, tol: Tolerances | None = None) -> ClosureReport:
    """Run norm-convergent sequences inside psi(M, N, lam) and check their limits at ``lam``."""
    tol = resolve(tol)
    if lam <= 0:
        raise InputError("lambda must be positive")
    accepted, worst = 0, 0.0
    bad = []
    counts = dict.fromkeys(CLOSURE_VARIANTS, 0)
    for i in range(trials):
        variant = CLOSURE_VARIANTS[i % len(CLOSURE_VARIANTS)]
        counts[variant] += 1
        seq = gen_sequence("random_complementable", n_max=n_max, seed=seed + i,
                           dim=dim, split=split, lam=lam, variant=variant)
        for n, t in seq.terms():
            rep = check(seq.block(t), tol)
            if not rep.accepts(lam):
                raise SequenceError(f"generator left psi(M, N, {lam})", n)
        lrep = check(seq.limit_blk(), tol)
        if lrep.accepts(lam, 1e-6):
            accepted += 1
            worst = max(worst, lrep.lambda_min)
        else:
            bad.append({"trial": i, "variant": variant, "lambda_min": lrep.lambda_min})
    return ClosureReport(lam, trials, accepted, bad, worst, counts)


@dataclass(frozen=True)
class LambdaGrowthReport:
    dims: list
    lambda_min: list
    complementable: list
    strictly_increasing: bool

    def summary(self) -> dict:
        return {"dims": self.dims, "lambda_min": self.lambda_min,
                "complementable": self.complementable,
                "strictly_increasing": self.strictly_increasing}


def lambda_growth_probe(dims=(4, 8, 16, 32), tol: Tolerances | None = None) -> LambdaGrowthReport:
    """lambda_min of the truncated positive operator for each truncation size."""
    lams, comp = [], []
    for k in dims:
        rep = check(bo.split(positive_l2_operator(k), k), tol)
        comp.append(rep.complementable)
        lams.append(rep.lambda_min if rep.complementable else math.inf)
    inc = all(b > a for a, b in zip(lams, lams[1:]))
    return LambdaGrowthReport(list(dims), lams, comp, inc)


# --------------------------------------------------------------------------- boundary constructions

@dataclass(frozen=True)
class BoundaryReport:
    residuals: np.ndarray     # normalized residual of R(C_n) <= R(D_n)
    gaps: np.ndarray          # principal-angle residual of the same inclusion
    limit_complementable: bool
    delta: float
    strong: ConvergenceVerdict
    c_strong_gaps: np.ndarray  # max over samples of ||(C_n - C) x||

    def summary(self) -> dict:
        return {
            "limit_complementable": self.limit_complementable,
            "delta": self.delta,
            "residuals": self.residuals, "gaps": self.gaps,
            "max_strong_gap_per_n": self.strong.strong_gaps.max(axis=1),
            "uniform_gaps": self.strong.uniform_gaps,
            "c_strong_gaps": self.c_strong_gaps,
            "strong_on_samples": self.strong.strong_on_samples,
            "uniform": self.strong.uniform,
        }


def boundary_report(seq: OpSequence, samples: int = 32, seed: int = 0,
                    tol: Tolerances | None = None) -> BoundaryReport:
    tol = resolve(tol)
    res, gaps, cg = [], [], []
    lim = seq.limit_blk()
    xs = sample_vectors(lim.c.shape[1], samples, seed)
    for n, t in seq.terms():
        blk = seq.block(t)
        res.append(range_included(blk.c, blk.d, tol).residual)
        gaps.append(range_gap(blk.c, blk.d, tol))
        cg.append(float(np.max(np.linalg.norm((blk.c - lim.c) @ xs, axis=0))))
    res, gaps = np.asarray(res), np.asarray(gaps)
    verdict = detect_convergence(seq, samples=samples, seed=seed, tol=tol)
    return BoundaryReport(res, gaps, check(lim, tol).complementable, float(gaps.min()),
                          verdict, np.asarray(cg))


# --------------------------------------------------------------------------- phi-class generators

def random_phi_member(dim: int = 8, split: int = 4, lam: float = 5.0, kind: str = "phi", seed: int = 0,
                      norm: float | None = None, subspaces=None) -> BlockOp:
    """Random operator in phi_L, phi_R or phi (M, N, lam).

    phi_L members are ``T = X (U_{M^perp}^T + W U_M^T)`` so that
    ``T U_M = T U_{M^perp} W``; phi_R is the transposed pattern on N.
    ``||W||, ||V||`` are drawn uniformly in (0, lam].
    """
    if kind not in ("phi", "phi_l", "phi_r"):
        raise InputError(f"unknown phi kind {kind!r}")
    rng = np.random.default_rng(seed)
    if subspaces is None:
        m = _random_subspace(rng, dim, split)
        n = _random_subspace(rng, dim, split)
        subspaces = (m, n, bo.complement(m), bo.complement(n))
    m, n, mp, np_ = subspaces
    w = _with_norm(rng, (mp.dim, m.dim), lam * rng.uniform(1e-3, 1.0))
    v = _with_norm(rng, (np_.dim, n.dim), lam * rng.uniform(1e-3, 1.0))
    right = mp.basis.T + w @ m.basis.T          # (dim M^perp) x dim
    left = np_.basis + n.basis @ v.T            # dim x (dim N^perp)
    if kind == "phi":
        t = left @ rng.standard_normal((np_.dim, mp.dim)) @ right
    elif kind == "phi_l":
        t = rng.standard_normal((dim, mp.dim)) @ right
    else:
        t = left @ rng.standard_normal((np_.dim, dim))
    if norm is not None:
        t *= norm / nk.op_norm(t)
    return bo.decompose(t, m, n, m_perp=mp, n_perp=np_)


def random_phi_pair(dim: int = 8, split: int = 4, lam: float = 5.0, seed: int = 0) -> tuple[BlockOp, BlockOp]:
    """``(T1, T2)`` with T1 in phi_R and T2 in phi_L, on one shared pair of subspaces."""
    rng = np.random.default_rng(seed)
    m = _random_subspace(rng, dim, split)
    n = _random_subspace(rng, dim, split)
    subs = (m, n, bo.complement(m), bo.complement(n))
    s1, s2 = rng.integers(0, 2**63 - 1, size=2)
    t1 = random_phi_member(dim, split, lam, "phi_r", int(s1), subspaces=subs)
    t2 = random_phi_member(dim, split, lam, "phi_l", int(s2), subspaces=subs)
    return t1, t2
