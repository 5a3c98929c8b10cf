"""Powers and power series ``sum_{n>=1} alpha_n T^n`` of a square operator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import blockops as bo
from . import numkernel as nk
from .blockops import BlockOp
from .comptest import check, phi_membership
from .config import Tolerances, resolve
from .errors import InputError, MembershipError, SeriesDivergenceError

Mat = np.ndarray

MARGIN = 1e-9
SERIES_SLACK = 1e-7


@dataclass(frozen=True)
class CoeffRule:
    """``geometric``: alpha_n = r^n; ``constant``: alpha_n = c; ``explicit``: listed alpha_1..alpha_k."""

    kind: str
    r: float = 0.0
    c: float = 0.0
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("geometric", "constant", "explicit"):
            raise InputError(f"unknown coefficient rule {self.kind!r}")
        vals = (self.r, self.c, *self.values)
        if not all(math.isfinite(float(v)) for v in vals):
            raise InputError("coefficients must be finite")

    @classmethod
    def geometric(cls, r: float) -> "CoeffRule":
        return cls("geometric", r=float(r))

    @classmethod
    def constant(cls, c: float) -> "CoeffRule":
        return cls("constant", c=float(c))

    @classmethod
    def explicit(cls, values) -> "CoeffRule":
        return cls("explicit", values=tuple(float(v) for v in values))

    @classmethod
    def from_dict(cls, d: dict) -> "CoeffRule":
        kind = d.get("kind")
        if kind == "geometric":
            return cls.geometric(d["r"])
        if kind == "constant":
            return cls.constant(d["c"])
        if kind == "explicit":
            return cls.explicit(d["values"])
        raise InputError(f"unknown coefficient rule {kind!r}")

    def alpha(self, n: int) -> float:
        if self.kind == "geometric":
            return self.r**n
        if self.kind == "constant":
            return self.c
        return self.values[n - 1] if n <= len(self.values) else 0.0

    def as_dict(self) -> dict:
        if self.kind == "geometric":
            return {"kind": "geometric", "r": self.r}
        if self.kind == "constant":
            return {"kind": "constant", "c": self.c}
        return {"kind": "explicit", "values": list(self.values)}


@dataclass(frozen=True)
class SeriesSpec:
    t: Mat
    rule: CoeffRule
    n_max: int = 200

    def __post_init__(self):
        t = nk.as_mat(self.t, "t")
        if t.shape[0] != t.shape[1]:
            raise InputError(f"series operator must be square, got {t.shape}")
        if self.n_max < 1:
            raise InputError("n_max must be positive")
        object.__setattr__(self, "t", t)


class RootTest(NamedTuple):
    converges: bool
    beta_witness: float | None
    sup_value: float
    status: str  # converges | diverges | converges-at-horizon | undetermined-at-horizon


def root_test(spec: SeriesSpec, margin: float = MARGIN) -> RootTest:
    """Decide whether some ``beta < 1`` bounds ``|alpha_n|^{1/n} ||T||`` for all n."""
    norm = nk.op_norm(spec.t)
    rule = spec.rule
    if norm == 0.0:
        return RootTest(True, 0.0, 0.0, "converges")
    if rule.kind == "geometric":
        sup = abs(rule.r) * norm
    elif rule.kind == "constant":
        # |c|^{1/n} increases to 1 when |c| < 1 and decreases to 1 when |c| > 1
        sup = 0.0 if rule.c == 0 else max(abs(rule.c), 1.0) * norm
    else:
        horizon = min(spec.n_max, len(rule.values))
        roots = [abs(rule.alpha(n)) ** (1.0 / n) for n in range(1, horizon + 1)]
        sup = max(roots, default=0.0) * norm
        if sup < 1.0 - margin:
            return RootTest(True, sup, sup, "converges-at-horizon")
        return RootTest(False, None, sup, "undetermined-at-horizon")
    if sup < 1.0 - margin:
        return RootTest(True, sup, sup, "converges")
    return RootTest(False, None, sup, "diverges")


def partial_sum(spec: SeriesSpec, n: int) -> Mat:
    """``sum_{i=1}^n alpha_i T^i``, accumulating powers by repeated multiplication."""
    if n < 1:
        raise InputError("n must be positive")
    return partial_sums(spec, n)[-1]


def partial_sums(spec: SeriesSpec, n: int) -> list[Mat]:
    t = spec.t
    power = np.eye(t.shape[0])
    acc = np.zeros_like(t)
    out = []
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n + 1):
            power = power @ t
            acc = acc + spec.rule.alpha(i) * power
            if not np.all(np.isfinite(acc)):
                raise SeriesDivergenceError(f"partial sum overflowed at n={i}")
            out.append(acc)
    return out


def series_limit(spec: SeriesSpec) -> Mat | None:
    """Closed form of the full series when the root test certifies convergence."""
    rt = root_test(spec)
    if not rt.converges:
        return None
    t = spec.t
    eye = np.eye(t.shape[0])
    rule = spec.rule
    if rule.kind == "geometric":
        rt_ = rule.r * t
        return np.linalg.solve(eye - rt_, rt_)
    if rule.kind == "constant":
        return rule.c * np.linalg.solve(eye - t, t)
    return partial_sum(spec, max(len(rule.values), 1))


@dataclass(frozen=True)
class PowerMembershipReport:
    lam: float
    powers_in_phi: list
    partial_sums_accepted: list
    partial_sum_lambda: list
    root: RootTest
    limit_accepted: bool | None
    limit_lambda_min: float | None
    series_skipped: bool

    @property
    def all_hold(self) -> bool:
        ok = all(self.powers_in_phi) and all(self.partial_sums_accepted)
        return ok and self.limit_accepted is not False

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "all_hold": self.all_hold,
            "powers_in_phi": self.powers_in_phi,
            "partial_sums_accepted": self.partial_sums_accepted,
            "partial_sum_lambda_min": self.partial_sum_lambda,
            "root_test": self.root._asdict(),
            "limit_accepted": self.limit_accepted,
            "limit_lambda_min": self.limit_lambda_min,
            "series_skipped": self.series_skipped,
            "note": "the limit lies in C_D(M,N) automatically in finite dimensions",
        }


def power_membership_run(blk: BlockOp, lam: float, rule: CoeffRule, n_max: int = 50,
                         tol: Tolerances | None = None) -> PowerMembershipReport:
    """Check ``alpha_n T^n`` in phi(M, N, lam) and ``S_n`` in psi(M, N, lam) for n <= n_max."""
    tol = resolve(tol)
    if not phi_membership(blk, lam, tol).in_phi:
        raise MembershipError(f"T is not in phi(M, N, {lam})")
    t = bo.assemble(blk)
    spec = SeriesSpec(t, rule, n_max)

    def block(x):
        return bo.decompose(x, blk.m_sub, blk.n_sub, m_perp=blk.m_perp, n_perp=blk.n_perp)

    powers, sums, sum_lams = [], [], []
    power = np.eye(t.shape[0])
    for n, s_n in enumerate(partial_sums(spec, n_max), start=1):
        power = power @ t
        term = rule.alpha(n) * power
        powers.append(bool(phi_membership(block(term), lam, tol, slack=SERIES_SLACK).in_phi))
        rep = check(block(s_n), tol)
        sums.append(rep.accepts(lam, SERIES_SLACK))
        sum_lams.append(rep.lambda_min)
    rt = root_test(spec)
    limit_ok = limit_lam = None
    if rt.converges:
        lim = series_limit(spec)
        lrep = check(block(lim), tol)
        limit_ok = lrep.accepts(lam, SERIES_SLACK)
        limit_lam = lrep.lambda_min
    return PowerMembershipReport(lam, powers, sums, sum_lams, rt, limit_ok, limit_lam, not rt.converges)


def series_diagnostics(spec: SeriesSpec, cauchy_tol: float = 1e-8) -> dict:
    """Root test, partial-sum table, Cauchy check, closed-form gap and the ``1/(1-beta)`` bound."""
    rt = root_test(spec)
    out = {"converges": rt.converges, "status": rt.status, "beta_witness": rt.beta_witness,
           "sup_value": rt.sup_value, "overflow_at": None}
    try:
        sums = partial_sums(spec, spec.n_max)
    except SeriesDivergenceError as exc:
        out["overflow_at"] = str(exc)
        out.update(cauchy=False, closed_form_gap=None, bound_holds=None, partial_sum_norms=[])
        return out
    last = sums[-1]
    start = (3 * spec.n_max) // 4
    tail_gap = max((nk.op_norm(s - last) for s in sums[start:]), default=0.0)
    out["partial_sum_norms"] = [nk.op_norm(s) for s in sums]
    out["tail_gap"] = tail_gap
    out["cauchy"] = bool(tail_gap <= cauchy_tol)
    lim = series_limit(spec) if rt.converges else None
    out["closed_form_gap"] = None if lim is None else nk.op_norm(last - lim)
    if rt.converges:
        bound = 1.0 / (1.0 - rt.beta_witness)
        out["bound"] = bound
        out["bound_holds"] = bool(nk.op_norm(lim) <= bound + 1e-6)
    else:
        out["bound_holds"] = None
    return out
