import numpy as np
import pytest

from schurkit import blockops as bo
from schurkit import comptest as ct
from schurkit import convlab as cl
from schurkit import numkernel as nk
from schurkit import powseries as ps
from schurkit.errors import InputError, MembershipError, SeriesDivergenceError


def spec(t, rule, n_max=200):
    return ps.SeriesSpec(np.asarray(t, dtype=float), rule, n_max)


def test_root_test_cases():
    rt = ps.root_test(spec(2 * np.eye(2), ps.CoeffRule.geometric(1 / 3)))
    assert rt.converges and rt.beta_witness == pytest.approx(2 / 3)
    rt = ps.root_test(spec(np.eye(2), ps.CoeffRule.constant(1.0)))
    assert not rt.converges and rt.status == "diverges"
    for rule in (ps.CoeffRule.geometric(1e6), ps.CoeffRule.constant(-7), ps.CoeffRule.explicit([1e9])):
        assert ps.root_test(spec(np.zeros((3, 3)), rule)).converges


def test_root_test_constant_rule():
    # |c|^(1/n) -> 1, so a constant rule needs ||T|| < 1 and, for |c| > 1, |c| ||T|| < 1
    assert ps.root_test(spec(0.5 * np.eye(2), ps.CoeffRule.constant(0.1))).converges
    assert ps.root_test(spec(0.5 * np.eye(2), ps.CoeffRule.constant(1.9))).converges
    assert not ps.root_test(spec(0.5 * np.eye(2), ps.CoeffRule.constant(2.1))).converges


def test_root_test_explicit_is_finite_horizon():
    rt = ps.root_test(spec(np.eye(2), ps.CoeffRule.explicit([0.5**n for n in range(1, 30)])))
    assert rt.converges and rt.status == "converges-at-horizon"
    rt = ps.root_test(spec(np.eye(2), ps.CoeffRule.explicit([1.0, 1.0])))
    assert not rt.converges and rt.status == "undetermined-at-horizon"


def test_root_test_geometric_boundary(rng):
    t = rng.standard_normal((4, 4))
    t /= nk.op_norm(t)
    for r in np.linspace(0.9, 1.1, 21):
        rt = ps.root_test(spec(t, ps.CoeffRule.geometric(r)))
        assert rt.converges == (abs(r) * 1.0 < 1 - ps.MARGIN)


def test_partial_sum_cases():
    t = 0.5 * np.eye(2)
    for n in (1, 5, 30):
        s = ps.partial_sum(spec(t, ps.CoeffRule.constant(1.0)), n)
        np.testing.assert_allclose(s, (1 - 0.5**n) * np.eye(2))
    t = np.array([[0.0, 2.0], [0.0, 3.0]])
    np.testing.assert_array_equal(ps.partial_sum(spec(t, ps.CoeffRule.constant(-4.0)), 1), -4 * t)
    with pytest.raises(InputError):
        ps.partial_sum(spec(t, ps.CoeffRule.constant(1.0)), 0)


def test_partial_sum_neumann(rng):
    t = rng.standard_normal((5, 5))
    t /= nk.op_norm(t)
    r = 0.7
    s = ps.partial_sum(spec(t, ps.CoeffRule.geometric(r)), 200)
    closed = np.linalg.solve(np.eye(5) - r * t, r * t)
    assert nk.op_norm(s - closed) <= 1e-8


def test_partial_sum_non_normal_exact():
    # nilpotent, non-normal: T^2 = 0 so every partial sum is alpha_1 T
    t = np.array([[0.0, 1e8], [0.0, 0.0]])
    s = ps.partial_sum(spec(t, ps.CoeffRule.constant(1.0)), 50)
    np.testing.assert_array_equal(s, t)


def test_partial_sum_overflow():
    with pytest.raises(SeriesDivergenceError):
        ps.partial_sum(spec(1e100 * np.eye(2), ps.CoeffRule.constant(1.0)), 10)


def test_invalid_specs():
    with pytest.raises(InputError):
        ps.SeriesSpec(np.ones((2, 3)), ps.CoeffRule.constant(1.0))
    with pytest.raises(InputError):
        ps.CoeffRule.geometric(float("nan"))
    with pytest.raises(InputError):
        ps.CoeffRule.from_dict({"kind": "harmonic"})


def test_diagnostics_bound_and_cauchy(rng):
    t = rng.standard_normal((4, 4))
    t /= nk.op_norm(t)
    for r in (0.3, 0.8, 0.95):
        d = ps.series_diagnostics(spec(t, ps.CoeffRule.geometric(r), 400))
        assert d["converges"] and d["bound_holds"] and d["cauchy"]
    d = ps.series_diagnostics(spec(np.eye(2), ps.CoeffRule.geometric(1.2), 50))
    assert not d["converges"] and not d["cauchy"]


def test_membership_zero_operator():
    blk = bo.split(np.zeros((4, 4)), 2)
    rep = ps.power_membership_run(blk, 1.0, ps.CoeffRule.constant(1.0), 10)
    assert rep.all_hold and rep.limit_accepted


def scaled_scalar_block():
    blk = bo.from_blocks(1, 1, 2, 2)
    t = bo.assemble(blk)
    return bo.split(0.9 * t / nk.op_norm(t), 1)


def test_membership_scalar_example():
    blk = scaled_scalar_block()
    lam = max(ct.phi_levels(blk))
    rep = ps.power_membership_run(blk, lam, ps.CoeffRule.constant(1.0), 50)
    assert all(rep.powers_in_phi) and all(rep.partial_sums_accepted)
    assert rep.limit_accepted and not rep.series_skipped


def test_membership_divergent_series_skipped():
    blk = bo.from_blocks(1, 1, 2, 2)
    lam = max(ct.phi_levels(blk))
    rep = ps.power_membership_run(blk, lam, ps.CoeffRule.geometric(2.0), 20)
    assert rep.series_skipped and rep.limit_accepted is None
    assert all(rep.powers_in_phi)


def test_membership_precondition():
    with pytest.raises(MembershipError):
        ps.power_membership_run(bo.from_blocks(1, 0, 1, 1), 1.0, ps.CoeffRule.constant(1.0), 5)


def test_powers_follow_from_product_closure():
    blk = cl.random_phi_member(lam=4.0, seed=3, norm=0.9)
    t = bo.assemble(blk)
    power = t.copy()
    for _ in range(2, 6):
        prev = bo.decompose(power, blk.m_sub, blk.n_sub, m_perp=blk.m_perp, n_perp=blk.n_perp)
        r = ct.product_closure_check(blk, prev, 4.0)
        power = t @ power
        cur = bo.decompose(power, blk.m_sub, blk.n_sub, m_perp=blk.m_perp, n_perp=blk.n_perp)
        assert r.in_phi == ct.phi_membership(cur, 4.0, slack=1e-7).in_phi
