import numpy as np
import pytest

from conftest import random_orthogonal
from schurkit import blockops as bo
from schurkit.errors import InputError


def random_subspace(rng, n, k):
    return bo.Subspace(n, random_orthogonal(rng, n)[:, :k])


def test_orthonormalize_cases(rng):
    s = bo.orthonormalize(np.array([[2.0], [0.0]]))
    np.testing.assert_allclose(np.abs(s.basis), [[1.0], [0.0]])
    assert bo.orthonormalize(np.array([[1.0, 1.0], [2.0, 2.0]])).dim == 1
    raw = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 4))
    s = bo.orthonormalize(raw)
    assert s.dim == 3
    assert np.linalg.norm(s.basis.T @ s.basis - np.eye(3)) <= 1e-10
    p = s.projector
    assert np.linalg.norm(p @ p - p) <= 1e-10 and np.linalg.norm(p - p.T) <= 1e-10


def test_subspace_validation():
    with pytest.raises(InputError):
        bo.Subspace(2, np.array([[1.0], [1.0]]))
    with pytest.raises(InputError):
        bo.Subspace(3, np.eye(2))


def test_complement_cases(rng):
    c = bo.complement(bo.coordinate_subspace(2, [0]))
    np.testing.assert_allclose(np.abs(c.basis), [[0.0], [1.0]])
    assert bo.complement(bo.leading(3, 3)).dim == 0
    s = random_subspace(rng, 8, 5)
    c = bo.complement(s)
    assert c.dim == 3
    assert np.linalg.norm(s.basis.T @ c.basis) <= 1e-10


def test_decompose_canonical():
    t = np.array([[1.0, 2.0], [3.0, 4.0]])
    blk = bo.split(t, 1)
    assert (blk.a.item(), blk.b.item(), blk.c.item(), blk.d.item()) == (1, 2, 3, 4)
    np.testing.assert_array_equal(bo.assemble(blk), t)


def test_decompose_identity(rng):
    m = random_subspace(rng, 5, 2)
    blk = bo.decompose(np.eye(5), m, m)
    np.testing.assert_allclose(blk.a, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(blk.b, 0, atol=1e-12)
    np.testing.assert_allclose(blk.c, 0, atol=1e-12)
    np.testing.assert_allclose(blk.d, np.eye(3), atol=1e-12)


def test_assemble_from_blocks():
    np.testing.assert_array_equal(bo.assemble(bo.from_blocks(1, 2, 3, 4)), [[1, 2], [3, 4]])
    np.testing.assert_array_equal(bo.assemble(bo.from_blocks(np.eye(2), np.zeros((2, 1)),
                                                             np.zeros((1, 2)), np.eye(1))), np.eye(3))


def test_round_trip_random(rng):
    for _ in range(50):
        h, k = rng.integers(1, 7, size=2)
        t = rng.standard_normal((k, h))
        m = random_subspace(rng, h, rng.integers(0, h + 1))
        n = random_subspace(rng, k, rng.integers(0, k + 1))
        blk = bo.decompose(t, m, n)
        assert bo.round_trip_error(t, blk) <= 1e-10


def test_dimension_mismatch():
    with pytest.raises(InputError):
        bo.decompose(np.eye(3), bo.leading(2, 1), bo.leading(3, 1))


def test_zero_dimensional_blocks():
    blk = bo.split(np.eye(3), 0)
    assert blk.a.shape == (0, 0) and blk.b.shape == (0, 3) and blk.c.shape == (3, 0)
    sw = bo.norm_sandwich(blk)
    assert sw.holds and sw.lower == pytest.approx(1.0)


def test_norm_sandwich_cases(rng):
    sw = bo.norm_sandwich(bo.split(np.eye(2), 1))
    assert (sw.lower, sw.norm, sw.upper, sw.holds) == (1.0, 1.0, 2.0, True)
    sw = bo.norm_sandwich(bo.split(np.zeros((2, 2)), 1))
    assert (sw.lower, sw.norm, sw.upper) == (0.0, 0.0, 0.0) and sw.holds
    for _ in range(1000):
        t = rng.standard_normal((6, 6))
        blk = bo.decompose(t, random_subspace(rng, 6, 3), random_subspace(rng, 6, 2))
        assert bo.norm_sandwich(blk).holds


def test_swap_is_same_operator(rng):
    t = rng.standard_normal((5, 5))
    blk = bo.decompose(t, random_subspace(rng, 5, 2), random_subspace(rng, 5, 3))
    np.testing.assert_allclose(bo.assemble(bo.swap(blk)), t, atol=1e-12)


def test_rotated_basis_changes_coordinates_only(rng):
    t = rng.standard_normal((4, 4))
    blk = bo.split(t, 2)
    q = [random_orthogonal(rng, 2) for _ in range(4)]
    rot = blk.rotated(*q)
    np.testing.assert_allclose(bo.assemble(rot), t, atol=1e-12)
    for name in "abcd":
        assert np.linalg.norm(getattr(rot, name), 2) == pytest.approx(np.linalg.norm(getattr(blk, name), 2))


def test_block_gaps_sandwich_total_gap(rng):
    for _ in range(100):
        t = rng.standard_normal((6, 6))
        e = rng.standard_normal((6, 6)) * 1e-2
        m, n = random_subspace(rng, 6, 3), random_subspace(rng, 6, 4)
        blk, blk2 = bo.decompose(t, m, n), bo.decompose(t + e, m, n)
        gaps = bo.block_gaps(blk2, blk)
        total = np.linalg.norm(e, 2)
        assert gaps.max() <= total + 1e-10
        assert total <= gaps.sum() + 1e-10
