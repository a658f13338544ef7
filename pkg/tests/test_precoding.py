import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from satprecoding.channel import GroupSchedule, hexagonal_cluster
from satprecoding.precoding import (
    beam_adjacency,
    four_color_baseline,
    four_coloring,
    mmse_cost,
    mmse_precoder,
    mmse_regularizer,
    normalize_total_power,
    per_antenna_power,
    rescale_to_pac,
    sinr,
    stationarity_residual,
    total_power,
)


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


finite = st.floats(-10, 10, allow_nan=False)


def complex_matrices(rows, cols):
    return st.tuples(arrays(float, (rows, cols), elements=finite), arrays(float, (rows, cols), elements=finite)).map(
        lambda p: p[0] + 1j * p[1]
    )


def test_per_antenna_power_identity():
    assert np.array_equal(per_antenna_power(np.eye(3)), [1, 1, 1])
    assert np.array_equal(per_antenna_power(2 * np.eye(3)), [4, 4, 4])


def test_per_antenna_power_elementwise_oracle():
    W = cn(np.random.default_rng(0), 3, 3)
    expected = [sum(abs(W[r, c]) ** 2 for c in range(3)) for r in range(3)]
    assert np.allclose(per_antenna_power(W), expected, rtol=1e-14)


def test_total_power_examples():
    assert total_power(np.eye(3)) == 3
    assert total_power(np.zeros((3, 3))) == 0


@settings(max_examples=60, deadline=None)
@given(complex_matrices(4, 3))
def test_total_power_is_sum_of_per_antenna(W):
    assert total_power(W) == pytest.approx(per_antenna_power(W).sum(), rel=1e-12, abs=1e-12)


def test_sinr_examples():
    sched = GroupSchedule.from_assignment([0, 1, 2])
    assert np.allclose(sinr(np.eye(3), np.eye(3), sched), 1.0)
    assert np.array_equal(sinr(np.eye(3), np.zeros((3, 3)), sched), np.zeros(3))
    s2 = GroupSchedule.from_assignment([0, 1])
    assert np.allclose(sinr(np.eye(2), np.sqrt(2) * np.eye(2), s2), [2.0, 2.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100))
def test_sinr_scale_law(seed, alpha):
    rng = np.random.default_rng(seed)
    H, W = cn(rng, 4, 2), cn(rng, 2, 2)
    sched = GroupSchedule.from_assignment([0, 1, 0, 1])
    base = sinr(H, W, sched, noise=0.0)
    assert np.allclose(sinr(H, alpha * W, sched, noise=0.0), base, rtol=1e-9)
    lo, hi = sorted([1.0, alpha])
    assert np.all(sinr(H, hi * W, sched) >= sinr(H, lo * W, sched) * (1 - 1e-12))


def test_mmse_cost_examples():
    rng = np.random.default_rng(3)
    slices = cn(rng, 2, 3, 3)
    assert mmse_cost(np.zeros((3, 3)), slices, 0.0) == pytest.approx(2 * 3)
    H = cn(rng, 1, 3, 3)
    assert mmse_cost(np.linalg.inv(H[0]), H, 0.0) == pytest.approx(0.0, abs=1e-20)


def test_mmse_precoder_examples():
    assert np.allclose(mmse_precoder(np.eye(2)[None], 1.0), 0.5 * np.eye(2))
    assert np.allclose(mmse_precoder(np.stack([np.eye(2), np.eye(2)]), 0.0), np.eye(2))


def test_mmse_precoder_is_order_invariant_over_slices():
    slices = cn(np.random.default_rng(9), 3, 3, 3)
    assert np.allclose(mmse_precoder(slices, 0.3), mmse_precoder(slices[::-1], 0.3), atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4), st.integers(1, 3), st.floats(0.05, 2.0))
def test_mmse_stationarity_and_optimality(seed, n, rho, beta):
    rng = np.random.default_rng(seed)
    slices = cn(rng, rho, n, n)
    W = mmse_precoder(slices, beta)
    assert stationarity_residual(W, slices, beta) < 1e-9
    c0 = mmse_cost(W, slices, beta)
    for _ in range(50):
        assert mmse_cost(W + 1e-3 * cn(rng, n, n), slices, beta) > c0


def test_mmse_regularizer_uniform_budget():
    assert mmse_regularizer(1.0, [0.5, 0.5, 0.5]) == pytest.approx(2.0)


def test_rescale_examples():
    W = np.array([[2.0, 0.0], [0.0, 1.0]])
    out = rescale_to_pac(W, [1.0, 1.0])
    assert np.allclose(out, [[1.0, 0.0], [0.0, 1.0]])
    assert np.allclose(per_antenna_power(out), [1, 1])
    feasible = 0.5 * np.eye(2)
    assert np.array_equal(rescale_to_pac(feasible, [1.0, 1.0]), feasible)


@settings(max_examples=100, deadline=None)
@given(complex_matrices(3, 3), arrays(float, 3, elements=st.floats(1e-3, 50)))
def test_rescale_never_exceeds_budget(W, p):
    out = per_antenna_power(rescale_to_pac(W, p))
    assert np.all(out <= p)
    assert np.allclose(out, np.minimum(per_antenna_power(W), p), rtol=1e-12, atol=1e-300)


def test_normalize_total_power():
    W = cn(np.random.default_rng(1), 3, 3)
    assert total_power(normalize_total_power(W, [1, 2, 3])) == pytest.approx(6.0)


def test_four_color_isolated_beam():
    H = np.array([[2.0 + 0j]])
    base = four_color_baseline(H, GroupSchedule.from_assignment([0]), [3.0], [0])
    assert base.sinr == pytest.approx([3.0 * 4.0])
    assert base.bandwidth_fraction == 0.25


def test_four_color_interference_follows_colors():
    H = np.array([[1.0, 0.5], [0.5, 1.0]], dtype=complex)
    sched = GroupSchedule.from_assignment([0, 1])
    same = four_color_baseline(H, sched, [1.0, 1.0], [0, 0]).sinr
    apart = four_color_baseline(H, sched, [1.0, 1.0], [0, 1]).sinr
    assert np.allclose(same, 1.0 / (0.25 + 1.0))
    assert np.allclose(apart, 1.0)


def test_nine_beam_coloring_separates_neighbours():
    centers = hexagonal_cluster(9).beam_centers
    colors = four_coloring(centers)
    adj = beam_adjacency(centers)
    assert set(colors) <= {0, 1, 2, 3}
    assert adj.sum() > 0
    i, j = np.nonzero(adj)
    assert np.all(colors[i] != colors[j])
