import numpy as np
import pytest

from satprecoding.channel import GroupSchedule
from satprecoding.maxmin import FairnessProblem, feasibility_data, sdr_feasibility
from satprecoding.sdp import ClarabelBackend, CvxpyBackend, FeasibilityData, constraint_margin, project_feasible


def orthogonal(p=(1.0, 1.0)):
    return FairnessProblem(np.eye(2, dtype=complex), GroupSchedule.from_assignment([0, 1]), 1.0, np.array(p), 1.0)


def random_problem(seed, n=3, rho=2):
    rng = np.random.default_rng(seed)
    H = (rng.standard_normal((n * rho, n)) + 1j * rng.standard_normal((n * rho, n))) / np.sqrt(2)
    return FairnessProblem(H, GroupSchedule.from_assignment(np.repeat(np.arange(n), rho)), 1.0, 1.0, 1.0)


def test_level_zero_is_trivially_feasible():
    it = sdr_feasibility(orthogonal(), 0.0)
    assert it is not None and np.all(it.X == 0)


def test_orthogonal_level_one_is_feasible():
    it = sdr_feasibility(orthogonal(), 1.0)
    assert it is not None
    assert it.relaxed_level(orthogonal()) >= 1.0 - 1e-6


def test_orthogonal_level_three_is_infeasible():
    assert sdr_feasibility(orthogonal(), 3.0) is None


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("scale", [0.3, 0.9, 1.1, 3.0])
def test_clarabel_matches_cvxpy_reference(seed, scale):
    prob = random_problem(seed)
    t = scale * prob.level(prob.matched_filter()) * 4
    data = feasibility_data(prob, t)
    direct = ClarabelBackend().solve(data)
    ref = CvxpyBackend().solve(data)
    assert direct.slack == pytest.approx(ref.slack, abs=1e-5)
    assert direct.certify(data, 1e-8)[0] == (ref.slack <= 1e-6)


def test_complex_and_real_paths_agree():
    prob = random_problem(11)
    data = feasibility_data(prob, 0.5)
    real_like = FeasibilityData(np.abs(data.Q), data.weights, data.assignment, data.n_groups, data.pac, data.t)
    assert real_like.is_real and not data.is_real
    a = ClarabelBackend().solve(real_like)
    b = CvxpyBackend().solve(real_like)
    assert a.slack == pytest.approx(b.slack, abs=1e-5)


def test_projection_is_psd_and_within_limits():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((2, 3, 3)) + 1j * rng.standard_normal((2, 3, 3))
    pac = np.array([0.5, 1.0, 2.0])
    X = project_feasible(M, pac)
    assert np.all(np.linalg.eigvalsh(X) >= -1e-12)
    assert np.all(np.einsum("kaa->a", X).real <= pac * (1 + 1e-12))


def test_margin_of_decoupled_certificate():
    prob = orthogonal()
    data = feasibility_data(prob, 1.0)
    X = np.stack([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]).astype(complex)
    assert constraint_margin(X, data) == pytest.approx(0.0, abs=1e-14)


def test_data_round_trips_through_npz(tmp_path):
    data = feasibility_data(random_problem(4), 0.7)
    back = FeasibilityData.load(data.save(tmp_path / "sub.npz"))
    assert np.array_equal(back.Q, data.Q) and back.t == data.t and back.n_groups == data.n_groups


def test_nonpositive_level_rejected_by_backend():
    with pytest.raises(ValueError):
        ClarabelBackend().solve(feasibility_data(orthogonal(), 0.0))
