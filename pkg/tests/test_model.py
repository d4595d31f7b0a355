import numpy as np
import pytest

from dimmsb.core import (
    AllNodesRemoved,
    BiAdjacency,
    CountMismatch,
    DimensionMismatch,
    MembershipMatrix,
    ProbabilityMatrix,
    ProbabilityOutOfRange,
)
from dimmsb.model import (
    DEFAULT_MIXED_PMFS,
    MixedProfileSpec,
    ModelParams,
    build_omega,
    check_identifiability,
    make_planted_memberships,
    prune_zero_degree,
    sample_adjacency,
)

from .oracles import omega_double_sum, random_params


def test_omega_single_mixed_pair():
    pi_r = MembershipMatrix(np.array([[0.5, 0.5], [1.0, 0.0]]))
    pi_c = MembershipMatrix(np.array([[0.5, 0.5], [0.0, 1.0]]))
    P = ProbabilityMatrix.from_entries([[0.9, 0.1], [0.1, 0.9]])
    omega = build_omega(ModelParams(P, pi_r, pi_c))
    assert omega[0, 0] == pytest.approx(0.5, abs=1e-15)
    assert omega[1, 1] == pytest.approx(0.1, abs=1e-15)


def test_omega_matches_double_sum(rng):
    for _ in range(5):
        params = random_params(rng, n_range=(5, 12))
        omega = build_omega(params)
        ref = omega_double_sum(params.pi_r.weights, params.P.entries, params.pi_c.weights)
        assert np.max(np.abs(omega - ref)) <= 1e-14


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        ModelParams(
            ProbabilityMatrix.from_entries(np.eye(3)),
            MembershipMatrix(np.eye(2)),
            MembershipMatrix(np.eye(3)),
        )


def test_sampling_extremes():
    assert sample_adjacency(np.zeros((4, 5)), 1).n_edges == 0
    assert sample_adjacency(np.ones((4, 5)), 1).n_edges == 20


def test_sampling_binomial_band():
    n = 200
    p = 0.3
    count = sample_adjacency(np.full((n, n), p), 7).n_edges
    sd = np.sqrt(n * n * p * (1 - p))
    assert abs(count - n * n * p) <= 3 * sd


def test_sampling_rejects_bad_probabilities():
    with pytest.raises(ProbabilityOutOfRange):
        sample_adjacency(np.array([[0.5, 1.2]]), 0)


def test_sampling_is_deterministic_and_seed_sensitive():
    omega = np.full((30, 40), 0.2)
    a = sample_adjacency(omega, 11)
    assert a == sample_adjacency(omega, 11)
    assert a != sample_adjacency(omega, 12)
    ss = np.random.SeedSequence(3, spawn_key=(1, 2))
    assert sample_adjacency(omega, ss) == sample_adjacency(omega, np.random.SeedSequence(3, spawn_key=(1, 2)))


def test_sampling_cell_stream_is_stable_under_omega_changes():
    omega = np.full((10, 10), 0.4)
    a = sample_adjacency(omega, 5).toarray()
    omega2 = omega.copy()
    omega2[3, 3] = 0.9
    b = sample_adjacency(omega2, 5).toarray()
    mask = np.ones_like(a, dtype=bool)
    mask[3, 3] = False
    assert np.array_equal(a[mask], b[mask])


def test_sampling_mean_converges(rng):
    params = random_params(rng, n_range=(20, 30))
    omega = build_omega(params)
    reps = 400
    acc = np.zeros_like(omega)
    for s in range(reps):
        acc += sample_adjacency(omega, s).toarray()
    # Each cell mean has sd <= 0.5/sqrt(reps) = 0.025.
    assert np.max(np.abs(acc / reps - omega)) < 0.15
    assert abs((acc / reps - omega).mean()) < 0.01


def test_prune_zero_degree():
    a = BiAdjacency.from_dense([[1, 0, 0], [0, 0, 0], [1, 0, 1]])
    pi = MembershipMatrix(np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]]))
    sub, pr, pc = prune_zero_degree(a, pi, pi)
    assert sub.row_labels == ("1", "3") and sub.col_labels == ("1", "3")
    assert np.array_equal(pr.weights, pi.weights[[0, 2]])
    assert np.array_equal(pc.weights, pi.weights[[0, 2]])
    assert pr.labels == ("1", "3")


def test_prune_all_removed():
    pi = MembershipMatrix(np.eye(2))
    with pytest.raises(AllNodesRemoved):
        prune_zero_degree(BiAdjacency.from_dense(np.zeros((2, 2), dtype=int)), pi, pi)


def test_even_split():
    spec = MixedProfileSpec.even(DEFAULT_MIXED_PMFS, 8)
    assert spec.total == 8
    assert all(c == 2 for _, c in spec.profiles)
    with pytest.raises(CountMismatch):
        MixedProfileSpec.even(DEFAULT_MIXED_PMFS, 5)


def test_planted_memberships_layout():
    pi = make_planted_memberships(10, 3, 2, MixedProfileSpec.even(DEFAULT_MIXED_PMFS, 4))
    assert pi.weights[:6].tolist() == np.repeat(np.eye(3), 2, axis=0).tolist()
    assert pi.pure_mask().sum() == 6
    with pytest.raises(CountMismatch):
        make_planted_memberships(11, 3, 2, MixedProfileSpec.even(DEFAULT_MIXED_PMFS, 4))


def test_identifiability_report():
    pi = make_planted_memberships(7, 3, 1, MixedProfileSpec.even(DEFAULT_MIXED_PMFS, 4))
    good = check_identifiability(ModelParams(ProbabilityMatrix.from_entries(np.eye(3) * 0.5 + 0.1), pi, pi))
    assert good.ok and good.row_pure_counts == (1, 1, 1)
    flat = check_identifiability(ModelParams(ProbabilityMatrix.from_entries(np.ones((3, 3))), pi, pi))
    assert not flat.full_rank and "FAIL" in flat.summary()
    mixed_only = MembershipMatrix(np.vstack([np.eye(3)[:2], [[0.5, 0.0, 0.5]]]))
    nopure = check_identifiability(ModelParams(ProbabilityMatrix.from_entries(np.eye(3)), mixed_only, pi))
    assert not nopure.pure_nodes and nopure.row_pure_counts == (1, 1, 0)


def test_singular_value_sandwich(rng):
    for _ in range(20):
        params = random_params(rng)
        K = params.K
        s_om = np.linalg.svd(build_omega(params), compute_uv=False)
        s_p = np.linalg.svd(params.P.p_tilde, compute_uv=False)
        s_r = np.linalg.svd(params.pi_r.weights, compute_uv=False)
        s_c = np.linalg.svd(params.pi_c.weights, compute_uv=False)
        rho = params.P.rho
        assert s_om[K - 1] >= rho * s_p[-1] * s_r[K - 1] * s_c[K - 1] * (1 - 1e-10)
        assert s_om[0] <= rho * s_p[0] * s_r[0] * s_c[0] * (1 + 1e-10)
