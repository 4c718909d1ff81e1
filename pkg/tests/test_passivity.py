import math

import numpy as np
import pytest

from structmor.lti import StateSpace, dual
from structmor.passivity import (NonMinimalError, NotPassiveError, check_storage,
                                 is_passive, is_positive_definite, lmi_residual,
                                 max_available_storage, min_available_storage,
                                 min_required_supply, popov_kernel, riccati_storage,
                                 riccati_trend)
from systems import random_passive

FIRST_ORDER = StateSpace([[-1]], [[1]], [[1]], [[1]])
MSD = StateSpace([[0, 1], [-1, -1]], [[0], [1]], [[0, 1]], [[0]])


def lmi_max_eig(sys, Xi):
    A, B, C, D = (np.asarray(m, dtype=float) for m in sys)
    M = np.block([[A.T @ Xi + Xi @ A, Xi @ B - C.T], [B.T @ Xi - C, -(D + D.T)]])
    return np.linalg.eigvalsh(M)[-1]


def test_scalar_with_feedthrough_interval():
    # feasible storages of (-1, 1, 1, 1) form [3 - 2 sqrt 2, 3 + 2 sqrt 2]
    grid = np.linspace(1e-3, 7.0, 70001)
    feasible = grid[[lmi_max_eig(FIRST_ORDER, np.array([[x]])) <= 1e-12 for x in grid]]
    assert feasible.min() == pytest.approx(3 - 2 * math.sqrt(2), abs=2e-4)
    assert min_available_storage(FIRST_ORDER).X[0, 0] == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-8)
    assert max_available_storage(FIRST_ORDER).X[0, 0] == pytest.approx(3 + 2 * math.sqrt(2), abs=1e-6)


def test_scalar_without_feedthrough_is_fixed():
    sys = StateSpace([[-1]], [[1]], [[1]], [[0]])
    assert min_available_storage(sys).X[0, 0] == pytest.approx(1.0, abs=1e-8)


def test_msd_minimal_storage_is_identity():
    np.testing.assert_allclose(min_available_storage(MSD).X, np.eye(2), atol=1e-8)


def test_loewner_minimal_against_sampling():
    # every sampled feasible storage dominates the computed one
    rng = np.random.default_rng(4)
    sys, Q = random_passive(rng, 2, 1, feedthrough=True)
    Xi = min_available_storage(sys).X
    assert lmi_max_eig(sys, Xi) <= 1e-7 * np.linalg.norm(Xi)
    hits = 0
    for _ in range(20000):
        L = rng.standard_normal((2, 2)) * rng.uniform(0, 2 * np.linalg.norm(Q))
        X = Xi + 0.5 * (L @ L.T) if rng.uniform() < 0.5 else Q + rng.standard_normal((2, 2))
        X = 0.5 * (X + X.T)
        if np.linalg.eigvalsh(X)[0] > 0 and lmi_max_eig(sys, X) <= 0:
            hits += 1
            assert np.linalg.eigvalsh(X - Xi)[0] >= -1e-6 * np.linalg.norm(X)
    assert hits > 100


@pytest.mark.parametrize("seed", range(5))
def test_interior_point_matches_riccati_with_feedthrough(seed):
    rng = np.random.default_rng(10 + seed)
    sys, Q = random_passive(rng, 4, 2, feedthrough=True)
    ipm = min_available_storage(sys).X
    ric = riccati_storage(sys, 0.0).X
    assert np.linalg.norm(ipm - ric) <= 1e-6 * np.linalg.norm(ric)
    # a known storage dominates the minimal one
    assert np.linalg.eigvalsh(Q - ipm)[0] >= -1e-7 * np.linalg.norm(Q)


@pytest.mark.parametrize("seed", range(4))
def test_bounds_and_duality(seed):
    rng = np.random.default_rng(20 + seed)
    sys, Q = random_passive(rng, 3, 1)
    lo = min_available_storage(sys).X
    hi = max_available_storage(sys).X
    for X in (lo, hi):
        assert check_storage(sys, X)[0]
    assert np.linalg.eigvalsh(hi - lo)[0] >= -1e-6 * np.linalg.norm(hi)
    assert np.linalg.eigvalsh(Q - lo)[0] >= -1e-6 * np.linalg.norm(Q)
    assert np.linalg.eigvalsh(hi - Q)[0] >= -1e-6 * np.linalg.norm(hi)
    np.testing.assert_allclose(min_required_supply(sys).X, min_available_storage(dual(sys)).X)


def test_interior_storage_option():
    rng = np.random.default_rng(30)
    sys, _ = random_passive(rng, 3, 1, feedthrough=True)
    mid = min_available_storage(sys, minimal=False)
    assert check_storage(sys, mid.X)[0]
    assert np.trace(mid.X) > np.trace(min_available_storage(sys).X)


def test_riccati_converges_to_minimal_storage():
    ref = min_available_storage(MSD).X
    trend = riccati_trend(MSD, (1e-2, 1e-4, 1e-6), reference=ref)
    diffs = [r["rel_diff"] for r in trend]
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[2] < 1e-2


def test_riccati_needs_regularization_without_feedthrough():
    with pytest.raises(np.linalg.LinAlgError):
        riccati_storage(MSD, 0.0)


@pytest.mark.parametrize("sys, reason", [
    (StateSpace([[-1]], [[1]], [[-1]], [[0]]), "indefinite"),
    (StateSpace([[1]], [[1]], [[1]], [[1]]), "unstable"),
    (StateSpace([[-1]], [[1]], [[1]], [[-0.1]]), "D + D^T"),
])
def test_non_passive_detected(sys, reason):
    cert = is_passive(sys)
    assert not cert.feasible and reason in cert.message
    with pytest.raises(NotPassiveError):
        min_available_storage(sys)


def test_real_part_turns_negative_at_high_frequency():
    # Re G(jw) ~ (0.3 - 0.25 w^2) / |.|^2 changes sign near w = 1.1
    sys = StateSpace([[0, 1], [-1, -0.05]], [[0], [1]], [[0.3, 1]], [[0]])
    assert not is_passive(sys).feasible


def test_nonminimal_rejected_or_certified():
    sys = StateSpace(np.diag([-1.0, -2.0]), [[1], [0]], [[1, 0]], [[0]])
    with pytest.raises(NonMinimalError):
        is_passive(sys)
    cert = is_passive(sys, check_minimal=False)
    assert cert.feasible and is_positive_definite(cert.Xi.X)


def test_certificate_serializes():
    data = is_passive(MSD).to_dict()
    assert data["feasible"] is True and np.allclose(data["Xi"], np.eye(2), atol=1e-8)


def test_popov_kernel_of_msd():
    # Phi(jw) = 2 w^2 / |1 - w^2 + jw|^2 vanishes at 0 and at infinity
    freqs = sorted(w for w, _ in popov_kernel(MSD))
    assert freqs[0] == 0.0 and math.isinf(freqs[-1])


def test_lmi_residual_matches_direct_eigenvalue():
    rng = np.random.default_rng(5)
    sys, Q = random_passive(rng, 4, 2)
    assert lmi_residual(sys, Q)[1] == pytest.approx(lmi_max_eig(sys, Q), abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_port_hamiltonian_models_certified(seed):
    rng = np.random.default_rng(40 + seed)
    sys, _ = random_passive(rng, int(rng.integers(1, 7)), int(rng.integers(1, 3)),
                            feedthrough=bool(seed % 2))
    cert = is_passive(sys)
    assert cert.feasible, cert.message
