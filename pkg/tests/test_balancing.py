import warnings

import numpy as np
import pytest

from structmor.balancing import (BalancingError, ClampWarning, TieWarning, balance,
                                 balancing_transform, reduce_lyap_bt, reduce_mg_bt,
                                 reduce_pr_bt, truncate)
from structmor.lti import StateSpace, frequency_response, is_stable
from structmor.lyapunov import controllability_gramian, observability_gramian
from structmor.passivity import is_passive
from systems import random_passive, spd


@pytest.mark.parametrize("seed", range(10))
def test_transform_balances_pair(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    X_i, X_o = spd(rng, n, 1e3), spd(rng, n, 1e3)
    T, Ti, g = balancing_transform(X_i, X_o)
    np.testing.assert_allclose(T @ Ti, np.eye(n), atol=1e-9)
    np.testing.assert_allclose(T @ X_i @ T.T, np.diag(g), atol=1e-8 * g[0])
    np.testing.assert_allclose(Ti.T @ X_o @ Ti, np.diag(g), atol=1e-8 * g[0])
    ev = np.sort(np.linalg.eigvals(X_i @ X_o).real)[::-1]
    np.testing.assert_allclose(g ** 2, ev, rtol=1e-8, atol=1e-12 * ev[0])
    assert np.all(np.diff(g) <= 0)


def test_sign_convention_is_reproducible():
    rng = np.random.default_rng(7)
    X_i, X_o = spd(rng, 5), spd(rng, 5)
    T1, *_ = balancing_transform(X_i, X_o)
    T2, *_ = balancing_transform(X_i.copy(), X_o.copy())
    np.testing.assert_array_equal(T1, T2)


def test_non_spd_raises_or_clamps():
    X = np.diag([1.0, 0.0])
    with pytest.raises(BalancingError):
        balancing_transform(X, np.eye(2))
    with pytest.warns(ClampWarning):
        T, Ti, g = balancing_transform(X, np.eye(2), clamp=True)
    assert np.all(np.isfinite(T))
    with pytest.raises(BalancingError):
        balancing_transform(-np.eye(2), np.eye(2), clamp=True)


def test_lyapbt_bound_and_hsv():
    rng = np.random.default_rng(8)
    A = 0.3 * rng.standard_normal((6, 6))
    A -= (np.max(np.linalg.eigvals(A).real) + 1.0) * np.eye(6)
    sys = StateSpace(A, rng.standard_normal((6, 1)), rng.standard_normal((1, 6)), [[0]])
    res = reduce_lyap_bt(sys, 3)
    ev = np.linalg.eigvals(controllability_gramian(sys).X @ observability_gramian(sys).X)
    hsv = np.sqrt(np.clip(np.sort(ev.real)[::-1], 0, None))
    np.testing.assert_allclose(res.gamma, hsv, rtol=1e-8, atol=1e-8 * hsv[0])
    w = np.geomspace(1e-2, 1e3, 400)
    err = max(abs(a.G[0, 0] - b.G[0, 0]) for a, b in
              zip(frequency_response(sys, w), frequency_response(res.reduced, w)))
    assert err <= 2 * res.discarded_gamma.sum() * (1 + 1e-9)
    assert is_stable(res.reduced)


@pytest.mark.parametrize("seed", range(4))
def test_positive_real_truncations_stay_passive(seed):
    rng = np.random.default_rng(50 + seed)
    sys, _ = random_passive(rng, 5, 1, feedthrough=bool(seed % 2))
    for res in (reduce_pr_bt(sys, 2, certify=True), reduce_mg_bt(sys, 2, certify=True),
                reduce_mg_bt(sys, 2, variant="PiQ", certify=True)):
        assert res.reduced.n == 2 and is_stable(res.reduced)
        assert res.certificate.feasible, (res.method, res.certificate.message)


def _mg_mismatch(sys, r, transpose=False):
    a = reduce_mg_bt(sys, r, "PXi").reduced
    b = reduce_mg_bt(sys, r, "PiQ").reduced
    w = np.geomspace(1e-2, 1e2, 50)
    return max(np.linalg.norm(x.G - (y.G.T if transpose else y.G)) / np.linalg.norm(x.G)
               for x, y in zip(frequency_response(a, w), frequency_response(b, w)))


@pytest.mark.parametrize("seed", range(3))
def test_mg_variants_agree_single_port(seed):
    sys, _ = random_passive(np.random.default_rng(60 + seed), 5, 1)
    assert _mg_mismatch(sys, 3) <= 1e-6


@pytest.mark.parametrize("seed", range(3))
def test_mg_variants_transposed_for_reciprocal_models(seed):
    # J = 0 gives G(s) = G(s)^T; the two reductions are then dual realizations
    rng = np.random.default_rng(70 + seed)
    R, Q, G = spd(rng, 5, 5.0), spd(rng, 5, 5.0), rng.standard_normal((5, 2))
    sys = StateSpace(-R @ Q, G, G.T @ Q, np.zeros((2, 2)))
    assert _mg_mismatch(sys, 3, transpose=True) <= 1e-6


def test_mg_variants_differ_for_multiport_models():
    sys, _ = random_passive(np.random.default_rng(60), 5, 2)
    assert _mg_mismatch(sys, 3) > 1e-2


def test_tie_warning():
    msd = StateSpace([[0, 1], [-1, -1]], [[0], [1]], [[0, 1]], [[0]])
    with pytest.warns(TieWarning):
        reduce_lyap_bt(msd, 1)


def test_full_order_is_exact():
    rng = np.random.default_rng(9)
    sys, _ = random_passive(rng, 4, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = reduce_pr_bt(sys, 4)
    w = [0.1, 1.0, 10.0]
    for x, y in zip(frequency_response(sys, w), frequency_response(res.reduced, w)):
        np.testing.assert_allclose(x.G, y.G, atol=1e-8)


def test_preconditions():
    unstable = StateSpace([[1.0]], [[1]], [[1]], [[0]])
    with pytest.raises(BalancingError, match="stable"):
        reduce_lyap_bt(unstable, 1)
    nonmin = StateSpace(np.diag([-1.0, -2.0]), [[1], [0]], [[1, 1]], [[0]])
    with pytest.raises(BalancingError, match="minimal"):
        reduce_mg_bt(nonmin, 1)
    with pytest.raises(ValueError):
        reduce_mg_bt(StateSpace([[-1]], [[1]], [[1]], [[0]]), 1, variant="bogus")
    rng = np.random.default_rng(0)
    bal = balance(random_passive(rng, 3, 1)[0], spd(rng, 3), spd(rng, 3))
    for r in (0, 4, 1.5):
        with pytest.raises(ValueError):
            truncate(bal, r)


def test_result_serializes():
    res = reduce_mg_bt(StateSpace([[0, 1], [-2, -3]], [[0], [1]], [[0, 1]], [[0]]), 1,
                       certify=True)
    data = res.to_dict()
    assert data["method"] == "MGBT" and data["kept_order"] == 1
    assert len(data["gamma"]) == 2 and data["certificate"]["feasible"]
