import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from structmor.lti import (DimensionError, SingularTransformError, StateSpace, dual,
                           frequency_response, is_stable, load_model, model_from_dict,
                           model_to_dict, save_model, similarity_transform,
                           step_response, validate)

MSD = StateSpace([[0, 1], [-1, -1]], [[0], [1]], [[0, 1]], [[0]])


def test_arrays_are_read_only_copies():
    A = np.array([[-1.0]])
    sys = StateSpace(A, [[1]], [[1]], [[0]])
    A[0, 0] = 5.0
    assert sys.A[0, 0] == -1.0
    with pytest.raises(ValueError):
        sys.A[0, 0] = 2.0


@pytest.mark.parametrize("B, C, D", [
    ([[1, 0]], [[1]], [[0]]),          # B has wrong row count
    ([[1]], [[1, 2]], [[0]]),          # C has wrong column count
    ([[1]], [[1]], [[0, 0]]),          # D wrong shape
])
def test_dimension_errors(B, C, D):
    with pytest.raises(DimensionError):
        StateSpace([[-1]], B, C, D)


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        StateSpace([[np.nan]], [[1]], [[1]], [[0]])


def test_validate_reports_nonminimal():
    sys = StateSpace(np.diag([-1.0, -2.0]), [[1], [0]], [[1, 1]], [[0]])
    rep = validate(sys, require_minimal=True)
    assert rep.controllable_rank == 1 and rep.observable_rank == 2
    assert not rep.minimal and rep.issues


def test_validate_ill_scaled_but_minimal():
    # entries spread over many decades, still a minimal chain
    A = np.diag([-1e-3, -1.0, -1e3]) + np.diag([1e2, 1e-2], 1)
    sys = StateSpace(A, [[0], [0], [1e-2]], [[1, 0, 0]], [[0]])
    assert validate(sys).minimal


def test_stability_margin():
    assert is_stable(MSD)
    assert not is_stable(StateSpace([[0.0]], [[1]], [[1]], [[0]]))
    assert not is_stable(np.array([[1e-3]]))


def test_similarity_invariance_of_response():
    rng = np.random.default_rng(1)
    T = rng.standard_normal((2, 2)) + 3 * np.eye(2)
    st_ = similarity_transform(MSD, T)
    w = [0.3, 1.0, 4.0]
    for a, b in zip(frequency_response(MSD, w), frequency_response(st_, w)):
        np.testing.assert_allclose(a.G, b.G, atol=1e-12)


def test_singular_transform_rejected():
    with pytest.raises(SingularTransformError):
        similarity_transform(MSD, [[1, 1], [1, 1]])


def test_dual_transposes_response():
    rng = np.random.default_rng(2)
    sys = StateSpace(-np.eye(3) + 0.3 * rng.standard_normal((3, 3)),
                     rng.standard_normal((3, 2)), rng.standard_normal((2, 3)),
                     rng.standard_normal((2, 2)))
    for a, b in zip(frequency_response(sys, [0.5, 2.0]), frequency_response(dual(sys), [0.5, 2.0])):
        np.testing.assert_allclose(a.G.T, b.G, atol=1e-12)


def test_frequency_response_msd_closed_form():
    w = np.array([0.0, 0.5, 1.0, 3.0])
    s = 1j * w
    exact = s / (s ** 2 + s + 1)
    got = np.array([x.G[0, 0] for x in frequency_response(MSD, w)])
    np.testing.assert_allclose(got, exact, atol=1e-14)


def test_frequency_response_at_pole_is_reported():
    osc = StateSpace([[0, 1], [-4, 0]], [[0], [1]], [[1, 0]], [[0]])
    sample = frequency_response(osc, [2.0])[0]
    assert sample.G is None and "pole" in sample.error


def test_step_response_first_order_closed_form():
    sys = StateSpace([[-2.0]], [[1.0]], [[3.0]], [[0.5]])
    t, y = step_response(sys, 1e-3, 2.0)
    exact = 1.5 * (1 - np.exp(-2 * t)) + 0.5
    np.testing.assert_allclose(y[:, 0], exact, atol=1e-12)


def test_step_response_msd_closed_form():
    t, y = step_response(MSD, 1e-2, 10.0)
    wd = np.sqrt(3) / 2
    exact = np.exp(-t / 2) * np.sin(wd * t) / wd
    np.testing.assert_allclose(y[:, 0], exact, atol=1e-12)


def test_model_roundtrip(tmp_path):
    sys = StateSpace([[-1, 2], [0, -3]], [[1], [0.5]], [[1, 1]], [[0.25]])
    save_model(sys, tmp_path / "m.json", note="x")
    back = load_model(tmp_path / "m.json")
    for a, b in zip(sys, back):
        np.testing.assert_array_equal(a, b)
    assert json.loads((tmp_path / "m.json").read_text())["note"] == "x"


def test_model_missing_field():
    with pytest.raises(DimensionError):
        model_from_dict({"A": [[1]], "B": [[1]], "C": [[1]]})


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_dict_roundtrip_property(n, p, seed):
    rng = np.random.default_rng(seed)
    sys = StateSpace(*(rng.standard_normal(s) for s in [(n, n), (n, p), (p, n), (p, p)]))
    back = model_from_dict(json.loads(json.dumps(model_to_dict(sys))))
    for a, b in zip(sys, back):
        np.testing.assert_array_equal(a, b)
