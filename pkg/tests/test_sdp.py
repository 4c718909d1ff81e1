import numpy as np
import pytest

from structmor.sdp import BlockSDP, solve_sdp


def test_min_eigenvalue_as_sdp():
    # max lambda  s.t.  M - lambda I >= 0
    rng = np.random.default_rng(0)
    G = rng.standard_normal((5, 5))
    M = G + G.T
    res = solve_sdp(BlockSDP(C=[M], A=[np.eye(5)[None]], b=np.array([1.0])))
    assert res.status == "optimal"
    assert res.y[0] == pytest.approx(np.linalg.eigvalsh(M)[0], abs=1e-7)


def test_two_blocks_and_box():
    # max y1 + y2  s.t.  y1 <= 2, y2 <= 3, [[1, y1 - y2], [y1 - y2, 1]] >= 0
    A1 = np.zeros((2, 2, 2))
    A1[0] = [[0, 1], [1, 0]]
    A1[1] = [[0, -1], [-1, 0]]
    box = np.array([[[1.0, 0], [0, 0]], [[0, 0], [0, 1.0]]])
    res = solve_sdp(BlockSDP(C=[np.eye(2), np.diag([2.0, 3.0])], A=[-A1, box],
                             b=np.array([1.0, 1.0])))
    # optimum: y2 = 3, y1 - y2 >= -1  and y1 <= 2  ->  y1 = 2
    np.testing.assert_allclose(res.y, [2.0, 3.0], atol=1e-6)


def test_infeasible_detected():
    # y >= 1 and y <= -1
    prob = BlockSDP(C=[np.array([[-1.0]]), np.array([[-1.0]])],
                    A=[-np.ones((1, 1, 1)), np.ones((1, 1, 1))], b=np.array([0.0]))
    res = solve_sdp(prob)
    assert res.status != "optimal"
