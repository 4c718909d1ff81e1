import math

import numpy as np
import pytest

from structmor.beam import (BEAM_1, BEAM_2, BeamConfig, assemble_beam, beam_element,
                            build_beam, build_two_beam_benchmark, damper_coupling,
                            natural_frequencies, rayleigh, theta_dof, to_statespace, w_dof)
from structmor.interconnection import interconnect
from structmor.lti import is_stable, validate
from structmor.passivity import is_passive

E, RHO, AREA = 2e11, 8e3, 1e-4
I = AREA ** 2 / 12


def cantilever_f1(length=1.0):
    return 1.875104068711961 ** 2 / (2 * math.pi) * math.sqrt(E * I / (RHO * AREA * length ** 4))


def test_element_rigid_body_modes():
    ell = 0.2
    k, m = beam_element(E, I, RHO, AREA, ell)
    translation = np.array([1.0, 0.0, 1.0, 0.0])
    rotation = np.array([0.0, 1.0, ell, 1.0])
    np.testing.assert_allclose(k @ translation, 0, atol=1e-6 * np.abs(k).max())
    np.testing.assert_allclose(k @ rotation, 0, atol=1e-6 * np.abs(k).max())
    assert translation @ m @ translation == pytest.approx(RHO * AREA * ell, rel=1e-12)
    assert np.all(np.linalg.eigvalsh(m) > 0)
    assert np.sum(np.linalg.eigvalsh(k) > 1e-9 * np.abs(k).max()) == 2


def test_cantilever_first_frequency():
    f1 = natural_frequencies(assemble_beam(BEAM_1))[0] / (2 * math.pi)
    assert cantilever_f1() == pytest.approx(8.07, abs=0.01)
    assert abs(f1 - cantilever_f1()) / cantilever_f1() < 2e-3


def test_refinement_converges_from_above():
    coarse = natural_frequencies(assemble_beam(BEAM_1))[:3]
    fine = natural_frequencies(assemble_beam(BEAM_1.refined(4)))[:3]
    assert np.all(fine <= coarse * (1 + 1e-12))


def test_modal_damping_is_rayleigh():
    model = assemble_beam(BEAM_1)
    w = natural_frequencies(model)
    zeta = 0.5 * (1.0 / w + 5e-6 * w)
    poles = build_beam(BEAM_1).poles()
    upper = poles[poles.imag > 0]
    got = np.sort(-upper.real / np.abs(upper))
    underdamped = np.sort(zeta[zeta < 1])
    np.testing.assert_allclose(got, underdamped, rtol=1e-6)


def test_orders_and_channels():
    subs, topo = build_two_beam_benchmark()
    assert [s.n for s in subs] == [20, 20]
    assert [s.p for s in subs] == [2, 3]
    sys_c = interconnect(subs, topo)
    assert sys_c.n == 40 and sys_c.p == 1 and is_stable(sys_c)


def test_subsystems_minimal_and_passive():
    subs, _ = build_two_beam_benchmark()
    for s in subs:
        assert validate(s).minimal
        assert is_passive(s).feasible


def test_statespace_structure():
    model = assemble_beam(BEAM_2).with_damping(np.zeros((10, 10)))
    sys = to_statespace(model)
    m = model.M.shape[0]
    np.testing.assert_array_equal(sys.A[:m, m:], np.eye(m))
    np.testing.assert_array_equal(sys.C[:, :m], 0)
    np.testing.assert_allclose(sys.B[m:], np.linalg.solve(model.M, model.F))


def test_damper_coupling_is_psd_laplacian():
    S = damper_coupling([(0, 2, 50.0), (1, 3, 3.0)], 5)
    assert np.allclose(S, S.T) and np.linalg.eigvalsh(S)[0] >= -1e-12
    np.testing.assert_allclose(S @ np.array([1.0, 0, 1.0, 0, 0]), 0)
    assert S[4].sum() == 0


def test_config_validation():
    with pytest.raises(ValueError):
        BeamConfig(fixed_dofs=(w_dof(0),), io_dofs=(w_dof(0),))
    with pytest.raises(ValueError):
        BeamConfig(io_dofs=(theta_dof(9),))
    with pytest.raises(ValueError):
        BeamConfig(length=-1.0)


def test_rayleigh():
    M, K = np.eye(2), np.diag([1.0, 4.0])
    np.testing.assert_allclose(rayleigh(M, K, 2.0, 0.5), np.diag([2.5, 4.0]))
