"""Euler-Bernoulli beam models and the coupled two-beam benchmark.

Two 1 m steel beams of five bending elements each are joined by a
translational and a rotational damper. The free right end of the right
beam carries the external force input and velocity output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

from .lti import StateSpace

__all__ = [
    "BeamConfig",
    "SecondOrderModel",
    "beam_element",
    "assemble_beam",
    "rayleigh",
    "to_statespace",
    "build_two_beam_benchmark",
    "BEAM_1",
    "BEAM_2",
    "RAYLEIGH_ALPHA",
    "RAYLEIGH_BETA",
    "TRANSLATIONAL_DAMPING",
    "ROTATIONAL_DAMPING",
]

STEEL_E = 2e11          # Pa
STEEL_RHO = 8e3         # kg/m^3
SECTION_AREA = 1e-4     # m^2, square section
RAYLEIGH_ALPHA = 1.0    # 1/s
RAYLEIGH_BETA = 5e-6    # s
TRANSLATIONAL_DAMPING = 50.0  # N s/m
ROTATIONAL_DAMPING = 3.0      # N m s/rad


@dataclass(frozen=True)
class BeamConfig:
    """Uniform beam discretized into equal bending elements.

    DOFs are numbered ``(w_0, theta_0, w_1, theta_1, ...)`` from the left
    node. ``io_dofs`` are collocated force-input / velocity-output channels.
    """

    length: float = 1.0
    youngs_modulus: float = STEEL_E
    density: float = STEEL_RHO
    cross_section_area: float = SECTION_AREA
    second_moment_area: float = SECTION_AREA ** 2 / 12
    n_elements: int = 5
    fixed_dofs: tuple[int, ...] = ()
    io_dofs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for name in ("length", "youngs_modulus", "density",
                     "cross_section_area", "second_moment_area"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_elements < 1:
            raise ValueError("need at least one element")
        ndof = self.n_dofs
        if set(self.fixed_dofs) & set(self.io_dofs):
            raise ValueError("fixed and I/O DOFs must be disjoint")
        for d in (*self.fixed_dofs, *self.io_dofs):
            if not 0 <= d < ndof:
                raise ValueError(f"DOF {d} out of range 0..{ndof - 1}")

    @property
    def n_dofs(self) -> int:
        return 2 * (self.n_elements + 1)

    def refined(self, factor: int) -> "BeamConfig":
        """Same beam with ``factor`` times as many elements; DOFs mapped by node."""
        def remap(d):
            node, kind = divmod(d, 2)
            return 2 * node * factor + kind
        return BeamConfig(self.length, self.youngs_modulus, self.density,
                          self.cross_section_area, self.second_moment_area,
                          self.n_elements * factor,
                          tuple(map(remap, self.fixed_dofs)),
                          tuple(map(remap, self.io_dofs)))


def w_dof(node: int) -> int:
    return 2 * node


def theta_dof(node: int) -> int:
    return 2 * node + 1


# left beam: cantilever clamped at node 0, interface channels at node 5
BEAM_1 = BeamConfig(fixed_dofs=(w_dof(0), theta_dof(0)),
                    io_dofs=(w_dof(5), theta_dof(5)))
# right beam: translations of the 2nd and 4th node fixed; interface at node 0,
# external channel at the free right end
BEAM_2 = BeamConfig(fixed_dofs=(w_dof(1), w_dof(3)),
                    io_dofs=(w_dof(0), theta_dof(0), w_dof(5)))


@dataclass(frozen=True)
class SecondOrderModel:
    """``M q'' + Dd q' + K q = F u`` with collocated velocity output ``F^T q'``."""

    M: NDArray[np.float64]
    Dd: NDArray[np.float64]
    K: NDArray[np.float64]
    F: NDArray[np.float64]
    free_dofs: tuple[int, ...] = field(default=())

    def with_damping(self, Dd: NDArray) -> "SecondOrderModel":
        return SecondOrderModel(self.M, Dd, self.K, self.F, self.free_dofs)


def beam_element(E: float, I: float, rho: float, A: float,
                 ell: float) -> tuple[NDArray, NDArray]:
    """Stiffness and consistent mass of a 2-node bending element.

    DOF order is ``(w1, theta1, w2, theta2)``.
    """
    L = ell
    k = E * I / L ** 3 * np.array([
        [12, 6 * L, -12, 6 * L],
        [6 * L, 4 * L ** 2, -6 * L, 2 * L ** 2],
        [-12, -6 * L, 12, -6 * L],
        [6 * L, 2 * L ** 2, -6 * L, 4 * L ** 2],
    ])
    m = rho * A * L / 420 * np.array([
        [156, 22 * L, 54, -13 * L],
        [22 * L, 4 * L ** 2, 13 * L, -3 * L ** 2],
        [54, 13 * L, 156, -22 * L],
        [-13 * L, -3 * L ** 2, -22 * L, 4 * L ** 2],
    ])
    return k, m


def assemble_beam(cfg: BeamConfig) -> SecondOrderModel:
    """Assemble ``M`` and ``K``, remove fixed DOFs, build the input map.

    The returned model has zero damping; see :func:`rayleigh`.
    """
    ndof = cfg.n_dofs
    ell = cfg.length / cfg.n_elements
    ke, me = beam_element(cfg.youngs_modulus, cfg.second_moment_area,
                          cfg.density, cfg.cross_section_area, ell)
    K = np.zeros((ndof, ndof))
    M = np.zeros((ndof, ndof))
    for e in range(cfg.n_elements):
        idx = np.arange(2 * e, 2 * e + 4)
        K[np.ix_(idx, idx)] += ke
        M[np.ix_(idx, idx)] += me
    free = [d for d in range(ndof) if d not in set(cfg.fixed_dofs)]
    if not free:
        raise ValueError("no free DOFs left after applying constraints")
    K = K[np.ix_(free, free)]
    M = M[np.ix_(free, free)]
    F = np.zeros((len(free), len(cfg.io_dofs)))
    for col, d in enumerate(cfg.io_dofs):
        F[free.index(d), col] = 1.0
    return SecondOrderModel(M, np.zeros_like(M), K, F, tuple(free))


def rayleigh(M: NDArray, K: NDArray, alpha: float = RAYLEIGH_ALPHA,
             beta: float = RAYLEIGH_BETA) -> NDArray:
    """Proportional damping ``alpha M + beta K``.

    Gives modal damping ratios ``0.5 (alpha / w_k + beta w_k)``.
    """
    return alpha * np.asarray(M) + beta * np.asarray(K)


def natural_frequencies(model: SecondOrderModel) -> NDArray:
    """Undamped angular eigenfrequencies in rad/s, ascending."""
    lam = sla.eigh(model.K, model.M, eigvals_only=True)
    return np.sqrt(np.clip(lam, 0.0, None))


def to_statespace(model: SecondOrderModel) -> StateSpace:
    """First-order form with state ``[q; q']`` and velocity output."""
    m = model.M.shape[0]
    q = model.F.shape[1]
    Minv_K = np.linalg.solve(model.M, model.K)
    Minv_D = np.linalg.solve(model.M, model.Dd)
    Minv_F = np.linalg.solve(model.M, model.F)
    A = np.block([[np.zeros((m, m)), np.eye(m)], [-Minv_K, -Minv_D]])
    B = np.vstack([np.zeros((m, q)), Minv_F])
    C = np.hstack([np.zeros((q, m)), model.F.T])
    return StateSpace(A, B, C, np.zeros((q, q)))


def damper_coupling(pairs: Sequence[tuple[int, int, float]], p_b: int) -> NDArray:
    """Coupling matrix of dampers acting on relative channel velocities."""
    S = np.zeros((p_b, p_b))
    for i, j, c in pairs:
        S[i, i] += c
        S[j, j] += c
        S[i, j] -= c
        S[j, i] -= c
    return S


def build_beam(cfg: BeamConfig, alpha: float = RAYLEIGH_ALPHA,
               beta: float = RAYLEIGH_BETA) -> StateSpace:
    model = assemble_beam(cfg)
    return to_statespace(model.with_damping(rayleigh(model.M, model.K, alpha, beta)))


def build_two_beam_benchmark(beam1: BeamConfig = BEAM_1, beam2: BeamConfig = BEAM_2,
                             c_trans: float = TRANSLATIONAL_DAMPING,
                             c_rot: float = ROTATIONAL_DAMPING):
    """Subsystems and topology of the two-beam benchmark.

    Channels of the parallel composition are ordered
    ``(beam1 w, beam1 theta, beam2 w_left, beam2 theta_left, beam2 w_right)``.

    Returns
    -------
    subsystems : list of StateSpace
    topology : InterconnectionTopology
    """
    from .interconnection import InterconnectionTopology

    subs = [build_beam(beam1), build_beam(beam2)]
    p_b = sum(s.p for s in subs)
    S = damper_coupling([(0, 2, c_trans), (1, 3, c_rot)], p_b)
    Bcal = np.zeros((p_b, 1))
    Bcal[p_b - 1, 0] = 1.0
    return subs, InterconnectionTopology(S, Bcal)
