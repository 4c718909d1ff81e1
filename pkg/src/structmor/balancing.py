"""Balancing transformation, truncation and single-system balanced truncation.

Given an input Gramian ``X_i`` and an output Gramian ``X_o``, the balancing
transformation ``T`` makes ``T X_i T^T = T^-T X_o T^-1 = diag(gamma)``.
Three pairings are provided: Lyapunov ``(P, Q)``, positive-real
``(Pi_min, Xi_min)`` and mixed ``(P, Xi_min)`` / ``(Pi_min, Q)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .lti import DimensionError, StateSpace, model_to_dict, validate
from .lyapunov import controllability_gramian, observability_gramian
from .passivity import (PassivityCertificate, is_passive, min_available_storage,
                        min_required_supply)

__all__ = [
    "BalancingError",
    "ClampWarning",
    "TieWarning",
    "BalancedRealization",
    "ReductionResult",
    "balancing_transform",
    "balance",
    "truncate",
    "reduce_lyap_bt",
    "reduce_pr_bt",
    "reduce_mg_bt",
]

SPD_RTOL = 1e-12
TIE_RTOL = 1e-9


class BalancingError(ValueError):
    """Gramians unsuitable for balancing (not SPD, or a near-zero gamma)."""


class ClampWarning(UserWarning):
    """A Gramian spectrum was clamped before factorization."""

    def __init__(self, msg: str, which: str = "", ratio: float = 0.0):
        super().__init__(msg)
        self.which = which
        self.ratio = ratio


class TieWarning(UserWarning):
    """Truncation between two (nearly) equal gamma values."""

    def __init__(self, msg: str, r: int = 0, gap: float = 0.0):
        super().__init__(msg)
        self.r = r
        self.gap = gap


@dataclass(frozen=True)
class BalancedRealization:
    sys: StateSpace
    T: NDArray[np.float64]
    T_inv: NDArray[np.float64]
    gamma: NDArray[np.float64]


@dataclass
class ReductionResult:
    reduced: StateSpace
    kept_order: int
    discarded_gamma: NDArray[np.float64]
    method: str
    gamma: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    certificate: PassivityCertificate | None = None

    def to_dict(self) -> dict:
        data = model_to_dict(self.reduced)
        data.update(method=self.method, kept_order=self.kept_order,
                    gamma=self.gamma.tolist(),
                    discarded_gamma=self.discarded_gamma.tolist())
        if self.certificate is not None:
            data["certificate"] = self.certificate.to_dict()
        return data


def _checked_spd(X: ArrayLike, which: str, clamp: bool) -> NDArray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError(f"{which} must be square, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise BalancingError(f"{which} has non-finite entries")
    X = 0.5 * (X + X.T)
    w, U = np.linalg.eigh(X)
    top = w[-1]
    if top <= 0:
        raise BalancingError(f"{which} is not positive definite (largest eigenvalue {top:.3e})")
    floor = SPD_RTOL * top
    if w[0] > floor:
        return X
    if not clamp:
        raise BalancingError(
            f"{which} is not numerically positive definite "
            f"(lambda_min / lambda_max = {w[0] / top:.3e}); "
            "truncate the model to a minimal realization first")
    warnings.warn(ClampWarning(
        f"{which}: eigenvalues clamped at {SPD_RTOL:g} * lambda_max "
        f"(lambda_min / lambda_max = {w[0] / top:.3e})", which, w[0] / top),
        stacklevel=3)
    w = np.maximum(w, floor)
    return (U * w) @ U.T


def balancing_transform(X_i: ArrayLike, X_o: ArrayLike,
                        clamp: bool = False) -> tuple[NDArray, NDArray, NDArray]:
    """Square-root balancing of an input/output Gramian pair.

    With ``X_i = R_i^T R_i`` and ``X_o = R_o^T R_o`` (Cholesky) and the SVD
    ``R_o R_i^T = U diag(gamma) V^T``::

        T     = diag(gamma)^-1/2 U^T R_o
        T^-1  = R_i^T V diag(gamma)^-1/2

    Each column of ``U`` is signed so that its largest-magnitude entry is
    positive (``V`` follows), which makes ``T`` reproducible.

    Parameters
    ----------
    clamp : bool
        Lift eigenvalues below ``1e-12 * lambda_max`` instead of raising,
        with a :class:`ClampWarning`.

    Returns
    -------
    T, T_inv, gamma
    """
    X_i = _checked_spd(X_i, "X_i", clamp)
    X_o = _checked_spd(X_o, "X_o", clamp)
    if X_i.shape != X_o.shape:
        raise DimensionError(f"Gramian shapes differ: {X_i.shape} vs {X_o.shape}")
    n = X_i.shape[0]
    if n == 0:
        return np.zeros((0, 0)), np.zeros((0, 0)), np.zeros(0)
    R_i = np.linalg.cholesky(X_i).T
    R_o = np.linalg.cholesky(X_o).T
    U, gamma, Vt = np.linalg.svd(R_o @ R_i.T)
    V = Vt.T
    lead = np.argmax(np.abs(U), axis=0)
    signs = np.where(U[lead, np.arange(n)] < 0, -1.0, 1.0)
    U = U * signs
    V = V * signs
    if gamma[-1] <= SPD_RTOL * gamma[0]:
        raise BalancingError(
            f"smallest gamma {gamma[-1]:.3e} is below {SPD_RTOL:g} * gamma_1; "
            "the realization has a near-nonminimal direction")
    scale = 1.0 / np.sqrt(gamma)
    T = scale[:, None] * (U.T @ R_o)
    T_inv = (R_i.T @ V) * scale
    return T, T_inv, gamma


def balance(sys: StateSpace, X_i: ArrayLike, X_o: ArrayLike,
            clamp: bool = False) -> BalancedRealization:
    """Transform ``sys`` to coordinates balancing ``(X_i, X_o)``."""
    if np.shape(X_i) != (sys.n, sys.n):
        raise DimensionError(f"Gramians must be {sys.n}x{sys.n}, got {np.shape(X_i)}")
    T, T_inv, gamma = balancing_transform(X_i, X_o, clamp)
    bal = StateSpace(T @ sys.A @ T_inv, T @ sys.B, sys.C @ T_inv, sys.D)
    return BalancedRealization(bal, T, T_inv, gamma)


def truncate(bal: BalancedRealization, r: int, method: str = "LyapBT") -> ReductionResult:
    """Keep the leading ``r`` balanced states; ``D`` is unchanged.

    Warns with :class:`TieWarning` when ``gamma_r`` and ``gamma_{r+1}`` are
    equal to within ``1e-9 * gamma_1``.
    """
    n = bal.sys.n
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= n:
        raise ValueError(f"order r must be an integer in 1..{n}, got {r!r}")
    g = bal.gamma
    if r < n and g[r - 1] - g[r] <= TIE_RTOL * g[0]:
        warnings.warn(TieWarning(
            f"truncating at a tie: gamma_{r} = {g[r - 1]:.6g}, "
            f"gamma_{r + 1} = {g[r]:.6g}; stability of the reduced model is "
            "not guaranteed", r, g[r - 1] - g[r]), stacklevel=2)
    A, B, C, D = bal.sys
    reduced = StateSpace(A[:r, :r], B[:r], C[:, :r], D)
    return ReductionResult(reduced, r, g[r:].copy(), method, g.copy())


def _require_minimal_stable(sys: StateSpace) -> None:
    rep = validate(sys)
    if not rep.stable:
        raise BalancingError(
            f"model is not asymptotically stable (spectral abscissa {rep.spectral_abscissa:.3e})")
    if not rep.minimal:
        raise BalancingError(
            f"model is not minimal (controllability rank {rep.controllable_rank}, "
            f"observability rank {rep.observable_rank}, n = {sys.n})")


def _finish(sys, X_i, X_o, r, method, clamp, certify) -> ReductionResult:
    res = truncate(balance(sys, X_i, X_o, clamp), r, method)
    if certify:
        res.certificate = is_passive(res.reduced, check_minimal=False)
    return res


def reduce_lyap_bt(sys: StateSpace, r: int, certify: bool = False) -> ReductionResult:
    """Lyapunov balanced truncation with ``(P, Q)``."""
    _require_minimal_stable(sys)
    P = controllability_gramian(sys).X
    Q = observability_gramian(sys).X
    return _finish(sys, P, Q, r, "LyapBT", False, certify)


def reduce_pr_bt(sys: StateSpace, r: int, minimal: bool = True,
                 certify: bool = False) -> ReductionResult:
    """Positive-real balanced truncation with ``(Pi_min, Xi_min)``."""
    _require_minimal_stable(sys)
    Xi = min_available_storage(sys, minimal=minimal, check_minimal=False).X
    Pi = min_required_supply(sys, check_minimal=False).X
    return _finish(sys, Pi, Xi, r, "PRBT", True, certify)


def reduce_mg_bt(sys: StateSpace, r: int, variant: str = "PXi",
                 minimal: bool = True, certify: bool = False) -> ReductionResult:
    """Mixed-Gramian balanced truncation.

    ``variant="PXi"`` balances ``(P, Xi_min)``, ``variant="PiQ"`` balances
    ``(Pi_min, Q)``.
    """
    _require_minimal_stable(sys)
    if variant == "PXi":
        X_i = controllability_gramian(sys).X
        X_o = min_available_storage(sys, minimal=minimal, check_minimal=False).X
    elif variant == "PiQ":
        X_i = min_required_supply(sys, check_minimal=False).X
        X_o = observability_gramian(sys).X
    else:
        raise ValueError(f"unknown MGBT variant {variant!r}; use 'PXi' or 'PiQ'")
    return _finish(sys, X_i, X_o, r, "MGBT", True, certify)
