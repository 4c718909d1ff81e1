"""Positive-real lemma: passivity certificates and extremal storage matrices.

A square system is passive when some ``Xi = Xi^T > 0`` makes::

    [[A^T Xi + Xi A,  Xi B - C^T  ],
     [B^T Xi - C,    -(D + D^T)   ]]  <= 0.

The Loewner-minimal solution (available storage) is computed by trace
minimization with the interior-point solver in :mod:`structmor.sdp`. The
required supply is the available storage of the dual system.

Mechanical models with collocated velocity outputs have ``D = 0`` and a
zero DC gain, so the LMI has no strictly feasible point. Such implicit
equalities come from the imaginary-axis zeros of the Popov function
``Phi(s) = G(s) + G(-s)^T``: if ``Phi(j w) v = 0`` then the LMI block
annihilates ``[(j w I - A)^-1 B v; v]`` for every feasible ``Xi``. Those
equalities are eliminated before the interior-point solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

from .lti import DimensionError, StateSpace, dual, similarity_transform, validate
from .lyapunov import Gramian, GramianKind, NotHurwitzError, observability_gramian
from .sdp import BlockSDP, SDPResult, solve_sdp

__all__ = [
    "LmiBlock",
    "PassivityCertificate",
    "NotPassiveError",
    "NonMinimalError",
    "lmi_block",
    "lmi_residual",
    "feasibility_tolerance",
    "is_positive_definite",
    "check_storage",
    "popov_kernel",
    "is_passive",
    "min_available_storage",
    "min_required_supply",
    "max_available_storage",
    "riccati_storage",
    "riccati_trend",
]

log = logging.getLogger(__name__)

LMI_RTOL = 1e-7
PD_RTOL = 1e-12
RICCATI_EPSILONS = (1e-4, 1e-6, 1e-8)


class NotPassiveError(ValueError):
    """No storage matrix satisfies the positive-real LMI."""

    def __init__(self, msg: str, best_residual: float = np.inf):
        super().__init__(msg)
        self.best_residual = best_residual


class NonMinimalError(ValueError):
    """The system is not minimal, so the positive-real lemma does not apply."""


@dataclass(frozen=True)
class LmiBlock:
    M: NDArray[np.float64]
    n: int
    p: int


@dataclass
class PassivityCertificate:
    feasible: bool
    Xi: Gramian | None
    max_eig_residual: float
    method: str = "SDP"
    message: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "Xi": None if self.Xi is None else self.Xi.X.tolist(),
            "residual": self.max_eig_residual,
            "method": self.method,
            "message": self.message,
        }


def _check_square(sys: StateSpace) -> None:
    if not sys.is_square:
        raise DimensionError(
            f"passivity needs a square system, got {sys.p} inputs and "
            f"{sys.p_out} outputs")


def lmi_block(sys: StateSpace, Xi: NDArray) -> LmiBlock:
    _check_square(sys)
    Xi = np.asarray(Xi, dtype=float)
    if Xi.shape != (sys.n, sys.n):
        raise DimensionError(f"Xi must be {sys.n}x{sys.n}, got {Xi.shape}")
    A, B, C, D = sys
    off = Xi @ B - C.T
    M = np.block([[A.T @ Xi + Xi @ A, off], [off.T, -(D + D.T)]])
    return LmiBlock(0.5 * (M + M.T), sys.n, sys.p)


def lmi_residual(sys: StateSpace, Xi: NDArray) -> tuple[LmiBlock, float]:
    """LMI block at ``Xi`` and its largest eigenvalue (<= 0 means feasible)."""
    blk = lmi_block(sys, Xi)
    return blk, float(np.linalg.eigvalsh(blk.M)[-1])


def feasibility_tolerance(Xi: NDArray) -> float:
    return LMI_RTOL * (1.0 + np.linalg.norm(Xi, "fro"))


def is_positive_definite(X: NDArray, rtol: float = PD_RTOL) -> bool:
    """Positive definiteness measured after equilibrating the diagonal.

    State units can spread the spectrum of a storage matrix over many
    decades (stiffness against rotary inertia), so ``X`` is first scaled to
    unit diagonal by a diagonal congruence.
    """
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return True
    d = np.diag(X)
    if np.any(d <= 0):
        return False
    s = 1.0 / np.sqrt(d)
    Xs = X * s[:, None] * s[None, :]
    w = np.linalg.eigvalsh(0.5 * (Xs + Xs.T))
    return bool(w[0] >= rtol * w[-1])


def check_storage(sys: StateSpace, Xi: NDArray) -> tuple[bool, float]:
    """Verify that ``Xi`` certifies passivity within the feasibility tolerance."""
    _, lam = lmi_residual(sys, Xi)
    ok = lam <= feasibility_tolerance(Xi) and is_positive_definite(Xi)
    return ok, lam


# ---------------------------------------------------------------------------
# implicit equalities from imaginary-axis zeros of the Popov function


def _near_pole(sys: StateSpace, w: float, rtol: float = 1e-8) -> bool:
    """Whether ``j w`` is numerically a pole of ``sys``."""
    if sys.n == 0:
        return False
    lam = sys.poles()
    scale = max(np.abs(lam).max(), w, 1.0)
    return bool(np.min(np.abs(1j * w - lam)) <= rtol * scale)


def _popov_matrix(sys: StateSpace, w: float) -> NDArray[np.complex128]:
    A, B, C, D = sys
    G = C @ np.linalg.solve(1j * w * np.eye(sys.n) - A, B) + D
    return G + G.conj().T


def _imaginary_zero_candidates(sys: StateSpace) -> list[float]:
    """Nonnegative ``w`` where ``Phi(j w)`` may be singular."""
    A, B, C, D = sys
    n, p = sys.n, sys.p
    cands = [0.0]
    if n == 0:
        return cands
    Aphi = sla.block_diag(A, -A.T)
    Bphi = np.vstack([B, C.T])
    Cphi = np.hstack([C, -B.T])
    Dphi = D + D.T
    Mp = np.block([[Aphi, Bphi], [Cphi, Dphi]])
    Np = sla.block_diag(np.eye(2 * n), np.zeros((p, p)))
    try:
        alpha, beta = sla.eig(Mp, Np, right=False, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, ValueError):
        return cands
    scale = max(np.linalg.norm(A, 2), 1.0)
    finite = np.abs(beta) > 1e-12 * np.abs(alpha)
    lam = alpha[finite] / beta[finite]
    for z in lam:
        if abs(z) < 1e8 * scale and abs(z.real) <= 1e-4 * (abs(z) + 1e-6 * scale):
            w = abs(z.imag)
            if all(abs(w - c) > 1e-8 * (w + 1.0) for c in cands):
                cands.append(w)
    return cands


def popov_kernel(sys: StateSpace, rtol: float = 1e-9) -> list[tuple[float, NDArray]]:
    """Imaginary-axis zeros of ``Phi`` with their kernels.

    Returns pairs ``(w, W)`` where the columns of ``W`` span the kernel of
    ``Phi(j w)``; ``w = inf`` stands for the kernel of ``D + D^T``.
    """
    A, B, C, D = sys
    out: list[tuple[float, NDArray]] = []
    R = D + D.T
    if sys.p:
        ev, V = np.linalg.eigh(R)
        Rscale = max(np.linalg.norm(C, 2) * np.linalg.norm(B, 2), np.abs(ev).max(), 1e-300)
        ker = V[:, np.abs(ev) <= rtol * Rscale]
        if ker.shape[1]:
            out.append((np.inf, ker.astype(complex)))
    for w in _imaginary_zero_candidates(sys):
        if _near_pole(sys, w):
            continue
        M = 1j * w * np.eye(sys.n) - A
        X = np.linalg.solve(M, B) if sys.n else np.zeros((0, sys.p))
        scale = 2 * np.linalg.norm(C, 2) * np.linalg.norm(X, 2) + np.linalg.norm(R, 2)
        if scale == 0:
            continue
        Phi = C @ X + D
        Phi = Phi + Phi.conj().T
        ev, V = np.linalg.eigh(Phi)
        ker = V[:, np.abs(ev) <= rtol * scale]
        if ker.shape[1]:
            out.append((w, ker))
    return out


def _face_vectors(sys: StateSpace, kernel: list[tuple[float, NDArray]]) -> NDArray:
    """Real orthonormal basis of the directions the LMI block must annihilate."""
    n, p = sys.n, sys.p
    cols = []
    for w, K in kernel:
        if np.isinf(w):
            top = np.zeros((n, K.shape[1]), dtype=complex)
        else:
            top = np.linalg.solve(1j * w * np.eye(n) - sys.A, sys.B @ K)
        v = np.vstack([top, K])
        cols.append(v.real)
        if w not in (0.0,) and not np.isinf(w):
            cols.append(v.imag)
    if not cols:
        return np.zeros((n + p, 0))
    V = np.hstack(cols)
    U, s, _ = np.linalg.svd(V, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((n + p, 0))
    return U[:, s > 1e-10 * s[0]]


# ---------------------------------------------------------------------------
# interior-point computation of the minimal storage


def _svec_basis(n: int) -> NDArray:
    iu = np.triu_indices(n)
    E = np.zeros((iu[0].size, n, n))
    k = np.arange(iu[0].size)
    diag = iu[0] == iu[1]
    E[k, iu[0], iu[1]] = np.where(diag, 1.0, np.sqrt(0.5))
    E[k, iu[1], iu[0]] = np.where(diag, 1.0, np.sqrt(0.5))
    return E


@dataclass
class _StageResult:
    Xi: NDArray
    sdp: SDPResult | None
    eq_residual: float


def _lmi_linear(A, B, E):
    """Linear part of the LMI block for a stack of symmetric ``E``."""
    AE = np.matmul(A.T, E)
    top_left = AE + np.swapaxes(AE, 1, 2)
    EB = np.matmul(E, B)
    m, n = E.shape[0], A.shape[0]
    p = B.shape[1]
    out = np.zeros((m, n + p, n + p))
    out[:, :n, :n] = top_left
    out[:, :n, n:] = EB
    out[:, n:, :n] = np.swapaxes(EB, 1, 2)
    return out


def _time_scaled(sys: StateSpace, kernel):
    """Rescale time so that ``||A|| = 1``.

    ``t -> w0 t`` is a congruence of the LMI and leaves ``Xi`` unchanged.
    """
    w0 = max(np.linalg.norm(sys.A, 2), 1e-300) if sys.n else 1.0
    A, B, C, D = sys
    scaled = StateSpace(A / w0, B / np.sqrt(w0), C / np.sqrt(w0), D)
    return scaled, [(w / w0, K) for w, K in kernel]


def _equalities(sys: StateSpace, kernel, E: NDArray):
    """Linear system ``L z = rhs`` for ``M(sum z_k E_k) V = 0``."""
    A, B, C, D = sys
    n, p = sys.n, sys.p
    V = _face_vectors(sys, kernel)
    const = np.block([[np.zeros((n, n)), -C.T], [-C, -(D + D.T)]])
    lin = _lmi_linear(A, B, E)
    L = np.einsum("mij,jk->ikm", lin, V).reshape(-1, E.shape[0])
    rhs = -(const @ V).ravel()
    return V, const, lin, L, rhs


def _solve_equalities(L: NDArray, rhs: NDArray) -> tuple[NDArray, float]:
    z0, *_ = np.linalg.lstsq(L, rhs, rcond=None)
    res = np.linalg.norm(L @ z0 - rhs) / max(np.linalg.norm(rhs), 1e-300)
    return z0, res


def _consistent_kernel(sys: StateSpace, kernel):
    """Drop candidate zeros whose equalities contradict the others.

    Rounding splits the multiple zero at the origin of mechanical models
    into spurious nearby candidates. A genuine zero of a passive model
    always yields consistent equalities, so finite nonzero candidates are
    admitted one at a time and kept only if consistency survives.
    """
    if sys.n == 0:
        return kernel
    sc, sk = _time_scaled(sys, kernel)
    E = _svec_basis(sys.n)
    fixed = [k for k, (w, _) in enumerate(sk) if w == 0.0 or np.isinf(w)]
    kept = list(fixed)
    for k in range(len(sk)):
        if k in fixed:
            continue
        trial = sorted(kept + [k])
        *_, L, rhs = _equalities(sc, [sk[i] for i in trial], E)
        if _solve_equalities(L, rhs)[1] <= 1e-8:
            kept = trial
        else:
            log.debug("discarding spurious Popov zero at w = %.6g", kernel[k][0])
    return [kernel[i] for i in sorted(kept)]


def _storage_stage(sys: StateSpace, kernel, objective: str, tol: float) -> _StageResult:
    """One SDP solve in the current coordinates.

    ``objective`` is ``"trace"`` (minimal storage) or ``"margin"``, which
    adds a variable ``t`` with ``Xi >= t I`` and maximizes it.
    """
    sys, kernel = _time_scaled(sys, kernel)
    A, B, C, D = sys
    n, p = sys.n, sys.p
    E = _svec_basis(n)
    V, const, lin, L, rhs = _equalities(sys, kernel, E)

    # equalities  M(Xi) V = 0
    if V.shape[1]:
        z0, eq_res = _solve_equalities(L, rhs)
        U, s, Vt = np.linalg.svd(L)
        rank = int(np.sum(s > 1e-9 * s[0])) if s.size and s[0] > 0 else 0
        null = Vt[rank:].T
        W = sla.null_space(V.T)
    else:
        z0 = np.zeros(E.shape[0])
        eq_res = 0.0
        null = np.eye(E.shape[0])
        W = np.eye(n + p)
    Xi0 = np.tensordot(z0, E, axes=1)
    if eq_res > 1e-8:
        return _StageResult(Xi0, None, eq_res)
    basis = np.tensordot(null.T, E, axes=1).reshape(-1, n, n)
    m = basis.shape[0]
    M0 = W.T @ (np.einsum("m,mij->ij", z0, lin) + const) @ W
    Mi = np.matmul(np.matmul(W.T, _lmi_linear(A, B, basis)), W) if m else \
        np.zeros((0, W.shape[1], W.shape[1]))
    if m == 0:
        return _StageResult(Xi0, None, eq_res)
    if objective == "margin":
        k = Mi.shape[1]
        prob = BlockSDP(C=[-M0, Xi0],
                        A=[np.concatenate([Mi, np.zeros((1, k, k))]),
                           np.concatenate([-basis, np.eye(n)[None]])],
                        b=np.r_[np.zeros(m), 1.0])
    else:
        prob = BlockSDP(C=[-M0, Xi0], A=[Mi, -basis], b=-np.trace(basis, axis1=1, axis2=2))
    res = solve_sdp(prob, tol=tol)
    Xi = Xi0 + np.tensordot(res.y[:m], basis, axes=1)
    return _StageResult(0.5 * (Xi + Xi.T), res, eq_res)


def _initial_scaling(sys: StateSpace) -> NDArray:
    """State transformation that makes the storage LMI roughly unit-scaled.

    A regularized Riccati solution is close to the answer and is tried
    first; the observability Gramian and plain balancing are fallbacks.
    """
    try:
        X = riccati_storage(sys, 1e-6 * max(1.0, np.linalg.norm(sys.D, 2))).X
        w = np.linalg.eigvalsh(X)
        if np.all(np.isfinite(X)) and w[0] > 1e-14 * w[-1]:
            return _sqrt_factor(X)
    except (np.linalg.LinAlgError, ValueError):
        pass
    try:
        Q = observability_gramian(sys).X
        w, U = np.linalg.eigh(Q)
        if w[0] > 1e-14 * w[-1]:
            return (U * np.sqrt(w)).T
    except NotHurwitzError:
        pass
    _, (scale, _) = sla.matrix_balance(sys.A, permute=False, separate=True)
    return np.diag(1.0 / scale)


def _sqrt_factor(X: NDArray) -> NDArray:
    w, U = np.linalg.eigh(0.5 * (X + X.T))
    w = np.maximum(w, 1e-13 * w[-1])
    return (U * np.sqrt(w)).T


def _solve_storage(sys: StateSpace, objective: str = "trace", tol: float = 1e-9,
                   max_stages: int = 4) -> tuple[NDArray, dict]:
    """Trace-minimal storage, refined by re-centring the coordinates.

    Each stage transforms the system with a square-root factor ``T`` of the
    previous estimate (so that estimate becomes the identity), solves the
    SDP there and maps back with ``Xi = T^T Xi_t T``. Trace minimization in
    any such coordinates has the same minimizer when a Loewner-minimal
    solution exists.
    """
    kernel = _consistent_kernel(sys, popov_kernel(sys))
    T = _initial_scaling(sys)
    info: dict = {"stages": [], "kernel": [(float(w), K.shape[1]) for w, K in kernel]}
    Xi = None
    for stage in range(max_stages):
        try:
            st = similarity_transform(sys, T)
        except np.linalg.LinAlgError:
            break
        res = _storage_stage(st, kernel, objective, tol)
        Xi_new = T.T @ res.Xi @ T
        Xi_new = 0.5 * (Xi_new + Xi_new.T)
        if res.eq_residual > 1e-8:
            status = "inconsistent"
        else:
            status = res.sdp.status if res.sdp is not None else "fixed"
        change = (np.linalg.norm(Xi_new - Xi) / np.linalg.norm(Xi_new)
                  if Xi is not None else np.inf)
        info["stages"].append({"status": status, "change": change,
                               "iterations": res.sdp.iterations if res.sdp else 0})
        log.debug("storage stage %d: %s, change %.3e", stage, status, change)
        Xi = Xi_new
        if status in ("inconsistent", "fixed"):
            break
        if status in ("optimal", "near_optimal") and stage > 0 and change < 1e-6:
            break
        T = _sqrt_factor(Xi)
    info["status"] = info["stages"][-1]["status"] if info["stages"] else "failed"
    return Xi, info


def _prechecks(sys: StateSpace) -> str | None:
    """Cheap necessary conditions; returns a reason when one fails."""
    R = sys.D + sys.D.T
    if sys.p and np.linalg.eigvalsh(R)[0] < -1e-10 * max(np.linalg.norm(R, 2), 1.0):
        return "D + D^T is not positive semidefinite"
    if sys.n:
        eigs = sys.poles()
        if np.max(eigs.real) > 1e-9 * max(np.linalg.norm(sys.A, 2), 1.0):
            return f"unstable eigenvalue {eigs[np.argmax(eigs.real)]:.6g}"
    if sys.n:
        mag = np.abs(sys.poles())
        lo, hi = 0.01 * max(mag.min(), 1e-300), 100.0 * max(mag.max(), 1e-300)
        grid = np.concatenate([[0.0], np.geomspace(lo, hi, 80)])
    else:
        grid = np.zeros(1)
    for w in grid:
        if _near_pole(sys, w):
            continue
        if sys.n:
            X = np.linalg.solve(1j * w * np.eye(sys.n) - sys.A, sys.B)
            G = sys.C @ X + sys.D
            terms = np.linalg.norm(sys.C, 2) * np.linalg.norm(X, 2)
        else:
            G, terms = sys.D.astype(complex), 0.0
        lam = np.linalg.eigvalsh(G + G.conj().T)
        # relative to the terms before cancellation: lossless models have
        # G(jw) + G(jw)^* at rounding level
        scale = max(2 * (terms + np.linalg.norm(sys.D, 2)), 1e-300)
        if lam[0] < -1e-8 * scale:
            return f"G(jw) + G(jw)^* is indefinite at w = {w:.4g} rad/s"
    return None


def _require_minimal(sys: StateSpace) -> None:
    rep = validate(sys)
    if not rep.minimal:
        raise NonMinimalError(
            f"system is not minimal (controllability rank {rep.controllable_rank}, "
            f"observability rank {rep.observable_rank}, n = {sys.n})")


def is_passive(sys: StateSpace, check_minimal: bool = True) -> PassivityCertificate:
    """Search for a storage matrix certifying passivity.

    Raises
    ------
    NonMinimalError
        If ``sys`` is not minimal and ``check_minimal`` is set.
    """
    _check_square(sys)
    if check_minimal:
        _require_minimal(sys)
    reason = _prechecks(sys)
    if reason is not None:
        return PassivityCertificate(False, None, np.inf, "SDP", reason)
    if sys.n == 0:
        return PassivityCertificate(True, Gramian(np.zeros((0, 0)), GramianKind.AVAILABLE_STORAGE),
                                    float(np.linalg.eigvalsh(-(sys.D + sys.D.T))[-1]), "SDP")
    Xi, info = _solve_storage(sys)
    ok, lam = check_storage(sys, Xi)
    if not ok and lam <= feasibility_tolerance(Xi):
        # a (nearly) non-minimal realization has a (nearly) singular minimal
        # storage; the most interior storage certifies just as well
        Xi_c, info_c = _solve_storage(sys, objective="margin", max_stages=2)
        ok_c, lam_c = check_storage(sys, Xi_c)
        info["interior"] = info_c
        if ok_c:
            Xi, ok, lam = Xi_c, ok_c, lam_c
    msg = "" if ok else f"no certifying storage found (solver status {info['status']})"
    return PassivityCertificate(
        ok, Gramian(Xi, GramianKind.AVAILABLE_STORAGE, lam, "sdp") if ok else None,
        lam, "SDP", msg, info)


def min_available_storage(sys: StateSpace, minimal: bool = True,
                          check_minimal: bool = True) -> Gramian:
    """Loewner-minimal solution ``Xi_min`` of the positive-real LMI.

    Parameters
    ----------
    minimal : bool
        When false, return a strictly interior storage matrix instead (the
        midpoint between the minimal and maximal solutions). Passivity
        preservation only needs some feasible storage.

    Raises
    ------
    NotPassiveError
        If no feasible storage exists; carries the best residual achieved.
    """
    _check_square(sys)
    if check_minimal:
        _require_minimal(sys)
    reason = _prechecks(sys)
    if reason is not None:
        raise NotPassiveError(f"system is not passive: {reason}")
    Xi, info = _solve_storage(sys)
    ok, lam = check_storage(sys, Xi)
    if not ok:
        raise NotPassiveError(
            f"system is not passive: best LMI residual {lam:.3e} "
            f"(solver status {info['status']})", lam)
    if not minimal:
        Pi = min_required_supply(sys, check_minimal=False).X
        Xi = 0.5 * (Xi + np.linalg.inv(Pi))
        _, lam = lmi_residual(sys, Xi)
        return Gramian(Xi, GramianKind.AVAILABLE_STORAGE, lam, "sdp-midpoint")
    return Gramian(Xi, GramianKind.AVAILABLE_STORAGE, lam, "sdp")


def min_required_supply(sys: StateSpace, check_minimal: bool = True) -> Gramian:
    """``Pi_min`` of the dual LMI, as ``Xi_min`` of the dual system."""
    G = min_available_storage(dual(sys), check_minimal=check_minimal)
    return Gramian(G.X, GramianKind.REQUIRED_SUPPLY, G.residual, G.source)


def max_available_storage(sys: StateSpace, check_minimal: bool = True) -> Gramian:
    """``Xi_max = Pi_min^-1``."""
    Pi = min_required_supply(sys, check_minimal=check_minimal).X
    Xi = np.linalg.inv(Pi)
    _, lam = lmi_residual(sys, Xi)
    return Gramian(Xi, GramianKind.AVAILABLE_STORAGE, lam, "inverse-supply")


# ---------------------------------------------------------------------------
# regularized Riccati engine


def riccati_storage(sys: StateSpace, eps: float = 0.0) -> Gramian:
    """Stabilizing solution of the positive-real Riccati equation.

    Solves ``A^T X + X A + (X B - C^T) R^-1 (B^T X - C) = 0`` with
    ``R = D + D^T + 2 eps I`` and ``A - B R^-1 (C - B^T X)`` Hurwitz, which
    is the minimal storage of the model with feedthrough ``D + eps I``.
    Singular ``D + D^T`` needs ``eps > 0``.
    """
    _check_square(sys)
    A, B, C, D = sys
    R = D + D.T + 2.0 * eps * np.eye(sys.p)
    if np.linalg.eigvalsh(R)[0] <= 0:
        raise np.linalg.LinAlgError(
            "D + D^T + 2 eps I must be positive definite; increase eps")
    # with X = -Y this is the standard form A^T Y + Y A - (Y B + S) R^-1 (...)^T = 0
    Y = sla.solve_continuous_are(A, B, np.zeros_like(A), R, s=C.T)
    Xi = -0.5 * (Y + Y.T)
    _, lam = lmi_residual(StateSpace(A, B, C, D + eps * np.eye(sys.p)), Xi)
    return Gramian(Xi, GramianKind.AVAILABLE_STORAGE, lam, f"riccati(eps={eps:g})")


def riccati_trend(sys: StateSpace, epsilons=RICCATI_EPSILONS,
                  reference: NDArray | None = None) -> list[dict]:
    """Regularized Riccati solutions for decreasing ``eps``.

    Each entry holds ``eps``, the solution and, when ``reference`` is given,
    its relative Frobenius distance to it.
    """
    out = []
    for eps in epsilons:
        G = riccati_storage(sys, eps)
        row = {"eps": eps, "Xi": G.X}
        if reference is not None:
            row["rel_diff"] = float(np.linalg.norm(G.X - reference) / np.linalg.norm(reference))
        out.append(row)
    return out
