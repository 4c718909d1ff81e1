"""Small dense primal-dual interior-point solver for block-diagonal SDPs.

Solves the pair::

    (P)  min  <C, X>   s.t.  <A_i, X> = b_i,  X >= 0
    (D)  max  b^T y    s.t.  S = C - sum_i y_i A_i >= 0

with an infeasible-start path-following method (HKM search direction,
Mehrotra predictor-corrector). Matrices are block diagonal; every block is
stored densely. Intended for the single-LMI problems of this package, with
a few hundred variables at most.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

__all__ = ["BlockSDP", "SDPResult", "solve_sdp"]

log = logging.getLogger(__name__)


@dataclass
class BlockSDP:
    """Problem data.

    ``C[k]`` is the constant of block ``k`` and ``A[k]`` an array of shape
    ``(m, n_k, n_k)`` holding the coefficient of every variable in that block.
    """

    C: list[NDArray]
    A: list[NDArray]
    b: NDArray

    @property
    def m(self) -> int:
        return self.b.size

    @property
    def sizes(self) -> list[int]:
        return [c.shape[0] for c in self.C]

    def slack(self, y: NDArray) -> list[NDArray]:
        return [C - np.tensordot(y, A, axes=1) for C, A in zip(self.C, self.A)]

    def adjoint(self, X: list[NDArray]) -> NDArray:
        """``(<A_i, X>)_i``."""
        out = np.zeros(self.m)
        for A, Xk in zip(self.A, X):
            out += np.einsum("ijk,jk->i", A, Xk)
        return out


@dataclass
class SDPResult:
    y: NDArray
    X: list[NDArray]
    S: list[NDArray]
    status: str
    iterations: int
    primal_objective: float
    dual_objective: float
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    history: list[dict] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "optimal"


def _inner(X: list[NDArray], Y: list[NDArray]) -> float:
    return float(sum(np.vdot(a, b) for a, b in zip(X, Y)))


def _sym(M: NDArray) -> NDArray:
    return 0.5 * (M + M.T)


def _syrk(F: NDArray, M: NDArray) -> NDArray:
    """``M + F F^T`` (upper triangle only)."""
    return sla.blas.dsyrk(1.0, F, beta=1.0, c=M, overwrite_c=True)


def _max_step(X: NDArray, dX: NDArray) -> float:
    """Largest ``a`` with ``X + a dX >= 0`` (``inf`` if unbounded)."""
    L = np.linalg.cholesky(X)
    Li_dX = sla.solve_triangular(L, dX, lower=True)
    W = sla.solve_triangular(L, Li_dX.T, lower=True)
    lam = np.linalg.eigvalsh(_sym(W))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def solve_sdp(prob: BlockSDP, y0: NDArray | None = None, tol: float = 1e-9,
              max_iter: int = 100, step_fraction: float = 0.98,
              divergence: float = 1e12) -> SDPResult:
    """Run the interior-point iteration.

    Parameters
    ----------
    prob : BlockSDP
    y0 : array, optional
        Starting dual point; need not be feasible.
    tol : float
        Relative tolerance on the duality gap and both residuals.
    divergence : float
        Iterates whose norm exceeds this multiple of the data norm signal an
        infeasible dual (status ``"infeasible"``).

    Returns
    -------
    SDPResult
        ``status`` is one of ``"optimal"``, ``"infeasible"``,
        ``"near_optimal"``, ``"max_iter"`` or ``"stalled"``. Unless the
        run diverged, the returned point is the best iterate seen, which
        matters when rounding errors break down the final iterations.
    """
    m = prob.m
    b = prob.b
    sizes = prob.sizes
    n_total = sum(sizes)
    normC = np.sqrt(sum(np.linalg.norm(c) ** 2 for c in prob.C))
    normA = max((np.linalg.norm(A) for A in prob.A), default=1.0)
    normb = np.linalg.norm(b)
    scale = 1.0 + max(normC, normb, normA)

    y = np.zeros(m) if y0 is None else np.array(y0, dtype=float)
    X = [scale * np.eye(k) for k in sizes]
    S = [scale * np.eye(k) for k in sizes]
    history: list[dict] = []
    status = "max_iter"
    it = 0
    best = (np.inf, y, X, S, None)

    for it in range(1, max_iter + 1):
        Sy = prob.slack(y)
        Rd = [Sy_k - S_k for Sy_k, S_k in zip(Sy, S)]
        rp = b - prob.adjoint(X)
        pobj = _inner(prob.C, X)
        dobj = float(b @ y)
        mu = _inner(X, S) / n_total
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / (1.0 + normb)
        dinf = np.sqrt(sum(np.linalg.norm(r) ** 2 for r in Rd)) / (1.0 + normC)
        history.append(dict(it=it, pobj=pobj, dobj=dobj, gap=gap, pinf=pinf,
                            dinf=dinf, mu=mu))
        log.debug("sdp it=%d pobj=%.9e dobj=%.9e gap=%.2e pinf=%.2e dinf=%.2e",
                  it, pobj, dobj, gap, pinf, dinf)
        merit = max(gap, pinf, dinf)
        if merit < best[0]:
            best = (merit, y, X, S, len(history) - 1)
        if merit < tol:
            status = "optimal"
            break
        if best[0] < np.sqrt(tol) and merit > 1e3 * best[0]:
            status = "stalled"
            break
        size = max(np.linalg.norm(y), max(np.linalg.norm(x) for x in X))
        if size > divergence * scale:
            status = "infeasible"
            break

        try:
            Sinv = [sla.cho_solve(sla.cho_factor(s), np.eye(s.shape[0])) for s in S]
            # Schur complement M_ij = sum_k tr(A_i X A_j S^-1) = F F^T with
            # F_i = L^T A_i R for X = L L^T, S^-1 = R R^T
            M = np.zeros((m, m), order="F")
            for A, Xk, Sk in zip(prob.A, X, S):
                nk = Xk.shape[0]
                L = np.linalg.cholesky(Xk)
                R = sla.solve_triangular(np.linalg.cholesky(Sk), np.eye(nk),
                                         lower=True).T
                AR = (A.reshape(m * nk, nk) @ R).reshape(m, nk, nk)
                F = (L.T @ AR.transpose(1, 0, 2).reshape(nk, m * nk)
                     ).reshape(nk, m, nk).transpose(1, 0, 2).reshape(m, -1)
                M = _syrk(F, M)
            M = np.triu(M) + np.triu(M, 1).T
            cho = sla.cho_factor(M + 1e-14 * np.trace(M) / max(m, 1) * np.eye(m))
        except (np.linalg.LinAlgError, ValueError):
            status = "stalled"
            break

        def direction(target: list[NDArray]) -> tuple[NDArray, list, list]:
            # target_k is the desired value of X + dX before the
            # X dS S^-1 correction; solve for dy then back-substitute.
            rhs = rp.copy()
            for A, Xk, Si, Rk, Tk in zip(prob.A, X, Sinv, Rd, target):
                rhs -= np.einsum("ijk,jk->i", A, _sym(Tk - Xk - Xk @ Rk @ Si))
            dy = sla.cho_solve(cho, rhs)
            dS = [Rk - np.tensordot(dy, A, axes=1) for Rk, A in zip(Rd, prob.A)]
            dX = [_sym(Tk - Xk - Xk @ dSk @ Si)
                  for Tk, Xk, Si, dSk in zip(target, X, Sinv, dS)]
            return dy, dX, dS

        # predictor
        dy_a, dX_a, dS_a = direction([np.zeros_like(s) for s in S])
        try:
            ap = min(1.0, min(_max_step(x, d) for x, d in zip(X, dX_a)))
            ad = min(1.0, min(_max_step(s, d) for s, d in zip(S, dS_a)))
        except np.linalg.LinAlgError:
            status = "stalled"
            break
        mu_aff = _inner([x + ap * d for x, d in zip(X, dX_a)],
                        [s + ad * d for s, d in zip(S, dS_a)]) / n_total
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0

        # corrector
        target = [sigma * mu * Si - dXa @ dSa @ Si
                  for Si, dXa, dSa in zip(Sinv, dX_a, dS_a)]
        dy, dX, dS = direction(target)
        try:
            ap = min(1.0, step_fraction * min(_max_step(x, d) for x, d in zip(X, dX)))
            ad = min(1.0, step_fraction * min(_max_step(s, d) for s, d in zip(S, dS)))
        except np.linalg.LinAlgError:
            status = "stalled"
            break
        X = [_sym(x + ap * d) for x, d in zip(X, dX)]
        y = y + ad * dy
        S = [_sym(s + ad * d) for s, d in zip(S, dS)]
        if ap < 1e-10 and ad < 1e-10:
            status = "stalled"
            break

    if status != "infeasible" and best[4] is not None:
        _, y, X, S, k = best
        last = history[k]
        if status != "optimal" and best[0] < np.sqrt(tol):
            status = "near_optimal"
    else:
        last = history[-1] if history else dict(gap=np.inf, pinf=np.inf, dinf=np.inf)
    return SDPResult(
        y=y, X=X, S=prob.slack(y), status=status, iterations=it,
        primal_objective=_inner(prob.C, X), dual_objective=float(b @ y),
        gap=last["gap"], primal_infeasibility=last["pinf"],
        dual_infeasibility=last["dinf"], history=history,
    )
