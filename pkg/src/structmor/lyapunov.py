"""Dense continuous-time Lyapunov solver and Gramians.

The solver reduces ``A`` to real Schur form and back-substitutes over its
1x1 / 2x2 diagonal blocks (Bartels-Stewart).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

from .lti import StateSpace

__all__ = [
    "GramianKind",
    "Gramian",
    "NotHurwitzError",
    "solve_lyapunov",
    "controllability_gramian",
    "observability_gramian",
]


class GramianKind(str, Enum):
    CONTROLLABILITY = "P"
    OBSERVABILITY = "Q"
    REQUIRED_SUPPLY = "Pi"
    AVAILABLE_STORAGE = "Xi"


class NotHurwitzError(np.linalg.LinAlgError):
    """Raised when a Lyapunov equation has no unique stable solution."""

    def __init__(self, msg: str, eigenvalue: complex | None = None):
        super().__init__(msg)
        self.eigenvalue = eigenvalue


@dataclass(frozen=True)
class Gramian:
    """Symmetric Gramian-like matrix with its kind and defining residual.

    ``X`` is symmetrized on construction. ``source`` records which equation
    or solver produced it.
    """

    X: NDArray[np.float64]
    kind: GramianKind
    residual: float = 0.0
    source: str = ""

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=float)
        X = 0.5 * (X + X.T)
        X.flags.writeable = False
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.X)[0]) if self.n else 0.0

    def is_positive_definite(self, rtol: float = 1e-10) -> bool:
        if self.n == 0:
            return True
        w = np.linalg.eigvalsh(self.X)
        return bool(w[0] > rtol * max(abs(w[-1]), np.finfo(float).tiny))


def _schur_blocks(T: NDArray) -> list[slice]:
    n = T.shape[0]
    blocks = []
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            blocks.append(slice(i, i + 2))
            i += 2
        else:
            blocks.append(slice(i, i + 1))
            i += 1
    return blocks


def solve_lyapunov(A: NDArray, W: NDArray, check: bool = True) -> NDArray:
    """Solve ``A X + X A^T + W = 0`` for symmetric ``X``.

    Parameters
    ----------
    A : (n, n) array
        Hurwitz matrix.
    W : (n, n) array
        Symmetric right-hand side.
    check : bool
        Verify that ``A`` is Hurwitz before solving.

    Raises
    ------
    NotHurwitzError
        If ``A`` has an eigenvalue with nonnegative real part, or a small
        Sylvester block in the substitution is (nearly) singular.
    """
    A = np.asarray(A, dtype=float)
    W = np.asarray(W, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or W.shape != (n, n):
        raise ValueError(f"shape mismatch: A {A.shape}, W {W.shape}")
    if n == 0:
        return np.zeros((0, 0))
    T, U = sla.schur(A, output="real")
    if check:
        eigs = np.linalg.eigvals(A)
        worst = eigs[np.argmax(eigs.real)]
        if worst.real >= -1e-12 * np.linalg.norm(A, 2):
            raise NotHurwitzError(
                f"A is not Hurwitz: eigenvalue {worst:.6g} has real part "
                f"{worst.real:.3e} >= 0", complex(worst))
    Wt = U.T @ W @ U
    Y = np.zeros((n, n))
    blocks = _schur_blocks(T)
    scale = np.linalg.norm(T, 1)
    # T Y + Y T^T = -Wt; sweep block columns right to left, and within a
    # column the block rows bottom to top.
    for jb in reversed(range(len(blocks))):
        cj = blocks[jb]
        rhs_col = -Wt[:, cj] - Y[:, cj.stop:] @ T[cj, cj.stop:].T
        Tjj = T[cj, cj]
        for ib in reversed(range(len(blocks))):
            ri = blocks[ib]
            rhs = rhs_col[ri] - T[ri, ri.stop:] @ Y[ri.stop:, cj]
            Y[ri, cj] = _small_sylvester(T[ri, ri], Tjj, rhs, scale)
    X = U @ Y @ U.T
    return 0.5 * (X + X.T)


def _small_sylvester(R: NDArray, S: NDArray, rhs: NDArray, scale: float) -> NDArray:
    """Solve ``R Y + Y S^T = rhs`` for blocks of size at most 2."""
    m, k = rhs.shape
    if m == 1 and k == 1:
        d = R[0, 0] + S[0, 0]
        if abs(d) <= 1e-14 * scale:
            raise NotHurwitzError(
                f"near-singular Schur back-substitution (pivot {d:.3e})")
        return rhs / d
    K = np.kron(np.eye(k), R) + np.kron(S, np.eye(m))
    cond = np.linalg.cond(K)
    if not np.isfinite(cond) or cond > 1e14:
        raise NotHurwitzError(
            f"near-singular Schur back-substitution (block condition {cond:.3e})")
    y = np.linalg.solve(K, rhs.reshape(-1, order="F"))
    return y.reshape(m, k, order="F")


def lyapunov_residual(A: NDArray, X: NDArray, W: NDArray) -> float:
    return float(np.linalg.norm(A @ X + X @ A.T + W, "fro"))


def controllability_gramian(sys: StateSpace) -> Gramian:
    """``P`` solving ``A P + P A^T + B B^T = 0``."""
    W = sys.B @ sys.B.T
    P = solve_lyapunov(sys.A, W)
    return Gramian(P, GramianKind.CONTROLLABILITY,
                   lyapunov_residual(sys.A, P, W), "lyapunov")


def observability_gramian(sys: StateSpace) -> Gramian:
    """``Q`` solving ``A^T Q + Q A + C^T C = 0``."""
    W = sys.C.T @ sys.C
    Q = solve_lyapunov(sys.A.T, W)
    return Gramian(Q, GramianKind.OBSERVABILITY,
                   lyapunov_residual(sys.A.T, Q, W), "lyapunov")
