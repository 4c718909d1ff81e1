"""Continuous-time LTI state-space models.

Dense real quadruples ``(A, B, C, D)`` with validation, similarity
transforms, duality, frequency response and exact zero-order-hold step
responses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "DimensionError",
    "StateSpace",
    "TransferSample",
    "ValidationReport",
    "validate",
    "is_stable",
    "similarity_transform",
    "dual",
    "frequency_response",
    "step_response",
    "load_model",
    "save_model",
    "model_to_dict",
    "model_from_dict",
]

#: largest condition number accepted for a similarity transformation
MAX_TRANSFORM_COND = 1e12


class DimensionError(ValueError):
    """Inconsistent matrix dimensions."""


class SingularTransformError(np.linalg.LinAlgError):
    """A transformation matrix is singular or too badly conditioned."""

    def __init__(self, msg: str, cond: float):
        super().__init__(msg)
        self.cond = cond


@dataclass(frozen=True)
class StateSpace:
    """Real state-space model ``x' = A x + B u``, ``y = C x + D u``.

    Arrays are copied on construction and made read-only, so instances can
    be shared freely.
    """

    A: NDArray[np.float64]
    B: NDArray[np.float64]
    C: NDArray[np.float64]
    D: NDArray[np.float64]

    def __post_init__(self) -> None:
        A = _as_matrix(self.A, "A")
        n = A.shape[0]
        B = _as_matrix(self.B, "B", rows=n)
        C = _as_matrix(self.C, "C", cols=n)
        D = _as_matrix(self.D, "D", rows=C.shape[0], cols=B.shape[1])
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != n:
            raise DimensionError(f"B must have {n} rows, got shape {B.shape}")
        if C.shape[1] != n:
            raise DimensionError(f"C must have {n} columns, got shape {C.shape}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise DimensionError(
                f"D must be {C.shape[0]}x{B.shape[1]}, got shape {D.shape}"
            )
        for name, mat in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"{name} contains non-finite entries")
            mat.flags.writeable = False
            object.__setattr__(self, name, mat)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        """Number of inputs."""
        return self.B.shape[1]

    @property
    def p_out(self) -> int:
        return self.C.shape[0]

    @property
    def is_square(self) -> bool:
        return self.p == self.p_out

    def poles(self) -> NDArray[np.complex128]:
        return np.linalg.eigvals(self.A)

    def __iter__(self):
        return iter((self.A, self.B, self.C, self.D))

    def __repr__(self) -> str:
        return f"StateSpace(n={self.n}, p={self.p}, p_out={self.p_out})"


def _as_matrix(x: ArrayLike, name: str, rows: int | None = None,
               cols: int | None = None) -> NDArray[np.float64]:
    a = np.array(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        # a bare vector is a column when the row count is pinned, else a row
        if rows is not None and a.size == rows and cols != a.size:
            a = a.reshape(-1, 1)
        elif a.size == 0 and rows is not None:
            a = a.reshape(rows, 0)
        elif a.size == 0 and cols is not None:
            a = a.reshape(0, cols)
        else:
            a = a.reshape(1, -1)
    elif a.ndim != 2:
        raise DimensionError(f"{name} must be a matrix, got {a.ndim} dimensions")
    return a


@dataclass(frozen=True)
class TransferSample:
    """Frequency response ``G(j omega)``; ``G`` is ``None`` if ``j omega`` is a pole."""

    omega: float
    G: NDArray[np.complex128] | None
    error: str | None = None


@dataclass
class ValidationReport:
    n: int
    p: int
    p_out: int
    square: bool
    stable: bool
    controllable_rank: int
    observable_rank: int
    spectral_abscissa: float
    issues: list[str] = field(default_factory=list)

    @property
    def controllable(self) -> bool:
        return self.controllable_rank == self.n

    @property
    def observable(self) -> bool:
        return self.observable_rank == self.n

    @property
    def minimal(self) -> bool:
        return self.controllable and self.observable

    @property
    def ok(self) -> bool:
        return not self.issues


def _controllable_dimension(A: NDArray, B: NDArray) -> int:
    """Dimension of the controllable subspace by orthogonal staircase reduction.

    ``A`` is first diagonally balanced; every step takes an SVD rank with
    tolerance ``n * eps * sigma_max`` of the current input block.
    """
    n = A.shape[0]
    if n == 0 or B.size == 0:
        return 0
    _, (scale, _) = sla.matrix_balance(A, permute=False, separate=True)
    A = A * (1.0 / scale)[:, None] * scale[None, :]
    B = B / scale[:, None]
    gain = max(np.linalg.norm(A, 2), np.linalg.norm(B, 2))
    tol = n * np.finfo(float).eps * gain
    total = 0
    Acur, Bcur = A, B
    while Bcur.size:
        U, s, _ = np.linalg.svd(Bcur)
        r = int(np.sum(s > tol))
        if r == 0:
            break
        total += r
        if r == Acur.shape[0]:
            break
        At = U.T @ Acur @ U
        Bcur = At[r:, :r]
        Acur = At[r:, r:]
    return total


def controllability_rank(sys: StateSpace) -> int:
    return _controllable_dimension(sys.A, sys.B)


def observability_rank(sys: StateSpace) -> int:
    return _controllable_dimension(sys.A.T, sys.C.T)


def is_stable(sys_or_A: StateSpace | NDArray) -> bool:
    """Strict Hurwitz test with margin ``1e-12 * ||A||``."""
    A = sys_or_A.A if isinstance(sys_or_A, StateSpace) else np.asarray(sys_or_A)
    if A.size == 0:
        return True
    margin = 1e-12 * np.linalg.norm(A, 2)
    return bool(np.max(np.linalg.eigvals(A).real) < -margin)


def validate(sys: StateSpace, require_square: bool = False,
             require_minimal: bool = False,
             require_stable: bool = False) -> ValidationReport:
    """Check a model for squareness, stability and minimality.

    Dimension errors are raised when the model is built; everything else is
    reported in the returned :class:`ValidationReport`. The ``require_*``
    flags only decide which findings are listed under ``issues``.
    """
    eigs = sys.poles()
    abscissa = float(np.max(eigs.real)) if eigs.size else -np.inf
    rep = ValidationReport(
        n=sys.n, p=sys.p, p_out=sys.p_out, square=sys.is_square,
        stable=is_stable(sys),
        controllable_rank=controllability_rank(sys),
        observable_rank=observability_rank(sys),
        spectral_abscissa=abscissa,
    )
    if require_square and not rep.square:
        rep.issues.append(f"not square: {sys.p} inputs, {sys.p_out} outputs")
    if require_stable and not rep.stable:
        rep.issues.append(f"not stable: spectral abscissa {abscissa:.3e}")
    if require_minimal and not rep.minimal:
        rep.issues.append(
            f"not minimal: controllability rank {rep.controllable_rank}, "
            f"observability rank {rep.observable_rank}, n = {sys.n}"
        )
    return rep


def similarity_transform(sys: StateSpace, T: ArrayLike,
                         T_inv: ArrayLike | None = None) -> StateSpace:
    """Return ``(T A T^-1, T B, C T^-1, D)``.

    ``T_inv`` may be supplied when it is already known (balancing produces
    both factors); otherwise it is obtained by an LU solve.
    """
    T = np.asarray(T, dtype=float)
    if T.shape != (sys.n, sys.n):
        raise DimensionError(f"T must be {sys.n}x{sys.n}, got {T.shape}")
    if sys.n == 0:
        return sys
    cond = np.linalg.cond(T)
    if not np.isfinite(cond) or cond > MAX_TRANSFORM_COND:
        raise SingularTransformError(
            f"transformation is singular or ill-conditioned (cond = {cond:.3e})",
            cond)
    if T_inv is None:
        T_inv = np.linalg.solve(T, np.eye(sys.n))
    T_inv = np.asarray(T_inv, dtype=float)
    return StateSpace(T @ sys.A @ T_inv, T @ sys.B, sys.C @ T_inv, sys.D)


def dual(sys: StateSpace) -> StateSpace:
    """Return the dual system ``(A^T, C^T, B^T, D^T)``."""
    if not sys.is_square:
        raise DimensionError("dual is only defined here for square systems")
    return StateSpace(sys.A.T, sys.C.T, sys.B.T, sys.D.T)


def _freqresp_array(sys: StateSpace, omegas: NDArray) -> NDArray[np.complex128]:
    """Stack of ``G(j w)``, shape ``(len(omegas), p_out, p)``; NaN at poles."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    out = np.empty((omegas.size, sys.p_out, sys.p), dtype=complex)
    n = sys.n
    eye = np.eye(n)
    for k, w in enumerate(omegas):
        if n == 0:
            out[k] = sys.D
            continue
        M = 1j * w * eye - sys.A
        try:
            lu = sla.lu_factor(M, check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            out[k] = np.nan
            continue
        if np.min(np.abs(np.diag(lu[0]))) <= np.finfo(float).eps * max(np.abs(M).max(), 1.0):
            out[k] = np.nan
            continue
        X = sla.lu_solve(lu, sys.B.astype(complex), check_finite=False)
        out[k] = sys.C @ X + sys.D
    return out


def frequency_response(sys: StateSpace, omegas: Sequence[float]) -> list[TransferSample]:
    """Evaluate ``C (j w I - A)^-1 B + D`` at each angular frequency.

    Frequencies that coincide with a pole produce a sample with ``G=None``
    and an ``error`` message instead of raising.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(omegas < 0):
        raise ValueError("frequencies must be nonnegative")
    G = _freqresp_array(sys, omegas)
    samples = []
    for w, g in zip(omegas, G):
        if np.all(np.isfinite(g)):
            samples.append(TransferSample(float(w), g))
        else:
            samples.append(TransferSample(float(w), None,
                                          f"j*{w:g} is a pole of the system"))
    return samples


def step_response(sys: StateSpace, dt: float, t_end: float,
                  input_channel: int = 0) -> tuple[NDArray, NDArray]:
    """Unit step response from zero initial state.

    The model is discretized exactly under zero-order hold through the
    matrix exponential of ``[[A, B], [0, 0]] * dt``.

    Returns
    -------
    t : (N,) array
        Sample times ``0, dt, 2 dt, ...`` up to ``t_end``.
    y : (N, p_out) array
        Outputs at the sample times.
    """
    if dt <= 0 or t_end <= dt:
        raise ValueError("need dt > 0 and t_end > dt")
    if not 0 <= input_channel < sys.p:
        raise DimensionError(f"input channel {input_channel} out of range")
    n = sys.n
    steps = int(np.floor(t_end / dt + 1e-9))
    t = dt * np.arange(steps + 1)
    b = sys.B[:, input_channel]
    d = sys.D[:, input_channel]
    if n == 0:
        return t, np.tile(d, (steps + 1, 1))
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = sys.A
    aug[:n, n] = b
    Phi = sla.expm(aug * dt)
    Ad, bd = Phi[:n, :n], Phi[:n, n]
    x = np.zeros(n)
    y = np.empty((steps + 1, sys.p_out))
    for k in range(steps + 1):
        y[k] = sys.C @ x + d
        x = Ad @ x + bd
    return t, y


def model_to_dict(sys: StateSpace) -> dict:
    return {name: mat.tolist() for name, mat in zip("ABCD", sys)}


def model_from_dict(data: dict) -> StateSpace:
    try:
        mats = [data[k] for k in "ABCD"]
    except KeyError as exc:
        raise DimensionError(f"model is missing field {exc}") from None
    A = np.array(mats[0], dtype=float).reshape(-1, len(mats[0])) if mats[0] else np.zeros((0, 0))
    n = A.shape[0]
    B = np.array(mats[1], dtype=float)
    C = np.array(mats[2], dtype=float)
    D = np.array(mats[3], dtype=float)
    if B.ndim == 1 and n == 0:
        B = B.reshape(0, -1)
    if C.ndim == 1 and n == 0:
        C = C.reshape(-1, 0)
    return StateSpace(A, B, C, D)


def save_model(sys: StateSpace, path: str | Path, **extra) -> None:
    """Write ``sys`` in the JSON model format, with optional extra fields."""
    data = model_to_dict(sys)
    data.update(extra)
    Path(path).write_text(json.dumps(data, indent=1))


def load_model(path: str | Path) -> StateSpace:
    return model_from_dict(json.loads(Path(path).read_text()))
