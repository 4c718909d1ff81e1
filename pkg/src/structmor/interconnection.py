"""Interconnected systems: composition, coupling, ISBT and PIBT.

Subsystems ``Sigma_j`` are stacked in parallel into ``Sigma_b`` and closed
through the feedback ``v_b = -S z_b + Bcal u_c``, ``y_c = Bcal^T z_b``.
Both structured reductions balance every subsystem separately with blocks
of Gramians of the coupled system and re-couple the reduced subsystems.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike, NDArray

from .balancing import ReductionResult, balance, truncate
from .lti import DimensionError, StateSpace, is_stable, load_model, model_from_dict
from .lyapunov import NotHurwitzError, controllability_gramian, observability_gramian
from .passivity import (PassivityCertificate, is_passive, lmi_residual,
                        feasibility_tolerance, min_available_storage,
                        min_required_supply)

__all__ = [
    "SubsystemSet",
    "InterconnectionTopology",
    "PartitionedGramian",
    "InterconnectedReduction",
    "parallel_compose",
    "couple",
    "interconnect",
    "partition_gramian",
    "reduce_isbt",
    "reduce_pibt",
    "load_topology",
    "topology_to_dict",
]


@dataclass(frozen=True)
class SubsystemSet:
    """Ordered collection of square subsystems."""

    subsystems: tuple[StateSpace, ...]

    def __post_init__(self) -> None:
        subs = tuple(self.subsystems)
        if not subs:
            raise ValueError("need at least one subsystem")
        for j, s in enumerate(subs):
            if not isinstance(s, StateSpace):
                raise TypeError(f"subsystem {j} is not a StateSpace")
            if not s.is_square:
                raise DimensionError(
                    f"subsystem {j} is not square ({s.p} inputs, {s.p_out} outputs)")
        object.__setattr__(self, "subsystems", subs)

    @classmethod
    def of(cls, subsystems: "SubsystemSet | Iterable[StateSpace]") -> "SubsystemSet":
        return subsystems if isinstance(subsystems, cls) else cls(tuple(subsystems))

    def __len__(self) -> int:
        return len(self.subsystems)

    def __iter__(self):
        return iter(self.subsystems)

    def __getitem__(self, j: int) -> StateSpace:
        return self.subsystems[j]

    @property
    def orders(self) -> list[int]:
        return [s.n for s in self.subsystems]

    @property
    def channels(self) -> list[int]:
        return [s.p for s in self.subsystems]

    @property
    def n_b(self) -> int:
        return sum(self.orders)

    @property
    def p_b(self) -> int:
        return sum(self.channels)


@dataclass(frozen=True)
class InterconnectionTopology:
    """Feedback ``v_b = -S z_b + Bcal u_c`` with output ``y_c = Bcal^T z_b``."""

    S: NDArray[np.float64]
    Bcal: NDArray[np.float64]

    def __post_init__(self) -> None:
        S = np.atleast_2d(np.array(self.S, dtype=float))
        Bcal = np.array(self.Bcal, dtype=float)
        if Bcal.ndim == 1:
            Bcal = Bcal.reshape(-1, 1)
        if S.shape[0] != S.shape[1]:
            raise DimensionError(f"S must be square, got {S.shape}")
        if Bcal.shape[0] != S.shape[0]:
            raise DimensionError(
                f"Bcal must have {S.shape[0]} rows, got shape {Bcal.shape}")
        scale = max(np.linalg.norm(S, 2), np.finfo(float).tiny)
        if np.linalg.norm(S - S.T) > 1e-12 * scale:
            raise ValueError("S must be symmetric")
        S = 0.5 * (S + S.T)
        if S.size and np.linalg.eigvalsh(S)[0] < -1e-10 * scale:
            raise ValueError("S must be positive semidefinite")
        for name, mat in (("S", S), ("Bcal", Bcal)):
            mat.flags.writeable = False
            object.__setattr__(self, name, mat)

    @property
    def p_b(self) -> int:
        return self.S.shape[0]

    @property
    def p_c(self) -> int:
        return self.Bcal.shape[1]


def parallel_compose(subsystems: SubsystemSet | Sequence[StateSpace]) -> StateSpace:
    """Block-diagonal stacking of square subsystems."""
    subs = SubsystemSet.of(subsystems)
    return StateSpace(*(sla.block_diag(*[getattr(s, k) for s in subs])
                        for k in "ABCD"))


def couple(sys_b: StateSpace, topo: InterconnectionTopology) -> StateSpace:
    """Close the feedback loop ``v_b = -S z_b + Bcal u_c``.

    With ``D1 = (I + D_b S)^-1`` and ``D2 = (I + S D_b)^-1``::

        A_c = A_b - B_b D2 S C_b     B_c = B_b D2 Bcal
        C_c = Bcal^T D1 C_b          D_c = Bcal^T D_b D2 Bcal
    """
    if sys_b.p != topo.p_b or sys_b.p_out != topo.p_b:
        raise DimensionError(
            f"topology has {topo.p_b} channels, system has {sys_b.p} inputs "
            f"and {sys_b.p_out} outputs")
    S, Bcal, Db = topo.S, topo.Bcal, sys_b.D
    eye = np.eye(topo.p_b)
    M1 = eye + Db @ S
    M2 = eye + S @ Db
    cond = max(np.linalg.cond(M1), np.linalg.cond(M2))
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(
            f"ill-posed interconnection: cond(I + S D_b) = {cond:.3e}")
    D1 = np.linalg.solve(M1, eye)
    D2 = np.linalg.solve(M2, eye)
    A = sys_b.A - sys_b.B @ D2 @ S @ sys_b.C
    B = sys_b.B @ D2 @ Bcal
    C = Bcal.T @ D1 @ sys_b.C
    D = Bcal.T @ Db @ D2 @ Bcal
    return StateSpace(A, B, C, D)


def interconnect(subsystems: SubsystemSet | Sequence[StateSpace],
                 topo: InterconnectionTopology) -> StateSpace:
    """``couple(parallel_compose(subsystems), topo)``."""
    return couple(parallel_compose(subsystems), topo)


@dataclass(frozen=True)
class PartitionedGramian:
    full: NDArray[np.float64]
    blocks: tuple[tuple[NDArray[np.float64], ...], ...]

    def block(self, i: int, j: int) -> NDArray[np.float64]:
        return self.blocks[i][j]

    def diagonal(self, j: int) -> NDArray[np.float64]:
        return self.blocks[j][j]


def partition_gramian(X: ArrayLike, orders: Sequence[int]) -> PartitionedGramian:
    """Split ``X`` into the block grid induced by the state partition."""
    X = np.asarray(X, dtype=float)
    orders = [int(o) for o in orders]
    if any(o < 0 for o in orders):
        raise ValueError("orders must be nonnegative")
    if X.ndim != 2 or X.shape[0] != X.shape[1] or sum(orders) != X.shape[0]:
        raise DimensionError(
            f"orders {orders} (sum {sum(orders)}) do not partition a matrix of shape {X.shape}")
    edges = np.concatenate([[0], np.cumsum(orders)])
    sl = [slice(edges[j], edges[j + 1]) for j in range(len(orders))]
    blocks = tuple(tuple(X[a, b].copy() for b in sl) for a in sl)
    return PartitionedGramian(X.copy(), blocks)


@dataclass
class InterconnectedReduction:
    """Outcome of a structured reduction.

    ``results[j]`` holds the balanced truncation of subsystem ``j``;
    ``certificates`` maps ``"sub0"``, ``"sub1"``, ... and ``"coupled"`` to
    freshly computed passivity certificates (PIBT only).
    """

    subsystems: SubsystemSet
    coupled: StateSpace
    results: list[ReductionResult]
    method: str
    certificates: dict[str, PassivityCertificate] = field(default_factory=dict)
    storage_checks: list[dict] = field(default_factory=list)

    @property
    def orders(self) -> list[int]:
        return self.subsystems.orders


def _check_orders(subs: SubsystemSet, orders: Sequence[int]) -> list[int]:
    orders = [int(r) for r in orders]
    if len(orders) != len(subs):
        raise DimensionError(f"{len(orders)} orders given for {len(subs)} subsystems")
    for j, (r, n) in enumerate(zip(orders, subs.orders)):
        if not 1 <= r <= n:
            raise ValueError(f"order r_{j} = {r} outside 1..{n}")
    return orders


def _check_topology(subs: SubsystemSet, topo: InterconnectionTopology) -> None:
    if topo.p_b != subs.p_b:
        raise DimensionError(
            f"topology has {topo.p_b} channels, subsystems provide {subs.p_b}")


def _coupled_gramian(sys_c: StateSpace, which: str):
    if not is_stable(sys_c):
        raise NotHurwitzError(
            "the coupled system is not asymptotically stable; its Gramians "
            "are undefined", complex(np.max(sys_c.poles().real)))
    return (controllability_gramian if which == "P" else observability_gramian)(sys_c).X


def reduce_isbt(subsystems: SubsystemSet | Sequence[StateSpace],
                topo: InterconnectionTopology,
                orders: Sequence[int]) -> InterconnectedReduction:
    """Balance each subsystem with the diagonal blocks ``(P_jj, Q_jj)``.

    Neither stability nor passivity of the result is guaranteed.
    """
    subs = SubsystemSet.of(subsystems)
    _check_topology(subs, topo)
    orders = _check_orders(subs, orders)
    sys_c = interconnect(subs, topo)
    Pc = partition_gramian(_coupled_gramian(sys_c, "P"), subs.orders)
    Qc = partition_gramian(_coupled_gramian(sys_c, "Q"), subs.orders)
    results = [truncate(balance(s, Pc.diagonal(j), Qc.diagonal(j), clamp=True), r, "ISBT")
               for j, (s, r) in enumerate(zip(subs, orders))]
    red = SubsystemSet(tuple(res.reduced for res in results))
    return InterconnectedReduction(red, interconnect(red, topo), results, "ISBT")


def reduce_pibt(subsystems: SubsystemSet | Sequence[StateSpace],
                topo: InterconnectionTopology, orders: Sequence[int],
                variant: str = "Primal", minimal: bool = True,
                certify: bool = True) -> InterconnectedReduction:
    """Passivity-preserving structured balanced truncation.

    ``Primal`` balances subsystem ``j`` with ``(P_jj, Xi_j)``: the block of
    the coupled controllability Gramian against the subsystem's minimal
    available storage. ``Dual`` uses ``(Pi_j, Q_jj)``. Truncating a
    balanced storage keeps it a valid storage of the reduced subsystem, so
    every reduced subsystem and the re-coupled model stay passive.

    Parameters
    ----------
    minimal : bool
        Use the Loewner-minimal storage (default) or any interior one.
    certify : bool
        Recompute passivity certificates of every reduced subsystem and of
        the reduced coupled model from scratch.
    """
    if variant not in ("Primal", "Dual"):
        raise ValueError(f"unknown PIBT variant {variant!r}; use 'Primal' or 'Dual'")
    subs = SubsystemSet.of(subsystems)
    _check_topology(subs, topo)
    orders = _check_orders(subs, orders)
    sys_c = interconnect(subs, topo)
    which = "P" if variant == "Primal" else "Q"
    Xc = partition_gramian(_coupled_gramian(sys_c, which), subs.orders)

    results, checks = [], []
    for j, (s, r) in enumerate(zip(subs, orders)):
        try:
            if variant == "Primal":
                storage = min_available_storage(s, minimal=minimal)
                X_i, X_o = Xc.diagonal(j), storage.X
            else:
                storage = min_required_supply(s)
                X_i, X_o = storage.X, Xc.diagonal(j)
        except ValueError as exc:
            raise type(exc)(f"subsystem {j}: {exc}") from exc
        res = truncate(balance(s, X_i, X_o, clamp=True), r, "PIBT")
        # the truncated balanced storage certifies the reduced subsystem
        g = res.gamma[:r]
        trunc = np.diag(g) if variant == "Primal" else np.diag(1.0 / g)
        _, lam = lmi_residual(res.reduced, trunc)
        checks.append({"subsystem": j, "max_eig": lam,
                       "tolerance": feasibility_tolerance(trunc),
                       "feasible": bool(lam <= feasibility_tolerance(trunc))})
        results.append(res)

    red = SubsystemSet(tuple(res.reduced for res in results))
    out = InterconnectedReduction(red, interconnect(red, topo), results, "PIBT",
                                  storage_checks=checks)
    if certify:
        for j, s in enumerate(red):
            out.certificates[f"sub{j}"] = is_passive(s, check_minimal=False)
        out.certificates["coupled"] = is_passive(out.coupled, check_minimal=False)
    return out


def topology_to_dict(topo: InterconnectionTopology, subsystems: Sequence = (),
                     orders: Sequence[int] = ()) -> dict:
    return {"S": topo.S.tolist(), "Bcal": topo.Bcal.tolist(),
            "subsystems": list(subsystems), "orders": [int(r) for r in orders]}


def load_topology(path: str | Path) -> tuple[SubsystemSet | None,
                                             InterconnectionTopology, list[int]]:
    """Read a topology file.

    ``subsystems`` entries are model file paths (relative to the topology
    file) or inline model objects. Returns ``(subsystems, topology,
    orders)``; ``subsystems`` is None when the file lists none.
    """
    path = Path(path)
    data = json.loads(path.read_text())
    try:
        topo = InterconnectionTopology(data["S"], data["Bcal"])
    except KeyError as exc:
        raise DimensionError(f"topology is missing field {exc}") from None
    subs = []
    for ref in data.get("subsystems", []):
        if isinstance(ref, dict):
            subs.append(model_from_dict(ref))
        else:
            subs.append(load_model(path.parent / ref))
    return (SubsystemSet(tuple(subs)) if subs else None, topo,
            [int(r) for r in data.get("orders", [])])
