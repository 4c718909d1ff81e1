"""Error systems and their H2 / L-infinity norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .lti import DimensionError, StateSpace, _freqresp_array, is_stable
from .lyapunov import controllability_gramian

__all__ = ["NormReport", "error_system", "h2_norm", "linf_norm", "analyze"]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class NormReport:
    h2: float
    linf: float
    linf_freq: float | None
    grid_stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(x):
            if x is None:
                return None
            return "inf" if math.isinf(x) else float(x)
        return {"h2": enc(self.h2), "linf": enc(self.linf),
                "linf_freq": enc(self.linf_freq), "grid_stats": dict(self.grid_stats)}


def error_system(G: StateSpace, Ghat: StateSpace) -> StateSpace:
    """Realization of ``G(s) - Ghat(s)``."""
    if (G.p, G.p_out) != (Ghat.p, Ghat.p_out):
        raise DimensionError(
            f"I/O dimensions differ: {G.p_out}x{G.p} vs {Ghat.p_out}x{Ghat.p}")
    return StateSpace(sla.block_diag(G.A, Ghat.A), np.vstack([G.B, Ghat.B]),
                      np.hstack([G.C, -Ghat.C]), G.D - Ghat.D)


def h2_norm(sys: StateSpace) -> float:
    """``sqrt(trace(C P C^T))``; infinite for unstable models or ``D != 0``."""
    if np.any(sys.D != 0):
        return math.inf
    if sys.n == 0:
        return 0.0
    if not is_stable(sys):
        return math.inf
    P = controllability_gramian(sys).X
    return math.sqrt(max(float(np.trace(sys.C @ P @ sys.C.T)), 0.0))


def _sigma_max(sys: StateSpace, omegas: np.ndarray) -> np.ndarray:
    if sys.p == 0 or sys.p_out == 0:
        return np.zeros(len(omegas))
    G = _freqresp_array(sys, np.asarray(omegas, dtype=float))
    return np.linalg.norm(G, ord=2, axis=(1, 2))


def linf_norm(sys: StateSpace, f_min: float = 1.0, f_max: float = 1e5,
              points: int = 2000, refine_tol: float = 1e-4) -> NormReport:
    """Peak gain ``sup_w sigma_max(G(j w))`` (unstable models allowed).

    The log-spaced grid over ``[f_min, f_max]`` Hz is widened to cover the
    pole magnitudes and augmented with the damped pole frequencies; every local maximum is then refined by
    golden-section search in ``log w`` until the bracket moves by less than
    ``refine_tol``. ``w = 0`` and ``w -> inf`` (``sigma_max(D)``) are always
    included. Poles within ``1e-9 ||A||`` of the imaginary axis make the
    norm infinite.

    Returns a :class:`NormReport` with ``h2`` left as NaN.
    """
    if not (0 < f_min < f_max) or points < 3:
        raise ValueError("need 0 < f_min < f_max and points >= 3")
    stats = {"evaluations": 0, "refined_peaks": 0, "max_depth": 0}
    if sys.n:
        poles = sys.poles()
        if np.any(np.abs(poles.real) <= 1e-9 * max(np.linalg.norm(sys.A, 2), 1e-300)):
            return NormReport(math.nan, math.inf, None, stats)

    def evaluate(w):
        stats["evaluations"] += np.size(w)
        return _sigma_max(sys, np.atleast_1d(w))

    w_lo, w_hi = 2 * math.pi * f_min, 2 * math.pi * f_max
    density = points / math.log10(w_hi / w_lo)
    if sys.n:
        # widen to cover all pole magnitudes at the same density
        mag = np.abs(poles)
        w_lo = min(w_lo, 0.1 * mag.min())
        w_hi = max(w_hi, 10.0 * mag.max())
    grid = np.geomspace(w_lo, w_hi, max(points, int(density * math.log10(w_hi / w_lo))))
    if sys.n:
        wd = np.abs(poles.imag)
        grid = np.union1d(grid, wd[(wd > w_lo) & (wd < w_hi)])
    vals = evaluate(grid)

    best_w, best = 0.0, float(evaluate(0.0)[0])
    d_inf = float(np.linalg.norm(sys.D, 2)) if sys.D.size else 0.0
    if d_inf > best:
        best_w, best = math.inf, d_inf
    k = int(np.argmax(vals))
    if vals[k] > best:
        best_w, best = float(grid[k]), float(vals[k])

    # golden-section refinement of each interior local maximum
    idx = np.where((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:]))[0] + 1
    for i in idx:
        a, b = math.log(grid[i - 1]), math.log(grid[i + 1])
        c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
        fc, fd = evaluate(math.exp(c))[0], evaluate(math.exp(d))[0]
        depth = 0
        # the bracket is in log w, so its width is the relative movement
        while b - a > 1e-2 * refine_tol and depth < 100:
            depth += 1
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - GOLDEN * (b - a)
                fc = evaluate(math.exp(c))[0]
            else:
                a, c, fc = c, d, fd
                d = a + GOLDEN * (b - a)
                fd = evaluate(math.exp(d))[0]
        stats["refined_peaks"] += 1
        stats["max_depth"] = max(stats["max_depth"], depth)
        for w, f in ((math.exp(c), fc), (math.exp(d), fd), (grid[i], vals[i])):
            if f > best:
                best_w, best = float(w), float(f)
    return NormReport(math.nan, best, best_w, stats)


def analyze(G: StateSpace, Ghat: StateSpace, **linf_opts) -> NormReport:
    """H2 and L-infinity norms of ``G - Ghat``."""
    E = error_system(G, Ghat)
    rep = linf_norm(E, **linf_opts)
    rep.h2 = h2_norm(E)
    return rep
