"""Two-beam benchmark: reduce with MGBT, ISBT and PIBT and compare.

Every method is run independently; a failure is recorded in the report
instead of aborting the run.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .balancing import reduce_mg_bt
from .beam import (BEAM_1, BEAM_2, RAYLEIGH_ALPHA, RAYLEIGH_BETA, ROTATIONAL_DAMPING,
                   TRANSLATIONAL_DAMPING, build_beam, damper_coupling)
from .interconnection import (InterconnectionTopology, SubsystemSet, interconnect,
                              reduce_isbt, reduce_pibt)
from .lti import StateSpace, _freqresp_array, is_stable, step_response
from .metrics import NormReport, analyze
from .passivity import is_passive

__all__ = ["BenchmarkOptions", "MethodResult", "BenchmarkReport", "build_benchmark",
           "run_benchmark", "METHODS"]

log = logging.getLogger(__name__)

METHODS = ("MGBT", "ISBT", "PIBT")

# bands the PIBT error norms are expected to fall in, and the minimum
# MGBT / PIBT ratio of the L-infinity errors
PIBT_LINF_BAND = (0.03, 0.3)
PIBT_H2_BAND = (0.15, 1.5)
MIN_LINF_RATIO = 2.0


@dataclass(frozen=True)
class BenchmarkOptions:
    """Modeling assumptions; any field changed from its default is flagged.

    ``rotation_sign`` multiplies the rotation channel of the right beam's
    coupling end: +1 measures both interface rotations in one global frame,
    -1 describes the right beam in a mirrored frame.
    """

    rayleigh_alpha: float = RAYLEIGH_ALPHA
    rayleigh_beta: float = RAYLEIGH_BETA
    translational_damping: float = TRANSLATIONAL_DAMPING
    rotational_damping: float = ROTATIONAL_DAMPING
    rotation_sign: int = 1
    n_elements: int = 5

    def varied(self) -> list[str]:
        default = BenchmarkOptions()
        return [k for k, v in asdict(self).items() if v != getattr(default, k)]


def build_benchmark(opts: BenchmarkOptions = BenchmarkOptions()
                    ) -> tuple[SubsystemSet, InterconnectionTopology]:
    """Subsystems and topology for the given modeling assumptions."""
    if opts.rotation_sign not in (1, -1):
        raise ValueError("rotation_sign must be +1 or -1")
    factor = opts.n_elements // BEAM_1.n_elements
    if factor * BEAM_1.n_elements != opts.n_elements or factor < 1:
        raise ValueError(f"n_elements must be a multiple of {BEAM_1.n_elements}")
    cfgs = [BEAM_1.refined(factor), BEAM_2.refined(factor)]
    subs = [build_beam(c, opts.rayleigh_alpha, opts.rayleigh_beta) for c in cfgs]
    if opts.rotation_sign == -1:
        E = np.diag([1.0, -1.0, 1.0])  # rotation channel of the coupling end
        s = subs[1]
        subs[1] = StateSpace(s.A, s.B @ E, E @ s.C, E @ s.D @ E)
    p_b = sum(s.p for s in subs)
    S = damper_coupling([(0, 2, opts.translational_damping),
                         (1, 3, opts.rotational_damping)], p_b)
    Bcal = np.zeros((p_b, 1))
    Bcal[-1, 0] = 1.0
    return SubsystemSet(tuple(subs)), InterconnectionTopology(S, Bcal)


@dataclass
class MethodResult:
    method: str
    reduced: StateSpace | None = None
    subsystems: SubsystemSet | None = None
    norms: NormReport | None = None
    stable: bool | None = None
    passive: bool | None = None
    passivity_residual: float | None = None
    spectral_abscissa: float | None = None
    frf: np.ndarray | None = None
    step: np.ndarray | None = None
    error: str | None = None
    seconds: float = 0.0

    def summary(self) -> dict:
        def num(x):
            if x is None:
                return None
            return "inf" if math.isinf(x) else float(x)
        out = {"method": self.method, "error": self.error, "seconds": self.seconds}
        if self.error is None:
            out.update(
                order=self.reduced.n,
                subsystem_orders=self.subsystems.orders if self.subsystems else None,
                stable=self.stable, passive=self.passive,
                passivity_residual=num(self.passivity_residual),
                spectral_abscissa=num(self.spectral_abscissa),
                norms=self.norms.to_dict(),
                step_peak=num(float(np.max(np.abs(self.step[:, 1])))),
            )
        return out


@dataclass
class BenchmarkReport:
    orders: list[int]
    options: BenchmarkOptions
    fom: dict
    results: dict[str, MethodResult]
    flags: list[str] = field(default_factory=list)
    findings: dict[str, bool] = field(default_factory=dict)
    seconds: float = 0.0
    fom_frf: np.ndarray | None = None
    fom_step: np.ndarray | None = None

    def summary(self) -> dict:
        return {
            "orders": self.orders,
            "assumptions": asdict(self.options),
            "varied_assumptions": self.options.varied(),
            "fom": self.fom,
            "methods": {k: r.summary() for k, r in self.results.items()},
            "findings": self.findings,
            "flags": self.flags,
            "seconds": self.seconds,
        }

    def table(self) -> str:
        """Fixed-width summary with 6 significant digits."""
        def g(x):
            if x is None:
                return "-"
            if isinstance(x, bool):
                return "yes" if x else "no"
            return "inf" if math.isinf(x) else f"{x:.6g}"
        rows = [("method", "order", "H2", "Linf", "stable", "passive")]
        for name, r in self.results.items():
            if r.error is not None:
                rows.append((name, "-", "failed", "-", "-", "-"))
            else:
                rows.append((name, str(r.reduced.n), g(r.norms.h2), g(r.norms.linf),
                             g(r.stable), g(r.passive)))
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
        lines += [f"flag: {f}" for f in self.flags]
        return "\n".join(lines)

    def files(self, svg: bool = False) -> dict[str, str]:
        """Report files as ``{name: text}``."""
        out: dict[str, str] = {}
        rows = [["method", "h2", "linf", "stable", "passive"]]
        for name, r in self.results.items():
            if r.error is None:
                rows.append([name, _num(r.norms.h2), _num(r.norms.linf),
                             str(r.stable).lower(), str(r.passive).lower()])
            else:
                rows.append([name, "nan", "nan", "", ""])
        out["norms.csv"] = _csv(rows)
        series = [("FOM", self.fom_frf, self.fom_step)]
        series += [(k, r.frf, r.step) for k, r in self.results.items() if r.error is None]
        for name, frf, step in series:
            out[f"frf_{name.lower()}.csv"] = _csv(
                [["hz", "mag", "phase"]] + [[_num(v) for v in row] for row in frf])
            out[f"step_{name.lower()}.csv"] = _csv(
                [["t", "y"]] + [[_num(v) for v in row] for row in step])
        out["summary.json"] = json.dumps(self.summary(), indent=1) + "\n"
        if svg:
            out["frf.svg"] = _svg_plot([(n, f[:, 0], f[:, 1]) for n, f, _ in series],
                                       "frequency [Hz]", "|G| [m/(N s)]", logx=True, logy=True)
            out["step.svg"] = _svg_plot([(n, s[:, 0], s[:, 1]) for n, _, s in series],
                                        "time [s]", "velocity [m/s]")
        return out

    def write(self, directory: str | Path, svg: bool = False) -> list[Path]:
        return _write_all(Path(directory), self.files(svg))


def _num(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _write_all(directory: Path, files: dict[str, str]) -> list[Path]:
    """Write every file or none of them."""
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name, text in files.items():
            path = directory / name
            path.write_text(text)
            written.append(path)
    except OSError:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return written


def _svg_plot(series, xlabel: str, ylabel: str, logx: bool = False,
              logy: bool = False, width: int = 640, height: int = 400) -> str:
    colors = ["#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    left, right, top, bottom = 70, 20, 20, 50
    tx = (lambda x: np.log10(x)) if logx else (lambda x: x)
    ty = (lambda y: np.log10(np.maximum(y, 1e-300))) if logy else (lambda y: y)
    xs = [tx(np.asarray(x)) for _, x, _ in series]
    ys = [ty(np.asarray(y)) for _, _, y in series]
    finite = np.concatenate([y[np.isfinite(y)] for y in ys])
    fom = ys[0][np.isfinite(ys[0])]
    # clip the vertical range to a generous window around the reference
    lo, hi = finite.min(), finite.max()
    if fom.size:
        span = fom.max() - fom.min() or 1.0
        lo, hi = max(lo, fom.min() - span), min(hi, fom.max() + span)
    x0, x1 = min(x.min() for x in xs), max(x.max() for x in xs)
    hi = hi if hi > lo else lo + 1.0

    def px(x):
        return left + (x - x0) / (x1 - x0) * (width - left - right)

    def py(y):
        return top + (hi - np.clip(y, lo, hi)) / (hi - lo) * (height - top - bottom)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect x="{left}" y="{top}" width="{width - left - right}" '
             f'height="{height - top - bottom}" fill="none" stroke="#888"/>']
    for k, ((name, _, _), x, y) in enumerate(zip(series, xs, ys)):
        ok = np.isfinite(y)
        pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in zip(px(x[ok]), py(y[ok])))
        c = colors[k % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{c}" stroke-width="1" points="{pts}"/>')
        parts.append(f'<text x="{width - right - 60}" y="{top + 15 * (k + 1)}" '
                     f'fill="{c}" font-size="12">{name}</text>')
    parts.append(f'<text x="{width / 2}" y="{height - 10}" font-size="12" '
                 f'text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="15" y="{height / 2}" font-size="12" text-anchor="middle" '
                 f'transform="rotate(-90 15 {height / 2})">{ylabel}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _frf(sys: StateSpace, hz: np.ndarray) -> np.ndarray:
    G = _freqresp_array(sys, 2 * np.pi * hz)[:, 0, 0]
    return np.column_stack([hz, np.abs(G), np.angle(G, deg=True)])


def _step(sys: StateSpace, dt: float, t_end: float) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        t, y = step_response(sys, dt, t_end)
    return np.column_stack([t, y[:, 0]])


def _reduce(method: str, subs: SubsystemSet, topo, orders):
    if method == "MGBT":
        red = SubsystemSet(tuple(reduce_mg_bt(s, r).reduced for s, r in zip(subs, orders)))
        return red, interconnect(red, topo), None
    if method == "ISBT":
        out = reduce_isbt(subs, topo, orders)
        return out.subsystems, out.coupled, None
    if method == "PIBT":
        out = reduce_pibt(subs, topo, orders, certify=False)
        return out.subsystems, out.coupled, out
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def run_benchmark(orders: Sequence[int] = (12, 12), methods: Sequence[str] = METHODS,
                  options: BenchmarkOptions = BenchmarkOptions(),
                  f_range: tuple[float, float] = (1.0, 1e4), frf_points: int = 400,
                  dt: float = 1e-4, t_end: float = 0.1,
                  certify_fom: bool = True) -> BenchmarkReport:
    """Reduce the coupled beams with each method and compare to the full model.

    FRF samples are log-spaced over ``f_range`` Hz; the step response is the
    velocity under a unit force step on the external input.
    """
    t0 = time.perf_counter()
    methods = [m.upper() for m in methods]
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    orders = [int(r) for r in orders]
    subs, topo = build_benchmark(options)
    if len(orders) != len(subs):
        raise ValueError(f"need {len(subs)} orders, got {len(orders)}")
    fom = interconnect(subs, topo)
    hz = np.geomspace(f_range[0], f_range[1], frf_points)

    fom_info = {"order": fom.n, "subsystem_orders": subs.orders, "stable": is_stable(fom)}
    if certify_fom:
        for j, s in enumerate(subs):
            fom_info[f"sub{j}_passive"] = is_passive(s).feasible
        cert = is_passive(fom)
        fom_info["passive"] = cert.feasible
        fom_info["passivity_residual"] = cert.max_eig_residual
    fom_step = _step(fom, dt, t_end)
    fom_info["step_peak"] = float(np.max(np.abs(fom_step[:, 1])))

    results: dict[str, MethodResult] = {}
    for m in methods:
        tm = time.perf_counter()
        res = MethodResult(m)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                red_subs, red, _ = _reduce(m, subs, topo, orders)
            res.subsystems, res.reduced = red_subs, red
            res.stable = is_stable(red)
            res.spectral_abscissa = float(np.max(red.poles().real))
            cert = is_passive(red, check_minimal=False)
            res.passive, res.passivity_residual = cert.feasible, cert.max_eig_residual
            res.norms = analyze(fom, red)
            res.frf = _frf(red, hz)
            res.step = _step(red, dt, t_end)
        except Exception as exc:  # recorded, not fatal
            log.warning("%s failed: %s", m, exc)
            res = MethodResult(m, error=f"{type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - tm
        results[m] = res

    rep = BenchmarkReport(orders, options, fom_info, results,
                          fom_frf=_frf(fom, hz), fom_step=fom_step)
    _assess(rep, dt)
    rep.seconds = time.perf_counter() - t0
    return rep


def _assess(rep: BenchmarkReport, dt: float) -> None:
    """Compare against the reference findings and flag deviations."""
    r = {k: v for k, v in rep.results.items() if v.error is None}
    f = rep.findings
    for k in ("MGBT", "PIBT"):
        if k in r:
            f[f"{k}_stable_and_passive"] = bool(r[k].stable and r[k].passive)
    if "ISBT" in r:
        isbt = r["ISBT"]
        f["ISBT_unstable_and_not_passive"] = bool(not isbt.stable and not isbt.passive)
        f["ISBT_h2_infinite"] = math.isinf(isbt.norms.h2)
        peak = rep.fom["step_peak"]
        t, y = isbt.step[:, 0], np.abs(isbt.step[:, 1])
        early = t <= 0.05 + 0.5 * dt
        f["ISBT_step_exceeds_10x_before_50ms"] = bool(
            np.any(~np.isfinite(y[early]) | (y[early] > 10 * peak)))
    if "MGBT" in r and "PIBT" in r:
        mg, pi = r["MGBT"].norms, r["PIBT"].norms
        f["PIBT_beats_MGBT_h2"] = bool(pi.h2 < mg.h2)
        f["PIBT_beats_MGBT_linf"] = bool(pi.linf < mg.linf)
        ratio = mg.linf / pi.linf if pi.linf > 0 else math.inf
        f["MGBT_PIBT_linf_ratio_ge_2"] = bool(ratio >= MIN_LINF_RATIO)
    if "PIBT" in r:
        pi = r["PIBT"].norms
        f["PIBT_linf_in_band"] = bool(PIBT_LINF_BAND[0] <= pi.linf <= PIBT_LINF_BAND[1])
        f["PIBT_h2_in_band"] = bool(PIBT_H2_BAND[0] <= pi.h2 <= PIBT_H2_BAND[1])

    varied = rep.options.varied()
    note = (f"varied modeling assumptions: {', '.join(varied)}" if varied
            else "default modeling assumptions (none varied)")
    for key, ok in f.items():
        if not ok:
            rep.flags.append(f"{key} does not hold; {note}")
    for k, v in rep.results.items():
        if v.error is not None:
            rep.flags.append(f"{k} failed: {v.error}")
    if varied and not rep.flags:
        rep.flags.append(note)
