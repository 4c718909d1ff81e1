"""Command-line interface: ``structmor {reduce,analyze,couple,bench-beam}``.

Exit codes: 0 success, 1 I/O error, 2 failed precondition or dimension
mismatch. Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .balancing import BalancingError, reduce_lyap_bt, reduce_mg_bt, reduce_pr_bt
from .bench import METHODS, BenchmarkOptions, _write_all, run_benchmark
from .interconnection import interconnect, load_topology, reduce_isbt, reduce_pibt
from .lti import DimensionError, SingularTransformError, is_stable, load_model, model_to_dict
from .lyapunov import NotHurwitzError
from .metrics import analyze
from .passivity import NonMinimalError, NotPassiveError, is_passive

log = logging.getLogger("structmor")

SINGLE_METHODS = {"lyapbt", "prbt", "mgbt"}
STRUCTURED_METHODS = {"isbt", "pibt"}
PRECONDITION_ERRORS = (DimensionError, NotPassiveError, NonMinimalError, NotHurwitzError,
                       BalancingError, SingularTransformError, np.linalg.LinAlgError,
                       ValueError, KeyError, TypeError)


class InputError(Exception):
    """An input file could not be read or parsed."""


@dataclass
class RunConfig:
    command: str
    inputs: dict[str, str] = field(default_factory=dict)
    method: str | None = None
    variant: str | None = None
    orders: list[int] = field(default_factory=list)
    out: str | None = None
    seed: int = 0
    options: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(r < 1 for r in self.orders):
            raise ValueError(f"orders must be positive, got {self.orders}")


def _g(x: float) -> str:
    x = float(x)
    return "inf" if math.isinf(x) else f"{x:.6g}"


def _enc(x):
    """JSON-safe value: infinities become the string "inf"."""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, dict):
        return {k: _enc(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_enc(v) for v in x]
    if isinstance(x, np.generic):
        return _enc(x.item())
    return x


def _dump(obj) -> str:
    return json.dumps(_enc(obj), indent=1) + "\n"


def _load_model(path: str):
    try:
        return load_model(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _load_topology(path: str):
    try:
        return load_topology(path)
    except OSError as exc:
        raise InputError(f"cannot read {exc.filename or path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _parse_orders(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValueError(f"orders must be comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# commands return (files to write, stdout text)


def cmd_reduce(cfg: RunConfig) -> tuple[dict[str, str], str]:
    method = cfg.method
    if method in SINGLE_METHODS:
        if "model" not in cfg.inputs:
            raise ValueError(f"--model is required for {method}")
        if len(cfg.orders) != 1:
            raise ValueError("give a single order with --order")
        sys_ = _load_model(cfg.inputs["model"])
        r = cfg.orders[0]
        if method == "lyapbt":
            res = reduce_lyap_bt(sys_, r)
        elif method == "prbt":
            res = reduce_pr_bt(sys_, r, certify=True)
        else:
            res = reduce_mg_bt(sys_, r, variant=cfg.variant or "PXi", certify=True)
        lines = [f"method {res.method}, order {sys_.n} -> {r}",
                 "gamma: " + " ".join(_g(g) for g in res.gamma),
                 "discarded gamma: " + (" ".join(_g(g) for g in res.discarded_gamma) or "-")]
        if res.certificate is not None:
            lines.append(f"passive: {'yes' if res.certificate.feasible else 'no'} "
                         f"(LMI residual {_g(res.certificate.max_eig_residual)})")
        return {"reduced.json": _dump(res.to_dict())}, "\n".join(lines)

    if method in STRUCTURED_METHODS:
        if "topology" not in cfg.inputs:
            raise ValueError(f"--topology is required for {method}")
        subs, topo, file_orders = _load_topology(cfg.inputs["topology"])
        if subs is None:
            raise ValueError("topology lists no subsystems")
        orders = cfg.orders or file_orders
        if method == "isbt":
            out = reduce_isbt(subs, topo, orders)
        else:
            out = reduce_pibt(subs, topo, orders, variant=cfg.variant or "Primal")
        files = {}
        for j, res in enumerate(out.results):
            files[f"sub{j}.json"] = _dump(res.to_dict())
        files["coupled.json"] = _dump(model_to_dict(out.coupled))
        lines = [f"method {out.method}, orders {subs.orders} -> {out.orders}, "
                 f"coupled order {out.coupled.n}",
                 f"coupled stable: {'yes' if is_stable(out.coupled) else 'no'}"]
        if out.certificates:
            files["certificates.json"] = _dump(
                {k: c.to_dict() for k, c in out.certificates.items()})
            for k, c in out.certificates.items():
                lines.append(f"{k} passive: {'yes' if c.feasible else 'no'} "
                             f"(LMI residual {_g(c.max_eig_residual)})")
        for j, res in enumerate(out.results):
            lines.append(f"sub{j} gamma: " + " ".join(_g(g) for g in res.gamma))
        return files, "\n".join(lines)
    raise ValueError(f"unknown method {method!r}")


def cmd_analyze(cfg: RunConfig) -> tuple[dict[str, str], str]:
    G = _load_model(cfg.inputs["model"])
    Ghat = _load_model(cfg.inputs["reference"])
    rep = analyze(G, Ghat, **cfg.options)
    text = f"h2 {_g(rep.h2)}\nlinf {_g(rep.linf)}"
    if rep.linf_freq is not None:
        text += f" at {_g(rep.linf_freq)} rad/s"
    return {"norms.json": _dump(rep.to_dict())}, text


def cmd_couple(cfg: RunConfig) -> tuple[dict[str, str], str]:
    subs, topo, _ = _load_topology(cfg.inputs["topology"])
    if subs is None:
        raise ValueError("topology lists no subsystems")
    sys_c = interconnect(subs, topo)
    data = model_to_dict(sys_c)
    lines = [f"coupled order {sys_c.n}, {sys_c.p} inputs, {sys_c.p_out} outputs",
             f"stable: {'yes' if is_stable(sys_c) else 'no'}"]
    if cfg.options.get("certify"):
        cert = is_passive(sys_c, check_minimal=False)
        data.update(Xi=None if cert.Xi is None else cert.Xi.X.tolist(),
                    residual=cert.max_eig_residual)
        lines.append(f"passive: {'yes' if cert.feasible else 'no'} "
                     f"(LMI residual {_g(cert.max_eig_residual)})")
    return {"coupled.json": _dump(data)}, "\n".join(lines)


def cmd_bench_beam(cfg: RunConfig) -> tuple[dict[str, str], str]:
    opts = BenchmarkOptions(rotation_sign=cfg.options.get("rotation_sign", 1))
    rep = run_benchmark(orders=cfg.orders or (12, 12),
                        methods=[m.upper() for m in (cfg.options.get("methods") or METHODS)],
                        options=opts)
    return rep.files(svg=cfg.options.get("svg", False)), rep.table()


COMMANDS = {"reduce": cmd_reduce, "analyze": cmd_analyze, "couple": cmd_couple,
            "bench-beam": cmd_bench_beam}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="structmor", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="reduce a model or an interconnection")
    p.add_argument("--method", required=True,
                   choices=sorted(SINGLE_METHODS | STRUCTURED_METHODS))
    p.add_argument("--variant", help="PXi/PiQ for mgbt, Primal/Dual for pibt")
    p.add_argument("--model", help="model JSON (single-system methods)")
    p.add_argument("--topology", help="topology JSON (isbt, pibt)")
    p.add_argument("--order", type=int, help="reduced order (single-system methods)")
    p.add_argument("--orders", help="comma-separated subsystem orders")
    p.add_argument("--out", default="reduced", help="output directory")

    p = sub.add_parser("analyze", help="error norms between two models")
    p.add_argument("model")
    p.add_argument("reference")
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--f-min", type=float, default=1.0)
    p.add_argument("--f-max", type=float, default=1e5)
    p.add_argument("--out", default="analysis", help="directory for norms.json")

    p = sub.add_parser("couple", help="build the coupled model of a topology")
    p.add_argument("topology")
    p.add_argument("--certify", action="store_true", help="also certify passivity")
    p.add_argument("--out", default="coupled", help="output directory")

    p = sub.add_parser("bench-beam", help="run the two-beam benchmark")
    p.add_argument("--orders", default="12,12")
    p.add_argument("--methods", default=",".join(m.lower() for m in METHODS))
    p.add_argument("--rotation-sign", type=int, choices=(1, -1), default=1,
                   help="sign convention of the right beam's interface rotation")
    p.add_argument("--svg", action="store_true", help="also write SVG plots")
    p.add_argument("--out", default="bench-beam", help="output directory")
    return ap


def _config(args: argparse.Namespace) -> RunConfig:
    inputs, options, orders = {}, {}, []
    if args.command == "reduce":
        inputs = {k: getattr(args, k) for k in ("model", "topology") if getattr(args, k)}
        orders = [args.order] if args.order is not None else _parse_orders(args.orders)
    elif args.command == "analyze":
        inputs = {"model": args.model, "reference": args.reference}
        options = {"points": args.points, "f_min": args.f_min, "f_max": args.f_max}
    elif args.command == "couple":
        inputs = {"topology": args.topology}
        options = {"certify": args.certify}
    else:
        orders = _parse_orders(args.orders)
        methods = [m.strip().upper() for m in args.methods.split(",") if m.strip()]
        for m in methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        options = {"methods": methods, "svg": args.svg, "rotation_sign": args.rotation_sign}
    return RunConfig(args.command, inputs, getattr(args, "method", None),
                     getattr(args, "variant", None), orders, args.out, args.seed, options)


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                 "exit_code": code}) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("STRUCTMOR_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        np.random.seed(cfg.seed)
        files, text = COMMANDS[cfg.command](cfg)
    except InputError as exc:
        return _fail(1, exc)
    except OSError as exc:
        return _fail(1, exc)
    except PRECONDITION_ERRORS as exc:
        return _fail(2, exc)
    try:
        if cfg.out is not None:
            _write_all(Path(cfg.out), files)
    except OSError as exc:
        return _fail(1, exc)
    print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
