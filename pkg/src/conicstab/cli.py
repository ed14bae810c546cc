"""Command-line front end.

Exit codes: 0 certified (or success), 2 refuted, 3 unknown or no verdict,
1 input or usage error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass

import numpy as np

from . import serialize
from .certify import (certify, certify_quadratic, lorentz_representation, scale_certify,
                      scaled_feasible, verify_certificate)
from .errors import ConicStabError, SchemaError
from .model import QuadPoly
from .refute import Rejection, check_witness, hyperbolicity_sample, minimize_interior_zero
from .sdp import SolverOptions
from .verdict import Certified, NoCounterexample, Refuted, Unknown

EXIT_OK, EXIT_INPUT, EXIT_REFUTED, EXIT_UNKNOWN = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    input: str
    cone: str | None = None
    sigma: str = "auto"
    tol: float | None = None
    max_iter: int | None = None
    seed: int = 0
    samples: int = 1000
    witness: str | None = None
    trace_cap: float | None = None
    json: str | None = None
    point: str | None = None
    verbose: int = 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conicstab",
                                     description="Certify or refute conic stability of polynomials.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("certify", "search for a containment certificate"),
                        ("refute", "check a witness or sample for one"),
                        ("scale", "maximize the cone scaling factor nu"),
                        ("repr", "determinantal representation of a quadratic"),
                        ("eval", "evaluate the polynomial at a point")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("input", help="problem document (JSON)")
        p.add_argument("--cone", help="psd:m | orthant:n | lorentz:n | file:PATH (overrides the document)")
        p.add_argument("--sigma", choices=["auto", "+1", "-1"], default="auto")
        p.add_argument("--tol", type=float, help="solver feasibility tolerance (default 1e-8)")
        p.add_argument("--max-iter", type=int, help="interior-point iteration cap (default 200)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--witness", help="witness document {\"z\": {\"re\": [...], \"im\": [...]}}")
        p.add_argument("--trace-cap", type=float, help="trace bound of the strict feasibility problem")
        p.add_argument("--json", help="write the machine-readable document here")
        p.add_argument("--point", help="comma separated complex numbers, e.g. 1+2j,0,1j")
        p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def _options(cfg: RunConfig) -> SolverOptions:
    opts = SolverOptions()
    if cfg.tol is not None:
        if cfg.tol <= 0:
            raise SchemaError("--tol must be positive")
        opts.feas_tol = cfg.tol
    if cfg.max_iter is not None:
        if cfg.max_iter <= 0:
            raise SchemaError("--max-iter must be positive")
        opts.max_iter = cfg.max_iter
    return opts


def _sigmas(cfg: RunConfig):
    return {"auto": (1, -1), "+1": (1,), "-1": (-1,)}[cfg.sigma]


def _load(cfg: RunConfig):
    try:
        with open(cfg.input, encoding="utf-8") as fh:
            doc = serialize.loads(fh.read(), cfg.input)
    except OSError as exc:
        raise SchemaError(f"{cfg.input}: {exc.strerror}") from None
    f, K = serialize.decode_problem(doc, cfg.input)
    if cfg.cone:
        K = serialize.parse_cone_selector(cfg.cone)
        if K.n != f.n:
            raise SchemaError(f"--cone: cone has {K.n} variables, polynomial {f.n}")
    return f, K


def _need_cone(K):
    if K is None:
        raise SchemaError("no cone given: add a 'cone' field or pass --cone")
    return K


def _fmt(x) -> str:
    return repr(float(x))


def _emit(cfg: RunConfig, doc: dict):
    if cfg.json:
        with open(cfg.json, "w", encoding="utf-8") as fh:
            fh.write(serialize.dumps(doc) + "\n")


def _witness_doc(w) -> dict:
    return {"z": serialize.encode_vector(w.z), "kind": w.kind, "f_residual": w.f_residual,
            "interior_margin": w.interior_margin}


def verdict_document(verdict, K) -> dict:
    if isinstance(verdict, Certified):
        return {"verdict": "certified", "route": verdict.route,
                "certificate": serialize.encode_certificate(verdict.certificate, K, verdict.targets,
                                                            verdict.representation)}
    if isinstance(verdict, Refuted):
        return {"verdict": "refuted", "witness": _witness_doc(verdict.witness),
                "diagnostics": _plain(verdict.diagnostics)}
    return {"verdict": "unknown", "diagnostics": _plain(verdict.diagnostics)}


def _plain(obj):
    """Diagnostics with numpy values made JSON friendly."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    return obj


def exit_code(verdict) -> int:
    if isinstance(verdict, Certified):
        return EXIT_OK
    if isinstance(verdict, Refuted):
        return EXIT_REFUTED
    return EXIT_UNKNOWN


def _summary(verdict, out):
    if isinstance(verdict, Certified):
        c = verdict.certificate
        print(f"certified (route {verdict.route}): sigma = {c.sigma:+d}, nu = {_fmt(c.nu)}", file=out)
        print(f"  Choi matrix {c.C.shape[0]}x{c.C.shape[0]}, min eigenvalue {_fmt(c.min_eig)}, "
              f"residual {_fmt(c.residual)}, verified {c.verified}", file=out)
        if verdict.representation is not None:
            r = verdict.representation
            print(f"  ell = {r.ell.tolist()}, det D(z) = {_fmt(r.factor)} * ell(z)^(n-2) * z^T A z", file=out)
    elif isinstance(verdict, Refuted):
        w = verdict.witness
        print(f"refuted: witness z = {w.z.tolist()}", file=out)
        print(f"  |f(z)| = {_fmt(w.f_residual)}, interior margin of Im z = {_fmt(w.interior_margin)}", file=out)
    else:
        print("unknown: no certificate and no witness", file=out)
        for k, v in verdict.diagnostics.items():
            print(f"  {k}: {v}", file=out)


def _cmd_certify(cfg, out):
    f, K = _load(cfg)
    K = _need_cone(K)
    verdict = certify(f, K, sigmas=_sigmas(cfg), trace_cap=cfg.trace_cap, options=_options(cfg))
    _summary(verdict, out)
    _emit(cfg, verdict_document(verdict, K))
    return exit_code(verdict)


def _cmd_refute(cfg, out):
    f, K = _load(cfg)
    K = _need_cone(K)
    if cfg.samples <= 0:
        raise SchemaError("--samples must be positive")
    if cfg.witness:
        with open(cfg.witness, encoding="utf-8") as fh:
            z = serialize.decode_witness(serialize.loads(fh.read(), cfg.witness), cfg.witness)
        if z.shape != (f.n,):
            raise SchemaError(f"{cfg.witness}.z: expected length {f.n}, got {z.size}")
        w = check_witness(f, K, z)
        if isinstance(w, Rejection):
            print(f"witness rejected: {w.reason}", file=out)
            _emit(cfg, {"verdict": "unknown", "rejection": w.reason, "f_residual": w.f_residual,
                        "interior_margin": w.interior_margin})
            return EXIT_UNKNOWN
        verdict = Refuted(w, {"route": "user witness"})
    else:
        result = hyperbolicity_sample(f, K, samples=cfg.samples, seed=cfg.seed)
        if isinstance(result, NoCounterexample):
            w = minimize_interior_zero(f, K, multistarts=20, seed=cfg.seed)
            if w is None:
                print(f"no counterexample in {result.samples} samples and 20 local searches "
                      f"(largest relative imaginary part {result.max_imag_ratio:.3e})", file=out)
                _emit(cfg, {"verdict": "unknown", "samples": result.samples,
                            "degree_drops": result.degree_drops,
                            "max_imag_ratio": result.max_imag_ratio, "search_runs": result.search_runs})
                return EXIT_UNKNOWN
            result = Refuted(w, {"route": "local search"})
        verdict = result
    _summary(verdict, out)
    _emit(cfg, verdict_document(verdict, K))
    return EXIT_REFUTED


def _cmd_scale(cfg, out):
    f, K = _load(cfg)
    K = _need_cone(K)
    if isinstance(f, QuadPoly):
        raise SchemaError(f"{cfg.input}.kind: scale needs a determinantal target pencil")
    try:
        res = scale_certify(f.pencil.homogeneous(), K, options=_options(cfg))
    except ConicStabError as exc:
        print(f"scaling failed: {type(exc).__name__}: {exc}", file=out)
        _emit(cfg, {"verdict": "unknown", "error": f"{type(exc).__name__}: {exc}"})
        return EXIT_UNKNOWN
    cert = res.certificate
    half_ok = scaled_feasible(res.cone, res.targets, res.nu_star / 2, options=_options(cfg))
    print(f"nu* = {_fmt(res.nu_star)}", file=out)
    print(f"  certificate verified {cert.verified}, min eigenvalue {_fmt(cert.min_eig)}, "
          f"residual {_fmt(cert.residual)}; feasible at nu*/2: {half_ok}", file=out)
    _emit(cfg, {"nu_star": res.nu_star, "feasible_at_half": half_ok, "slice_radius": res.slice_radius,
                "certificate": serialize.encode_certificate(cert, res.cone, res.targets)})
    return EXIT_OK if cert.verified else EXIT_UNKNOWN


def _cmd_repr(cfg, out):
    """Representation through a certificate when a cone certifies, else the Lorentz pencil."""
    f, K = _load(cfg)
    if not isinstance(f, QuadPoly):
        raise SchemaError(f"{cfg.input}.kind: repr needs a quadratic polynomial")
    rep, source = None, "lorentz pencil"
    if K is not None:
        verdict = certify_quadratic(f, K, sigmas=_sigmas(cfg), trace_cap=cfg.trace_cap,
                                    options=_options(cfg), search_witness=False)
        if isinstance(verdict, Certified) and verdict.representation is not None:
            rep, source = verdict.representation, "certificate"
    if rep is None:
        try:
            rep = lorentz_representation(f)
        except ConicStabError as exc:
            print(f"no determinantal representation: {type(exc).__name__}: {exc}", file=out)
            _emit(cfg, {"error": f"{type(exc).__name__}: {exc}"})
            return EXIT_UNKNOWN
    print(f"det D(z) = {_fmt(rep.factor)} * ell(z)^{f.n - 2} * (z^T A z) with ell = {rep.ell.tolist()} "
          f"(from the {source})", file=out)
    for p, m in enumerate(rep.pencil.coeffs):
        print(f"  D_{p + 1} = {m.tolist()}", file=out)
    _emit(cfg, {"source": source, "ell": rep.ell.tolist(), "factor": rep.factor,
                "pencil": [serialize.encode_matrix(m) for m in rep.pencil.coeffs],
                "diagonal_blocks_psd": rep.diagonal_blocks_psd})
    return EXIT_OK


def _cmd_eval(cfg, out):
    f, _ = _load(cfg)
    if not cfg.point:
        raise SchemaError("eval needs --point")
    try:
        z = np.array([complex(s.strip().replace(" ", "")) for s in cfg.point.split(",")])
    except ValueError as exc:
        raise SchemaError(f"--point: {exc}") from None
    if z.shape != (f.n,):
        raise SchemaError(f"--point: expected {f.n} coordinates, got {z.size}")
    value = complex(f(z))
    print(f"f(z) = {value!r}", file=out)
    _emit(cfg, {"z": serialize.encode_vector(z), "value": {"re": value.real, "im": value.imag}})
    return EXIT_OK


COMMANDS = {"certify": _cmd_certify, "refute": _cmd_refute, "scale": _cmd_scale,
            "repr": _cmd_repr, "eval": _cmd_eval}


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        return COMMANDS[cfg.command](cfg, out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def recheck_certificate(doc: dict):
    """Re-verify a certificate document; returns the verification report."""
    cert, K, targets = serialize.decode_certificate(doc)
    return verify_certificate(cert, K, targets)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items()})
    logging.basicConfig(level=logging.WARNING - 10 * min(cfg.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
