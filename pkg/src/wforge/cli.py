"""Command-line interface.

Exit codes: 0 success, 1 I/O or parse error, 2 domain precondition failure
(not edge, not PPT, not a witness), 3 internal tolerance failure.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NotEdgeError, NotPPTError, ToleranceFailure, WforgeError
from .io import OperatorFileError, read_operator, write_operator
from .product_search import DEFAULT_CONFIG, span_dimension
from .states import bsa_decompose, rho_b, tilde_rho_b

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_TOLERANCE = 0, 1, 2, 3
SEED_ENV = "WFORGE_SEED"


def resolve_seed(seed):
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise OperatorFileError(f"{SEED_ENV}={env!r} is not an integer")


def load_state(spec):
    """A state from a file path, ``rho_b:<b>`` or ``tilde_rho_b:<b>``."""
    for prefix, fn in (("rho_b:", rho_b), ("tilde_rho_b:", tilde_rho_b)):
        if spec.startswith(prefix):
            try:
                b = float(spec[len(prefix):])
            except ValueError:
                raise OperatorFileError(f"cannot parse b in {spec!r}")
            return fn(b), {"source": spec}
    return read_operator(spec)


def _config(args):
    return DEFAULT_CONFIG.with_(seed=resolve_seed(args.seed))


def _info(msg):
    print(msg, file=sys.stdout)


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def _witness_meta(W, extra=None):
    m = {"kind": "witness", "floor": W.floor, "zero_set_size": len(W.zero_set)}
    m.update({k: v for k, v in W.meta.items() if isinstance(v, (int, float, str))})
    m.update(extra or {})
    return m


def cmd_construct(args):
    from .witness import construct_from_edge, detects

    cfg = _config(args)
    delta, _ = load_state(args.state)
    try:
        W = construct_from_edge(delta, cfg)
    except NotEdgeError as exc:
        cert = exc.certificate
        detail = ""
        if cert is not None:
            detail = f" (verdict={cert.verdict}, method={cert.method}"
            if cert.witnesses_of_failure is not None:
                v = cert.witnesses_of_failure
                detail += f", product vector e={np.round(v.e, 6).tolist()} f={np.round(v.f, 6).tolist()}"
            detail += ")"
            if cert.verdict == "not-edge":
                detail = ": separable direction found" + detail
        print(f"not edge{detail}", file=sys.stderr)
        return EXIT_DOMAIN
    val, _ = detects(W, delta)
    write_operator(args.out, W.op, _witness_meta(W, {"source": args.state, "trace_with_source": val}))
    _info(f"epsilon1 = {W.meta['epsilon1']:.12g}")
    _info(f"tr(W delta) = {val:.12g}")
    _info(f"floor = {W.floor:.3g}")
    _info(f"zero set size = {len(W.zero_set)}")
    return EXIT_OK


def cmd_optimize(args):
    from .witness import edge_iteration, optimize, validate

    cfg = _config(args)
    op, meta = read_operator(args.witness)
    W = validate(op, cfg)
    if args.mode == "edge":
        W, trace = edge_iteration(W, cfg)
    else:
        W, trace = optimize(W, args.mode, cfg)
    for w in trace.warnings:
        _warn(w)
    if trace.terminal_status == "epsilon-exhausted" and trace.warnings:
        _warn("subtraction stopped early (epsilon-exhausted)")
    write_operator(args.out, W.op, _witness_meta(W, {"status": trace.terminal_status}))
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("iteration,lambda,floor,zero_set_size\n")
            for it, lam, floor, nz in trace.rows():
                fh.write(f"{it},{lam!r},{floor!r},{nz}\n")
    _info(f"iterations = {len(trace.steps)}")
    _info(f"status = {trace.terminal_status}")
    _info(f"zero set size = {len(W.zero_set)}")
    _info(f"zero set span = {span_dimension(W.zero_set)}")
    return EXIT_OK


def cmd_detect(args):
    from .maps import map_detects
    from .witness import detects, validate

    cfg = _config(args)
    op, _ = read_operator(args.witness)
    W = validate(op, cfg)
    rho, _ = load_state(args.state)
    val, flag = detects(W, rho)
    _info(f"tr(W rho) = {val:.12g}")
    _info(f"witness: {'detected' if flag else 'not detected'}")
    if args.via_map:
        mflag, m = map_detects(W, rho)
        _info(f"map min eigenvalue = {m:.12g}")
        _info(f"map: {'detected' if mflag else 'not detected'}")
    return EXIT_OK


def cmd_figures(args):
    from .figures import figure_rows, write_csv

    cfg = _config(args)
    which = {"1": (1,), "2": (2,), "both": (1, 2)}[args.which]
    rows = figure_rows(args.grid, which, cfg, workers=args.workers)
    write_csv(rows, args.out)
    _info(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_bsa(args):
    cfg = _config(args)
    rho, _ = load_state(args.state)
    res = bsa_decompose(rho, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if res.delta is not None:
        write_operator(out / "delta.json", res.delta, {"kind": "edge remainder", "p": res.p})
    if res.rho_sep is not None:
        write_operator(out / "rho_sep.json", res.rho_sep, {"kind": "separable part", "p": res.p})
    terms = [
        {"weight": w, "e_re": v.e.real.tolist(), "e_im": v.e.imag.tolist(),
         "f_re": v.f.real.tolist(), "f_im": v.f.imag.tolist()}
        for w, v in res.separable_terms
    ]
    summary = {
        "p": res.p,
        "status": res.status,
        "reconstruction_error": res.reconstruction_error,
        "edge_verdict": None if res.certificate is None else res.certificate.verdict,
        "terms": terms,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1))
    _info(f"p = {res.p:.12g}")
    _info(f"status = {res.status}")
    _info(f"reconstruction error = {res.reconstruction_error:.3g}")
    if res.reconstruction_error > 1e-8:
        raise ToleranceFailure(f"reconstruction error {res.reconstruction_error:.3g} > 1e-8")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="wforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: ${SEED_ENV} or 0)")
        sp.set_defaults(func=fn)
        return sp

    sp = add("construct", cmd_construct, "witness from an edge PPT state")
    sp.add_argument("--state", required=True, help="file, rho_b:<b> or tilde_rho_b:<b>")
    sp.add_argument("--out", required=True)

    sp = add("optimize", cmd_optimize, "optimize a witness")
    sp.add_argument("--witness", required=True)
    sp.add_argument("--mode", choices=("general", "nd", "edge"), default="nd")
    sp.add_argument("--out", required=True)
    sp.add_argument("--trace", help="write the iteration trace as CSV")

    sp = add("detect", cmd_detect, "evaluate a witness on a state")
    sp.add_argument("--witness", required=True)
    sp.add_argument("--state", required=True)
    sp.add_argument("--via-map", action="store_true", help="also test the positive map")

    sp = add("figures", cmd_figures, "detection-range curves as CSV")
    sp.add_argument("--which", choices=("1", "2", "both"), default="both")
    sp.add_argument("--grid", type=int, default=9)
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=1)

    sp = add("bsa", cmd_bsa, "separable + edge decomposition of a PPT state")
    sp.add_argument("--state", required=True)
    sp.add_argument("--out", required=True)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OperatorFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ToleranceFailure as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except NotPPTError as exc:
        print(f"error: not PPT: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except WforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
