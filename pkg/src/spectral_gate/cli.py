"""``spectral-gate`` command line.

Exit codes: 0 pass, 1 verification failure, 2 input error.  Commands that
write files also write ``<first output>.manifest.json`` with input and
output hashes.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .core import (DEFAULT_TOL, JacobiCoeffs, Potential, Tolerances, as_jacobi, gen_alternating,
                   gen_extremal, gen_wvn, load_potential, potential_to_csv, potential_to_json)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _tol(args) -> Tolerances:
    if getattr(args, "tol", None) is None:
        return DEFAULT_TOL
    try:
        return Tolerances(**json.loads(Path(args.tol).read_text()))
    except (OSError, TypeError, ValueError) as err:
        raise InputError(f"bad tolerance file: {err}") from err


def _load(path, N: int | None = None) -> JacobiCoeffs:
    try:
        obj = load_potential(path)
    except (OSError, ValueError, KeyError, IndexError) as err:
        raise InputError(f"cannot read {path}: {err}") from err
    J = as_jacobi(obj)
    # short inputs continue with the free tail
    return J.padded(N) if N is not None and N > len(J) else J


def _emit(obj) -> None:
    sys.stdout.write((obj if isinstance(obj, str) else json.dumps(obj, indent=1)) + "\n")


def _manifest(args, inputs, outputs, tol, started) -> None:
    from .verify import RunManifest
    outputs = [p for p in outputs if p is not None]
    if not outputs:
        return
    m = RunManifest.build(sys.argv if args.argv is None else args.argv,
                          [p for p in inputs if p is not None], outputs, tol, started)
    m.write(str(outputs[0]) + ".manifest.json")


# ------------------------------------------------------------------ commands

def cmd_gen(args, tol, started) -> int:
    if args.kind == "alternating":
        V = gen_alternating(args.lam, args.n)
    elif args.kind == "wvn":
        V = gen_wvn(args.alpha, args.n)[0]
    elif args.kind == "extremal":
        V = gen_extremal(args.site, args.n)
    elif args.kind == "zero":
        V = Potential(np.zeros(args.n))
    else:
        V = Potential([args.lam])
    text = potential_to_json(V) if args.out and args.out.endswith(".json") else potential_to_csv(V)
    if args.out:
        Path(args.out).write_text(text)
        _manifest(args, [], [args.out], tol, started)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_certify(args, tol, started) -> int:
    from .verblunsky import certify
    J = _load(args.inp, args.n)
    res = certify(J, args.n, tol)
    text = res.to_json()
    if args.out:
        Path(args.out).write_text(text)
        _manifest(args, [args.inp], [args.out], tol, started)
    _emit(json.dumps({k: v for k, v in json.loads(text).items() if k != "gamma"}))
    return EXIT_OK if res.certified else EXIT_FAIL


def cmd_evolve(args, tol, started) -> int:
    from .eigenfunctions import edge_growth_check, oscillation_count, solve, solve_edge
    J = _load(args.inp, args.n)
    if args.edge is not None:
        if args.edge not in ("+2", "2", "-2"):
            raise InputError("--edge must be +2 or -2")
        t = solve_edge(J, -2 if args.edge == "-2" else 2, args.n)
    elif args.energy is not None:
        t = solve(J, args.energy, args.n)
    else:
        raise InputError("give --edge or --energy")
    summary = {"energy": t.energy, "N": t.N, "oscillations": oscillation_count(t, tol)}
    if args.edge is not None:
        summary["growth"] = edge_growth_check(t if args.edge != "-2" else t.alternated()).to_dict()
    if args.out:
        t.to_csv(args.out)
        _manifest(args, [args.inp], [args.out], tol, started)
    _emit(summary)
    return EXIT_OK


def cmd_prufer(args, tol, started) -> int:
    from .prufer import evolve
    J = _load(args.inp, args.n)
    if not J.is_schrodinger:
        raise InputError("Prüfer evolution needs a Schrödinger potential (a = 1)")
    try:
        r = evolve(J.potential(), args.k, N=args.n)
    except ValueError as err:
        raise InputError(str(err)) from err
    if args.out:
        r.to_csv(args.out)
        _manifest(args, [args.inp], [args.out], tol, started)
    _emit({"k": r.k, "N": r.N, "logR_final": float(r.logR[-1]), "theta_final": float(r.theta[-1]),
           "growth_exponent": r.growth_exponent, "r_exponent": r.r_exponent})
    return EXIT_OK


def cmd_bounds(args, tol, started) -> int:
    from .bounds import all_passed, verify_gamma_bounds, verify_potential_bounds
    from .verblunsky import certify
    J = _load(args.inp, args.n)
    cert = certify(J, args.n, tol)
    if not cert.certified:
        _emit({"status": cert.status, "index": cert.index, "bounds": []})
        return EXIT_FAIL
    reps = verify_gamma_bounds(cert, tol=tol)
    if J.is_schrodinger:
        reps += verify_potential_bounds(J.potential(), cert, args.n, tol)
    if args.report:
        Path(args.report).write_text(json.dumps([r.to_dict() for r in reps], indent=1))
        _manifest(args, [args.inp], [args.report], tol, started)
    _emit([{"name": r.name, "passed": r.passed, "margin": r.margin} for r in reps])
    return EXIT_OK if all_passed(reps) else EXIT_FAIL


def cmd_eig(args, tol, started) -> int:
    from .core import json_floats
    from .oracle import eigs_outside, spectrum
    J = _load(args.inp, args.n)
    if args.outside_only:
        text = eigs_outside(J, args.n).to_json()
    else:
        text = '{"eigenvalues": %s}' % json_floats(spectrum(J, args.n).eigenvalues)
    if args.out:
        Path(args.out).write_text(text)
        _manifest(args, [args.inp], [args.out], tol, started)
    _emit(text)
    return EXIT_OK


def cmd_continuum(args, tol, started) -> int:
    from .continuum import (ContinuumPotential, StepSizeError, ZeroCrossing, continuum_decompose,
                            continuum_prufer, integrate_uv, verify_continuum_bounds)
    src = args.potential
    inputs = []
    try:
        if Path(src).is_file():
            V = ContinuumPotential.from_csv(src)
            inputs.append(src)
        else:
            V = ContinuumPotential.from_expr(src)
    except (OSError, ValueError, TypeError, SyntaxError) as err:
        raise InputError(f"bad potential {src!r}: {err}") from err
    if not (args.xmax > 0 and 0 < args.h < args.xmax):
        raise InputError("need 0 < h < xmax")
    try:
        f = integrate_uv(V, args.xmax, args.h, strict=True)
    except ZeroCrossing as err:
        _emit({"status": "zero_crossing", "which": err.which, "x": err.x})
        return EXIT_FAIL
    except StepSizeError as err:
        _emit({"status": "step_size", "detail": str(err)})
        return EXIT_FAIL
    reps = verify_continuum_bounds(f, tol)
    dec = continuum_decompose(f, tol)
    reps += dec.reports
    p = continuum_prufer(V, args.k, args.xmax, args.h, decomposition=dec)
    r1, r2 = f.riccati_residuals()
    if args.out:
        f.to_csv(args.out)
        _manifest(args, inputs, [args.out], tol, started)
    ok = all(r.passed for r in reps)
    _emit({"status": "pass" if ok else "fail", "richardson_error": f.richardson_error,
           "riccati_residuals": [r1, r2], "q_l1": dec.q_l1, "prufer_dual_error": p.dual_error,
           "rbound_residual_sup": p.residual_sup(),
           "bounds": [{"name": r.name, "passed": r.passed, "margin": r.margin} for r in reps]})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_all(args, tol, started) -> int:
    from .verify import verify_all
    corpus, base, inputs = None, None, []
    if args.corpus:
        try:
            corpus = json.loads(Path(args.corpus).read_text())
        except (OSError, ValueError) as err:
            raise InputError(f"cannot read corpus: {err}") from err
        base = Path(args.corpus).resolve().parent
        inputs.append(args.corpus)
    try:
        rep = verify_all(corpus, tol, base=base, workers=args.workers)
    except (OSError, KeyError, TypeError, ValueError) as err:
        raise InputError(f"bad corpus entry: {err}") from err
    text = rep.to_json()
    if args.report:
        Path(args.report).write_text(text + "\n")
        _manifest(args, inputs, [args.report], tol, started)
    else:
        sys.stdout.write(text + "\n")
    fail = rep.first_failure()
    if fail:
        sys.stderr.write(f"first failure: {fail[0]}: {fail[1]}\n")
        return EXIT_FAIL
    sys.stderr.write(f"all {len(rep.entries)} entries passed\n")
    return EXIT_OK


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spectral-gate", description=__doc__.splitlines()[0])
    p.add_argument("--tol", help="JSON file with eq_tol / gamma_margin / osc_zero_tol")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated potential")
    g.add_argument("--kind", choices=["alternating", "wvn", "extremal", "zero", "delta"], required=True)
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--lam", type=float, default=1.0, help="alternating / delta strength")
    g.add_argument("--alpha", type=float, default=0.75, help="wvn amplitude")
    g.add_argument("--site", type=int, default=1, help="extremal site")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    def with_input(sp, n_default=100_000):
        sp.add_argument("--in", dest="inp", required=True)
        sp.add_argument("--n", type=int, default=n_default)
        return sp

    c = with_input(sub.add_parser("certify", help="Verblunsky certification"))
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    e = with_input(sub.add_parser("evolve", help="solution trace at an edge or energy"))
    e.add_argument("--edge")
    e.add_argument("--energy", type=float)
    e.add_argument("--out")
    e.set_defaults(func=cmd_evolve)

    pr = with_input(sub.add_parser("prufer", help="discrete Prüfer evolution"))
    pr.add_argument("--k", type=float, required=True)
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_prufer)

    b = with_input(sub.add_parser("bounds", help="coefficient and potential bound suite"))
    b.add_argument("--report")
    b.set_defaults(func=cmd_bounds)

    ei = with_input(sub.add_parser("eig", help="Sturm oracle"), n_default=200)
    ei.add_argument("--outside-only", action="store_true")
    ei.add_argument("--out")
    ei.set_defaults(func=cmd_eig)

    co = sub.add_parser("continuum", help="continuum Gamma fields and bounds")
    co.add_argument("--potential", required=True, help="expression in x, or CSV x,v")
    co.add_argument("--xmax", type=float, default=10.0)
    co.add_argument("--h", type=float, default=1e-4)
    co.add_argument("--k", type=float, default=1.0)
    co.add_argument("--out")
    co.set_defaults(func=cmd_continuum)

    va = sub.add_parser("verify-all", help="run the full corpus")
    va.add_argument("--corpus", help="JSON corpus (default: built-in)")
    va.add_argument("--report")
    va.add_argument("--workers", type=int, default=4)
    va.set_defaults(func=cmd_verify_all)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_INPUT if err.code else EXIT_OK
    args.argv = None if argv is None else ["spectral-gate", *argv]
    if getattr(args, "n", 1) is not None and getattr(args, "n", 1) < 1:
        sys.stderr.write("error: --n must be positive\n")
        return EXIT_INPUT
    started = time.time()
    try:
        return args.func(args, _tol(args), started)
    except InputError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
