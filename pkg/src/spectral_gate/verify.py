"""Corpus-driven verification run behind ``spectral-gate verify-all``.

A corpus is a JSON object ``{"entries": [...]}``; each entry names a
generator (or a file) and optional expectations.  Discrete entries go
through certification, the coefficient/potential bound suites, the Sturm
oracle, the edge-growth check and the Prüfer dual path.  Continuum entries
go through integration, the Gamma bound suite, the decomposition and the
continuum Prüfer dual path.  Entries marked ``"diagnostic": true`` are
reported but never fail the run.
"""
from __future__ import annotations

import hashlib
import json
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import verify_gamma_bounds, verify_potential_bounds
from .continuum import (ContinuumPotential, continuum_decompose, continuum_prufer,
                        integrate_uv, sparse_example, verify_continuum_bounds)
from .core import (DEFAULT_TOL, FLOAT_FMT, JacobiCoeffs, Potential, Tolerances, gen_alternating,
                   gen_extremal, gen_wvn, load_potential)
from .eigenfunctions import edge_growth_check, edge_solutions, node_signs, solve
from .oracle import eig_count_above, first_outside_truncation
from .prufer import evolve
from .verblunsky import CERTIFIED, VIOLATED, certify

PRUFER_N = 10_000
PRUFER_ENERGIES = 10
DUAL_TOL = 1e-8
RICCATI_TOL = 1e-5
CONT_DUAL_TOL = 1e-6


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if x is None:
        return None
    x = float(x)
    return float(FLOAT_FMT % x) if math.isfinite(x) else str(x)


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed),
                **{k: _num(v) if not isinstance(v, (str, list, dict)) else v
                   for k, v in sorted(self.detail.items())}}


@dataclass
class EntryResult:
    name: str
    kind: str
    status: str
    checks: list
    diagnostic: bool = False

    @property
    def ok(self) -> bool:
        return self.diagnostic or self.status in ("pass", "expected-violation")

    def to_dict(self):
        return {"name": self.name, "kind": self.kind, "status": self.status,
                "diagnostic": self.diagnostic, "checks": [c.to_dict() for c in self.checks]}


# ------------------------------------------------------------------ corpus

def random_certified(count: int, seed: int = 0, max_len: int = 8, amp: float = 0.3,
                     N: int = 10_000) -> list[Potential]:
    """Short random potentials with entries in [-amp, amp], kept only if certified."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        V = Potential(rng.uniform(-amp, amp, int(rng.integers(1, max_len + 1))))
        if certify(V, N).certified:
            out.append(V)
    return out


def default_corpus() -> dict:
    entries = [{"name": "free", "generator": "zero"}]
    entries += [{"name": f"extremal_{n:02d}", "generator": "extremal", "params": {"n": n}}
                for n in range(1, 51)]
    entries += [{"name": f"alternating_{lam:g}", "generator": "alternating", "params": {"lam": lam}}
                for lam in (0.5, 0.9, 1.0)]
    entries += [{"name": f"alternating_{lam:g}", "generator": "alternating", "params": {"lam": lam},
                 "expect": "violated"} for lam in (1.1, 1.5)]
    entries.append({"name": "random", "generator": "random",
                    "params": {"count": 200, "seed": 0}, "N": 10_000})
    for i, expr in enumerate(["0", "0.3*sin(x)/(1+x)", "-0.3*sin(x)/(1+x)", "0.5*exp(-x)",
                              "-0.5*exp(-x)", "0.2*cos(2*x)/sqrt(1+x)"]):
        entries.append({"name": f"continuum_{i}", "kind": "continuum", "expr": expr})
    entries.append({"name": "continuum_sparse", "kind": "continuum", "generator": "sparse",
                    "x_max": 10.0, "strict": False, "diagnostic": True})
    return {"N": 100_000, "entries": entries}


def _discrete_from(entry: dict, N: int, base: Path | None):
    gen = entry.get("generator")
    p = entry.get("params", {})
    if "path" in entry:
        path = Path(entry["path"])
        if base is not None and not path.is_absolute():
            path = base / path
        return [(entry["name"], load_potential(path))]
    if gen == "zero":
        return [(entry["name"], Potential(np.zeros(N)))]
    if gen == "alternating":
        return [(entry["name"], gen_alternating(float(p["lam"]), N))]
    if gen == "extremal":
        return [(entry["name"], gen_extremal(int(p["n"])))]
    if gen == "wvn":
        return [(entry["name"], gen_wvn(float(p["alpha"]), N)[0])]
    if gen == "delta":
        return [(entry["name"], Potential([float(p.get("strength", 1.0))]))]
    if gen == "random":
        Vs = random_certified(int(p.get("count", 1)), int(p.get("seed", 0)), N=N)
        w = len(str(len(Vs)))
        return [(f"{entry['name']}_{i:0{w}d}", V) for i, V in enumerate(Vs)]
    raise ValueError(f"unknown generator {gen!r} in entry {entry.get('name')!r}")


def _continuum_from(entry: dict, base: Path | None) -> ContinuumPotential:
    if entry.get("generator") == "sparse":
        return sparse_example()
    if "path" in entry:
        path = Path(entry["path"])
        if base is not None and not path.is_absolute():
            path = base / path
        return ContinuumPotential.from_csv(path)
    return ContinuumPotential.from_expr(str(entry["expr"]))


# ------------------------------------------------------------------ checks

def check_discrete(name: str, V, N: int, expect: str | None, tol: Tolerances) -> EntryResult:
    J = V if isinstance(V, JacobiCoeffs) else V.to_jacobi()
    J = J.padded(max(N, len(J)))
    checks = []
    cert = certify(J, N, tol)
    checks.append(Check("certify", cert.status == (expect or CERTIFIED),
                        {"status": cert.status, "index": cert.index, "margin": cert.margin}))
    if expect == VIOLATED:
        first = first_outside_truncation(J, N)
        checks.append(Check("oracle_outside", first is not None, {"first_truncation": first}))
        ok = all(c.passed for c in checks)
        return EntryResult(name, "discrete", "expected-violation" if ok else "fail", checks)
    if not cert.certified:
        return EntryResult(name, "discrete", "fail", checks)
    F = J.flipped()
    above, below = eig_count_above(J, N, 2.0), eig_count_above(F, N, 2.0)
    checks.append(Check("oracle_no_outside", above == 0 and below == 0,
                        {"above": above, "below": below}))
    u, w, v = edge_solutions(J, N)
    pos = bool(np.all(node_signs(u, tol) > 0) and np.all(node_signs(v, tol) > 0))
    checks.append(Check("edge_positive", pos))
    for lab, t in (("u", u), ("v", v)):
        rep = edge_growth_check(t)
        checks.append(Check(f"edge_growth_{lab}", rep.stable, rep.to_dict()))
    for r in verify_gamma_bounds(cert, tol=tol) + (verify_potential_bounds(J.potential(), cert, N, tol)
                                                   if J.is_schrodinger else []):
        d = {"margin": r.margin}
        if r.constant_estimate is not None:
            d["constant"] = r.constant_estimate
        checks.append(Check(r.name, r.passed, d))
    if J.is_schrodinger:
        checks.append(_prufer_dual(J.potential(), min(N, PRUFER_N)))
    ok = all(c.passed for c in checks)
    return EntryResult(name, "discrete", "pass" if ok else "fail", checks)


def _prufer_dual(V: Potential, N: int) -> Check:
    """Prüfer evolution against the direct three-term recursion at spread energies."""
    J = V.padded(N).to_jacobi()
    worst = 0.0
    for k in np.linspace(0.1, math.pi - 0.1, PRUFER_ENERGIES):
        q = evolve(V, float(k), N=N).psi()
        p = solve(J, 2 * math.cos(k), N).values()[1:]
        scale = np.sqrt(p ** 2 + np.concatenate([[0.0], p[:-1]]) ** 2)
        worst = max(worst, float(np.max(np.abs(p - q) / scale)))
    return Check("prufer_dual_path", worst <= DUAL_TOL, {"max_rel_error": worst})


def check_continuum(name: str, V: ContinuumPotential, x_max: float, h: float, k: float,
                    strict: bool, tol: Tolerances) -> EntryResult:
    checks = []
    f = integrate_uv(V, x_max, h, strict=strict)
    checks.append(Check("integrate", f.positive and f.richardson_ok,
                        {"richardson": f.richardson_error, "positive": f.positive,
                         "zero_at": f.zero_crossing[1] if f.zero_crossing else None}))
    if f.positive:
        r1, r2 = f.riccati_residuals()
        checks.append(Check("riccati", max(r1, r2) <= RICCATI_TOL, {"even": r1, "odd": r2}))
        for r in verify_continuum_bounds(f, tol):
            checks.append(Check(r.name, r.passed, {"margin": r.margin}))
        dec = continuum_decompose(f, tol)
        for r in dec.reports:
            checks.append(Check(r.name, r.passed, {"margin": r.margin}))
        p = continuum_prufer(V, k, x_max, h, decomposition=dec)
        checks.append(Check("continuum_prufer_dual", p.dual_error <= CONT_DUAL_TOL,
                            {"max_rel_error": p.dual_error, "rbound_residual_sup": p.residual_sup()}))
    ok = all(c.passed for c in checks)
    return EntryResult(name, "continuum", "pass" if ok else "fail", checks)


# -------------------------------------------------------------------- driver

@dataclass
class Report:
    entries: list

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.entries)

    def first_failure(self):
        for e in self.entries:
            if not e.ok:
                bad = next((c for c in e.checks if not c.passed), None)
                return e.name, bad.name if bad else e.status
        return None

    def to_json(self) -> str:
        body = {"passed": self.passed, "count": len(self.entries),
                "entries": [e.to_dict() for e in self.entries]}
        return json.dumps(body, indent=1, sort_keys=False)


def verify_all(corpus: dict | None = None, tol: Tolerances = DEFAULT_TOL, base: Path | None = None,
               workers: int = 4) -> Report:
    """Run every entry; results are sorted by name regardless of completion order."""
    corpus = default_corpus() if corpus is None else corpus
    if not isinstance(corpus, dict) or not isinstance(corpus.get("entries", []), list):
        raise ValueError("corpus must be an object with an 'entries' list")
    N_default = int(corpus.get("N", 100_000))
    jobs = []
    for entry in corpus.get("entries", []):
        if "name" not in entry:
            raise ValueError("every corpus entry needs a name")
        diag = bool(entry.get("diagnostic", False))
        if entry.get("kind", "discrete") == "continuum":
            V = _continuum_from(entry, base)
            args = (entry["name"], V, float(entry.get("x_max", 10.0)), float(entry.get("h", 1e-4)),
                    float(entry.get("k", 1.0)), bool(entry.get("strict", True)), tol)
            jobs.append((check_continuum, args, diag))
        else:
            N = int(entry.get("N", N_default))
            for nm, V in _discrete_from(entry, N, base):
                jobs.append((check_discrete, (nm, V, N, entry.get("expect"), tol), diag))

    def run(job):
        fn, args, diag = job
        try:
            res = fn(*args)
        except (ArithmeticError, ValueError) as err:
            res = EntryResult(args[0], "continuum" if fn is check_continuum else "discrete", "fail",
                              [Check("error", False, {"message": str(err)})])
        res.diagnostic = diag
        return res

    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        results = list(ex.map(run, jobs))
    return Report(sorted(results, key=lambda e: e.name))


# ------------------------------------------------------------------ manifest

def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: list
    inputs: dict
    tolerances: dict
    versions: dict
    wall_time: float
    outputs: dict

    @classmethod
    def build(cls, argv, inputs, outputs, tol: Tolerances, started: float) -> "RunManifest":
        import numba
        versions = {"spectral_gate": __version__, "numpy": np.__version__, "numba": numba.__version__,
                    "python": platform.python_version()}
        return cls(list(argv), {str(p): sha256(p) for p in inputs}, tol.to_dict(), versions,
                   round(time.time() - started, 3), {str(p): sha256(p) for p in outputs})

    def verify(self) -> bool:
        """Every recorded output still exists and matches its hash."""
        return all(Path(p).exists() and sha256(p) == h for p, h in self.outputs.items())

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=1, sort_keys=True))
