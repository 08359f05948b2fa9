"""Sequence types, named example potentials and shared numeric helpers.

Indexing convention: site ``n`` runs over 1, 2, ...; arrays store site ``n``
at position ``n - 1``.  Serialized files carry the explicit site index.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

FLOAT_FMT = "%.17g"


def _frozen(x, dtype=float) -> np.ndarray:
    arr = np.array(x, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds shared by the checks.

    eq_tol is the relative tolerance for identity checks, gamma_margin the
    exclusion band near +-1 for Verblunsky coefficients, and osc_zero_tol the
    relative size below which a solution value is read as a node.
    """

    eq_tol: float = 1e-9
    gamma_margin: float = 1e-12
    osc_zero_tol: float = 1e-14

    def __post_init__(self):
        for name in ("eq_tol", "gamma_margin", "osc_zero_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.eq_tol > 1e-6 or self.gamma_margin > 1e-6:
            raise ValueError("eq_tol and gamma_margin must not exceed 1e-6")

    def to_dict(self) -> dict:
        return {"eq_tol": self.eq_tol, "gamma_margin": self.gamma_margin,
                "osc_zero_tol": self.osc_zero_tol}


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Potential:
    """Real potential V(1..N)."""

    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("potential needs at least one site")
        if not np.all(np.isfinite(v)):
            raise ValueError("potential entries must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def at(self, n: int) -> float:
        """V(n), 1-based; zero beyond the stored range."""
        if n < 1:
            raise IndexError("sites start at 1")
        return float(self.values[n - 1]) if n <= self.values.size else 0.0

    def padded(self, N: int) -> "Potential":
        """Extend with zeros (free tail) or cut to exactly N sites."""
        if N <= len(self):
            return Potential(self.values[:N])
        return Potential(np.concatenate([self.values, np.zeros(N - len(self))]))

    def __neg__(self):
        return Potential(-self.values)

    def to_jacobi(self) -> "JacobiCoeffs":
        return JacobiCoeffs(np.ones(len(self)), self.values)


@dataclass(frozen=True)
class JacobiCoeffs:
    """Off-diagonal a(1..N) > 0 and diagonal b(1..N).

    a[n-1] couples sites n and n+1, so the N x N truncation uses a(1..N-1)
    while the solution recursion up to psi(N+1) uses all N.
    """

    a: np.ndarray
    b: np.ndarray
    max_abs: float = field(init=False)

    def __post_init__(self):
        a, b = _frozen(self.a), _frozen(self.b)
        if a.shape != b.shape or a.ndim != 1 or a.size < 1:
            raise ValueError("a and b must be 1-d sequences of equal positive length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("coefficients must be finite")
        if np.any(a <= 0):
            raise ValueError("off-diagonal entries must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "max_abs", float(max(a.max(), np.abs(b).max())))

    def __len__(self):
        return self.a.size

    @property
    def is_schrodinger(self) -> bool:
        return bool(np.all(self.a == 1.0))

    def potential(self) -> Potential:
        if not self.is_schrodinger:
            raise ValueError("not a Schroedinger operator (a != 1)")
        return Potential(self.b)

    def padded(self, N: int) -> "JacobiCoeffs":
        if N <= len(self):
            return JacobiCoeffs(self.a[:N], self.b[:N])
        k = N - len(self)
        return JacobiCoeffs(np.concatenate([self.a, np.ones(k)]),
                            np.concatenate([self.b, np.zeros(k)]))

    def flipped(self) -> "JacobiCoeffs":
        """Coefficients of -J conjugated by (U psi)(n) = (-1)^n psi(n): b -> -b."""
        return JacobiCoeffs(self.a, -self.b)


def as_jacobi(obj) -> JacobiCoeffs:
    if isinstance(obj, JacobiCoeffs):
        return obj
    if isinstance(obj, Potential):
        return obj.to_jacobi()
    return Potential(obj).to_jacobi()


# ---------------------------------------------------------------- generators

def gen_alternating(lam: float, N: int) -> Potential:
    """V(n) = lam * (-1)^n / n for n = 1..N."""
    if N < 1:
        raise ValueError("N must be positive")
    n = np.arange(1, N + 1, dtype=float)
    sign = np.where(np.arange(1, N + 1) % 2 == 0, 1.0, -1.0)
    return Potential(lam * sign / n)


def wvn_sign(n: np.ndarray) -> np.ndarray:
    """Sign pattern +,+,-,- for n = 1,2,3,4 (mod 4)."""
    r = np.asarray(n) % 4
    return np.where((r == 1) | (r == 2), 1.0, -1.0)


def gen_wvn(alpha: float, N: int):
    """Zero-energy eigenfunction with |psi(n)| = n^-alpha and its potential.

    Returns ``(Potential, SolutionTrace)``; psi is stored on 0..N+1 with
    psi(0) = 0 so that V(1..N) are all determined.
    """
    from .eigenfunctions import SolutionTrace

    if not alpha > 0.5:
        raise ValueError("alpha must exceed 1/2 for a square-summable psi")
    if N < 3:
        raise ValueError("N must be at least 3")
    n = np.arange(1, N + 2)
    psi = np.concatenate([[0.0], wvn_sign(n) * n.astype(float) ** (-alpha)])
    V = -(psi[2:] + psi[:-2]) / psi[1:-1]
    trace = SolutionTrace(psi, np.zeros(psi.size, dtype=np.int64), energy=0.0,
                          boundary=(0.0, float(psi[1])))
    return Potential(V), trace


def extremal_values(n: int) -> dict[int, float]:
    """Non-zero entries of the potential maximising V(n) without bound states.

    Derived from the optimal Verblunsky sequence: gamma_{2j} = 0 for
    j <= n-3, gamma_{2n-3} = -1/(2n-1), gamma_{2n-4} = -gamma_{2n-2}
    = -1/sqrt(2n), all later coefficients zero.
    """
    if n < 1:
        raise ValueError("site must be positive")
    vals = {n: math.sqrt(2.0 / n), n + 1: -math.sqrt(1.0 / (2.0 * n))}
    if n > 1:
        vals[n - 1] = -math.sqrt(n / (2.0 * (n - 1) ** 2))
    return vals


def gen_extremal(n: int, N: int | None = None) -> Potential:
    vals = extremal_values(n)
    size = max(n + 1, N or 0)
    V = np.zeros(size)
    for site, x in vals.items():
        V[site - 1] = x
    return Potential(V)


# ---------------------------------------------------------------- summation

@njit(cache=True)
def _kahan_cumsum(x):
    out = np.empty(x.size)
    s = 0.0
    c = 0.0
    for i in range(x.size):
        y = x[i] - c
        t = s + y
        c = (t - s) - y
        s = t
        out[i] = s
    return out


def cumsum(x) -> np.ndarray:
    """Partial sums; compensated (Kahan) once the length exceeds 10^3."""
    x = np.ascontiguousarray(x, dtype=float)
    if x.size <= 1000:
        return np.cumsum(x)
    return _kahan_cumsum(x)


def fsum(x) -> float:
    return math.fsum(np.asarray(x, dtype=float).tolist())


def ulp_scale(*terms) -> np.ndarray:
    return np.finfo(float).eps * sum(np.abs(t) for t in terms)


# ---------------------------------------------------------------- serialization

def _fmt(x) -> str:
    return FLOAT_FMT % x


def potential_to_csv(obj, path=None) -> str:
    """``n,v`` for a Potential, ``n,a,b`` for JacobiCoeffs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(obj, Potential):
        w.writerow(["n", "v"])
        for i, v in enumerate(obj.values, start=1):
            w.writerow([i, _fmt(v)])
    else:
        w.writerow(["n", "a", "b"])
        for i, (a, b) in enumerate(zip(obj.a, obj.b), start=1):
            w.writerow([i, _fmt(a), _fmt(b)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def json_floats(xs) -> str:
    """JSON array literal with every float at 17 significant digits."""
    return "[" + ", ".join(_fmt(x) for x in xs) + "]"


def potential_to_json(obj, path=None) -> str:
    J = as_jacobi(obj)
    text = '{"n0": 1, "a": %s, "b": %s}' % (json_floats(J.a), json_floats(J.b))
    if path is not None:
        Path(path).write_text(text)
    return text


def _check_indices(idx, n0=1):
    if list(idx) != list(range(n0, n0 + len(idx))):
        raise ValueError("site indices must be consecutive starting at 1")


def load_potential(path) -> Potential | JacobiCoeffs:
    """Read CSV (``n,v`` or ``n,a,b``) or JSON ({"n0":1,"a":..,"b":..})."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        obj = json.loads(text)
        if obj.get("n0", 1) != 1:
            raise ValueError("n0 must be 1")
        if "v" in obj:
            return Potential(obj["v"])
        J = JacobiCoeffs(obj["a"], obj["b"])
        return J.potential() if J.is_schrodinger else J
    rows = list(csv.reader(io.StringIO(text)))
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    _check_indices([int(r[0]) for r in body])
    if header == ["n", "v"]:
        return Potential([float(r[1]) for r in body])
    if header == ["n", "a", "b"]:
        J = JacobiCoeffs([float(r[1]) for r in body], [float(r[2]) for r in body])
        return J.potential() if J.is_schrodinger else J
    raise ValueError(f"unrecognised header {header}")
