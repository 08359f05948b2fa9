"""Edge-energy solutions, node counting, and the (u, w) <-> (a, b, gamma) formulas.

``u`` solves the eigenvalue equation at E = +2 and ``w`` at E = -2, both with
psi(0) = 0, psi(1) = 1; ``v(n) = (-1)^(n-1) w(n)`` is the +2 solution for -b.
Traces are kept as mantissa/exponent pairs so that exponential growth at
off-band energies never overflows.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .core import DEFAULT_TOL, FLOAT_FMT, JacobiCoeffs, Potential, Tolerances, as_jacobi, cumsum
from .verblunsky import certify

_BIG_EXP = 512
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SolutionTrace:
    """psi(0..N+1) at a fixed energy, stored as psi = mantissa * 2**exp2."""

    psi: np.ndarray
    exp2: np.ndarray
    energy: float
    boundary: tuple

    def __post_init__(self):
        psi = np.array(self.psi, dtype=float)
        e = np.array(self.exp2, dtype=np.int64)
        if psi.shape != e.shape or psi.size < 2:
            raise ValueError("trace needs matching psi/exp2 of length >= 2")
        psi.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "exp2", e)

    def __len__(self):
        return self.psi.size

    @property
    def N(self) -> int:
        """Last site n with psi(n+1) available."""
        return self.psi.size - 2

    def values(self) -> np.ndarray:
        """Plain floats; raises if any entry is not representable."""
        with np.errstate(over="ignore"):
            out = np.ldexp(self.psi, self.exp2)
        if not np.all(np.isfinite(out)):
            raise OverflowError("trace exceeds the float range; use log_abs()/sign()")
        return out

    def sign(self) -> np.ndarray:
        return np.sign(self.psi)

    def log_abs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.psi)) + self.exp2 * _LN2

    def scaled(self, c: float) -> "SolutionTrace":
        return SolutionTrace(self.psi * c, self.exp2, self.energy,
                             (self.boundary[0] * c, self.boundary[1] * c))

    def alternated(self) -> "SolutionTrace":
        """(-1)^(n-1) psi(n): maps the -2 solution w to v."""
        n = np.arange(self.psi.size)
        sgn = np.where(n % 2 == 1, 1.0, -1.0)
        return SolutionTrace(self.psi * sgn, self.exp2, -self.energy,
                             (-self.boundary[0], self.boundary[1]))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "psi", "exp2"])
        for n, (m, e) in enumerate(zip(self.psi, self.exp2)):
            w.writerow([n, FLOAT_FMT % m, int(e)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


@njit(cache=True)
def _recurse(a, b, E, p0, p1, N, big):
    psi = np.empty(N + 2)
    ex = np.zeros(N + 2, dtype=np.int64)
    psi[0] = p0
    psi[1] = p1
    hi = 2.0 ** big
    lo = 2.0 ** (-big)
    e = 0
    a_prev = 1.0
    for n in range(1, N + 1):
        p2 = ((E - b[n - 1]) * p1 - a_prev * p0) / a[n - 1]
        if abs(p2) > hi:
            p1 *= lo
            p2 *= lo
            e += big
            psi[n] = p1
            ex[n] = e
        elif p2 != 0.0 and max(abs(p1), abs(p2)) < lo:
            p1 *= hi
            p2 *= hi
            e -= big
            psi[n] = p1
            ex[n] = e
        psi[n + 1] = p2
        ex[n + 1] = e
        p0 = p1
        p1 = p2
        a_prev = a[n - 1]
    return psi, ex


def solve(J, E: float, N: int, boundary=(0.0, 1.0)) -> SolutionTrace:
    """Forward recursion a_n psi(n+1) + a_{n-1} psi(n-1) + b_n psi(n) = E psi(n).

    a_0 is taken as 1 (only matters when psi(0) != 0).
    """
    J = as_jacobi(J)
    if N < 1 or N > len(J):
        raise ValueError(f"need 1 <= N <= {len(J)}")
    p0, p1 = float(boundary[0]), float(boundary[1])
    if p0 == 0.0 and p1 == 0.0:
        raise ValueError("boundary data must not vanish")
    psi, ex = _recurse(J.a, J.b, float(E), p0, p1, int(N), _BIG_EXP)
    return SolutionTrace(psi, ex, float(E), (p0, p1))


def solve_edge(J, sign: int, N: int) -> SolutionTrace:
    """u (sign=+2) or w (sign=-2) on 0..N+1; ``.alternated()`` of w gives v."""
    if sign not in (2, -2):
        raise ValueError("sign must be +2 or -2")
    return solve(J, float(sign), N)


def edge_solutions(J, N: int):
    """(u, w, v) for J over sites 1..N."""
    u = solve_edge(J, 2, N)
    w = solve_edge(J, -2, N)
    return u, w, w.alternated()


def node_signs(t: SolutionTrace, tol: Tolerances = DEFAULT_TOL, start: int = 1) -> np.ndarray:
    """Signs of psi(start..), with numerically vanishing entries set to 0."""
    la = t.log_abs()
    s = np.sign(t.psi).astype(np.int64)
    nb = np.full(la.shape, -np.inf)
    nb[1:] = la[:-1]
    nb[:-1] = np.maximum(nb[:-1], la[1:])
    small = la < nb + math.log(tol.osc_zero_tol)
    s[small] = 0
    return s[start:]


def oscillation_count(t: SolutionTrace, tol: Tolerances = DEFAULT_TOL) -> int:
    """Strict sign changes of psi(1..N+1); vanishing entries are skipped.

    A node at an interior site (psi(n) = 0) sits between neighbours of
    opposite sign and is therefore counted exactly once.
    """
    s = node_signs(t, tol)
    nz = s[s != 0]
    return int(np.count_nonzero(nz[1:] != nz[:-1]))


def sign_change_sites(t: SolutionTrace, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Sites m such that psi changes sign between the previous node-free site and m."""
    s = node_signs(t, tol)
    sites = np.nonzero(s)[0] + 1
    nz = s[s != 0]
    return sites[1:][nz[1:] != nz[:-1]]


# ------------------------------------------------------- reconstruction formulas

def _wronskians(u: SolutionTrace, w: SolutionTrace):
    if len(u) != len(w):
        raise ValueError("u and w must cover the same sites")
    U, Wv = u.values(), w.values()
    W = U[1:] * Wv[:-1] - U[:-1] * Wv[1:]        # W(n), n = 0..N
    Wt = U[1:] * Wv[:-1] + U[:-1] * Wv[1:]
    S = np.concatenate([[0.0], cumsum(U[1:] * Wv[1:])])  # S(n) = sum_{k<=n} u w, n = 0..N+1
    return U, Wv, W, Wt, S


def _check_nonzero(W, first, tol):
    scale = np.max(np.abs(W[first:])) if W.size > first else 1.0
    bad = np.nonzero(np.abs(W[first:]) <= tol * scale)[0]
    if bad.size:
        raise ZeroDivisionError(f"Wronskian vanishes at n = {int(bad[0]) + first}")


def jacobi_from_uw(u: SolutionTrace, w: SolutionTrace, tol: Tolerances = DEFAULT_TOL) -> JacobiCoeffs:
    """Recover a_n, b_n (n = 1..N) from u, w on 0..N+1."""
    U, Wv, W, Wt, S = _wronskians(u, w)
    N = u.N
    _check_nonzero(W, 1, tol.eq_tol)
    n = np.arange(1, N + 1)
    a = 4.0 * S[n] / W[n]
    ratio = np.zeros(N + 1)
    ratio[1:] = Wt[1:] / W[1:]                   # W~(0)/W(0) never used: S(0) = 0
    b = -2.0 / (U[n] * Wv[n]) * (ratio[n] * S[n] + ratio[n - 1] * S[n - 1])
    return JacobiCoeffs(a, b)


def gamma_from_uw(u: SolutionTrace, w: SolutionTrace, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """gamma_0 .. gamma_{2N-1} from u, w on 0..N+1."""
    U, Wv, W, Wt, S = _wronskians(u, w)
    N = u.N
    _check_nonzero(W, 1, tol.eq_tol)
    n = np.arange(N)
    g = np.empty(2 * N)
    g[0::2] = -Wt[n + 1] / W[n + 1]
    g[1::2] = -1.0 - 2.0 * S[n + 1] / (U[n + 2] * Wv[n + 2])
    return g


@dataclass(frozen=True)
class LogDerivs:
    F: np.ndarray
    G: np.ndarray


def logderivs_from_uv(u: SolutionTrace, v: SolutionTrace) -> LogDerivs:
    """F(n) = 1 - u(n+1)/u(n+2), G(n) = 1 - v(n+1)/v(n+2), n = 0..N-1."""
    def ratio(t):
        m, e = t.psi, t.exp2
        with np.errstate(divide="ignore", invalid="ignore"):
            return m[1:-1] / m[2:] * np.exp2((e[1:-1] - e[2:]).astype(float))
    return LogDerivs(1.0 - ratio(u), 1.0 - ratio(v))


def logderiv_bridge(gamma, a) -> LogDerivs:
    """F, G from the Verblunsky coefficients and a(1..N)."""
    g = np.asarray(gamma, dtype=float)
    N = g.size // 2
    a = np.asarray(a, dtype=float)[:N]
    ev, od = g[0:2 * N:2], g[1:2 * N:2]
    F = (a - 1.0 - od - ev - od * ev) / a
    G = (a - 1.0 - od + ev + od * ev) / a
    return LogDerivs(F, G)


def gamma_from_logderivs(ld: LogDerivs, a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Inverse of :func:`logderiv_bridge`."""
    F, G = np.asarray(ld.F), np.asarray(ld.G)
    a = np.asarray(a, dtype=float)[:F.size]
    den = 2.0 - F - G
    if np.any(np.abs(den) <= tol.eq_tol):
        k = int(np.nonzero(np.abs(den) <= tol.eq_tol)[0][0])
        raise ZeroDivisionError(f"2 - F - G vanishes at n = {k}")
    g = np.empty(2 * F.size)
    g[0::2] = -(F - G) / den
    g[1::2] = -a * (F + G) / 2.0 + a - 1.0
    return g


# ------------------------------------------------------------- edge growth

@dataclass(frozen=True)
class EdgeGrowthReport:
    """inf of psi(n) sqrt(n) over the final decade [N/10, N] and the one before."""

    N: int
    inf_final: float
    inf_previous: float

    @property
    def positive(self) -> bool:
        return self.inf_final > 0

    @property
    def stable(self) -> bool:
        # the bound only needs psi(n) sqrt(n) to stay away from 0
        return self.positive and self.inf_final >= 0.5 * min(self.inf_previous, 1.0)

    def to_dict(self):
        return {"N": self.N, "inf_final": self.inf_final, "inf_previous": self.inf_previous,
                "positive": self.positive, "stable": self.stable}


def edge_growth_check(t: SolutionTrace) -> EdgeGrowthReport:
    N = t.N
    n = np.arange(len(t))
    with np.errstate(over="ignore"):
        val = np.sign(t.psi) * np.exp(t.log_abs() + 0.5 * np.log(np.maximum(n, 1)))
    lo = max(N // 10, 1)
    lo2 = max(N // 100, 1)
    return EdgeGrowthReport(N, float(val[lo:N + 1].min()), float(val[lo2:lo + 1].min()))


# --------------------------------------------------- finitely many bound states

@dataclass(frozen=True)
class Reduction:
    """Result of cutting off the region where u or v still changes sign.

    status is "reduced" when the last sign change lies in the first tenth of
    the horizon, "inconclusive" otherwise (sign changes may continue beyond
    the computed window).
    """

    status: str
    k: int
    V2: Potential | None
    u_changes: np.ndarray
    v_changes: np.ndarray
    recheck: object = None


def reduce_to_no_bound_states(V, tol: Tolerances = DEFAULT_TOL, horizon: int = 100_000,
                              settle: int = 10) -> Reduction:
    """Shift V past the last sign change of u, v and patch site 1.

    V2(n) = V(n+k) + (u(k)/u(k+1)) delta_{n,1}; then u(n+k) is the +2
    solution for V2 and never changes sign.  V2 is re-certified over the
    remaining horizon.
    """
    V = V if isinstance(V, Potential) else Potential(V)
    J = V.padded(horizon).to_jacobi()
    u, w, v = edge_solutions(J, horizon)
    cu, cv = sign_change_sites(u, tol), sign_change_sites(v, tol)
    last = int(max(cu.max(initial=0), cv.max(initial=0)))
    k = last
    if k > horizon // settle:
        return Reduction("inconclusive", k, None, cu, cv)
    vals = V.padded(horizon).values
    V2 = np.array(vals[k:], dtype=float)
    if k > 0:
        um, ue = u.psi, u.exp2
        V2[0] += um[k] / um[k + 1] * 2.0 ** float(ue[k] - ue[k + 1])
    V2 = Potential(V2)
    return Reduction("reduced", k, V2, cu, cv, certify(V2, horizon - k, tol))
