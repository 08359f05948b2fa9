"""Sturm-sequence eigenvalue oracle for N x N Jacobi truncations.

Counts come from the LDL^T pivots of (E - J_N); bisection on the count
brackets individual eigenvalues.  Nothing here touches the Verblunsky
recursion, so agreement between the two is a genuine cross-check.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import FLOAT_FMT, JacobiCoeffs, as_jacobi

RESOLUTION = 1e-12
MAX_ITER = 80


@njit(cache=True)
def _sturm(a, b, N, E, tiny):
    # returns (count of eigenvalues > E, whether a pivot vanished)
    cnt = 0
    tie = False
    r = E - b[0]
    for k in range(N):
        if k > 0:
            r = (E - b[k]) - a[k - 1] * a[k - 1] / r
        if abs(r) <= tiny:
            tie = True
            r = tiny
        if r < 0.0:
            cnt += 1
    return cnt, tie


@njit(cache=True)
def _bisect(a, b, N, j, lo, hi, tiny, res, max_iter):
    # j-th largest eigenvalue (1-based) inside (lo, hi]
    for _ in range(max_iter):
        if hi - lo <= res:
            break
        mid = 0.5 * (lo + hi)
        c, _t = _sturm(a, b, N, mid, tiny)
        if c >= j:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _prep(J, N):
    J = as_jacobi(J)
    N = len(J) if N is None else int(N)
    if N < 1 or N > len(J):
        raise ValueError(f"need 1 <= N <= {len(J)}")
    return J, N


def _tiny(J: JacobiCoeffs, N: int, E: float) -> float:
    return float(np.finfo(float).tiny ** 0.5 * (1.0 + abs(E) + J.max_abs))


def gershgorin(J, N=None) -> tuple[float, float]:
    J, N = _prep(J, N)
    b = J.b[:N]
    off = np.zeros(N)
    off[:-1] += J.a[:N - 1]
    off[1:] += J.a[:N - 1]
    return float((b - off).min()), float((b + off).max())


def eig_count_above(J, N: int | None = None, E: float = 2.0) -> int:
    """Number of eigenvalues of the N x N truncation strictly above E.

    A vanishing pivot means E sits on (or numerically at) an eigenvalue of a
    leading block; the count is then taken at E + 4 ulp, with a warning if
    that changes the answer.
    """
    J, N = _prep(J, N)
    E = float(E)
    c, tie = _sturm(J.a, J.b, N, E, _tiny(J, N, E))
    if tie:
        E2 = E + 4 * np.spacing(E if E != 0 else 1.0)
        c2, _ = _sturm(J.a, J.b, N, E2, _tiny(J, N, E2))
        if c2 != c:
            warnings.warn(f"tie at E={E!r}: count {c} at E, {c2} at E+4ulp; using {c2}",
                          RuntimeWarning, stacklevel=2)
        c = c2
    return int(c)


@dataclass(frozen=True)
class TruncatedSpectrum:
    N: int
    eigenvalues: np.ndarray
    resolution: float = RESOLUTION


def _largest(J: JacobiCoeffs, N: int, count: int, floor: float) -> list[float]:
    lo, hi = gershgorin(J, N)
    hi += 1.0
    tiny = _tiny(J, N, max(abs(lo), abs(hi)))
    out = []
    for j in range(1, count + 1):
        out.append(float(_bisect(J.a, J.b, N, j, floor, hi, tiny, RESOLUTION, MAX_ITER)))
        hi = out[-1] + RESOLUTION
    return out


def spectrum(J, N: int | None = None) -> TruncatedSpectrum:
    """All N eigenvalues by bisection, increasing."""
    J, N = _prep(J, N)
    lo, _ = gershgorin(J, N)
    ev = _largest(J, N, N, lo - 1.0)
    return TruncatedSpectrum(N, np.array(sorted(ev)))


@dataclass(frozen=True)
class Outside:
    above: list
    below: list

    @property
    def empty(self) -> bool:
        return not self.above and not self.below

    def to_json(self) -> str:
        fmt = lambda xs: "[" + ", ".join(FLOAT_FMT % x for x in xs) + "]"
        return '{"above": %s, "below": %s}' % (fmt(self.above), fmt(self.below))


def eigs_outside(J, N: int | None = None) -> Outside:
    """Truncation eigenvalues above 2 and below -2, each to 1e-12."""
    J, N = _prep(J, N)
    above = _largest(J, N, eig_count_above(J, N, 2.0), 2.0)
    F = J.flipped()  # spectrum of the flip is the negated spectrum
    below = [-x for x in _largest(F, N, eig_count_above(F, N, 2.0), 2.0)]
    return Outside(sorted(above, reverse=True), sorted(below))


def first_outside_truncation(J, N_max: int | None = None) -> int | None:
    """Smallest N whose truncation has an eigenvalue outside [-2, 2].

    Counts are monotone in N by interlacing, so bisection on N is valid.
    """
    J = as_jacobi(J)
    N_max = len(J) if N_max is None else int(N_max)
    F = J.flipped()

    def hit(n):
        return eig_count_above(J, n, 2.0) > 0 or eig_count_above(F, n, 2.0) > 0

    if not hit(N_max):
        return None
    lo, hi = 0, N_max
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if hit(mid):
            hi = mid
        else:
            lo = mid
    return hi


def outside_json(res: Outside) -> dict:
    return json.loads(res.to_json())
