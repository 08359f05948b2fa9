"""Jacobi <-> Verblunsky coefficient maps, certification and m-functions.

Odd and even coefficients are coupled to the Jacobi parameters by

    b_{n+1}   = (1 - g_{2n-1}) g_{2n} - (1 + g_{2n-1}) g_{2n-2}
    a_{n+1}^2 = (1 - g_{2n-1}) (1 - g_{2n}^2) (1 + g_{2n+1})

with the sentinel g_{-1} = -1 (g_{-2} only ever appears multiplied by zero).
A solution with every g in (-1, 1) exists exactly when the spectrum lies in
[-2, 2]; a finite run that stays inside only certifies the sites it reached.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import DEFAULT_TOL, JacobiCoeffs, Tolerances, as_jacobi, json_floats

CERTIFIED, VIOLATED, INDETERMINATE = "certified", "violated", "indeterminate"
_TINY = 1e3 * np.finfo(float).eps


@dataclass(frozen=True)
class CertResult:
    """Outcome of running the coefficient recursion over N sites.

    ``index`` is the first gamma index that left (-1 + margin, 1 - margin)
    (violated) or whose divisor underflowed (indeterminate); for a certified
    run it is None.  ``margin`` is 1 - max |gamma| over the accepted prefix.
    """

    status: str
    N: int
    gamma: np.ndarray
    index: int | None = None
    value: float | None = None
    margin: float = 1.0

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    def to_json(self) -> str:
        head = {"status": self.status, "N": self.N}
        if self.index is not None:
            head["index"] = self.index
        if self.value is not None and math.isfinite(self.value):
            head["value"] = float("%.17g" % self.value)
        head["margin"] = float("%.17g" % self.margin)
        body = json.dumps(head)[:-1]
        return body + ', "gamma": ' + json_floats(self.gamma) + "}"


@njit(cache=True)
def _gamma_run(a, b, N, margin, tiny):
    # returns (gamma, count, status code, bad index); status 0 ok, 1 violated, 2 indeterminate
    g = np.empty(2 * N)
    gm1 = -1.0  # gamma_{2n-1}
    gm2 = 0.0   # gamma_{2n-2}, irrelevant at n = 0
    lim = 1.0 - margin
    for n in range(N):
        d = 1.0 - gm1
        if d < tiny:
            return g, 2 * n, 2, 2 * n
        g2n = (b[n] + (1.0 + gm1) * gm2) / d
        g[2 * n] = g2n
        if not (abs(g2n) < lim):
            return g, 2 * n + 1, 1, 2 * n
        e = 1.0 - g2n * g2n
        if e < tiny:
            return g, 2 * n + 1, 2, 2 * n + 1
        g2n1 = a[n] * a[n] / (d * e) - 1.0
        g[2 * n + 1] = g2n1
        if not (abs(g2n1) < lim):
            return g, 2 * n + 2, 1, 2 * n + 1
        gm2 = g2n
        gm1 = g2n1
    return g, 2 * N, 0, -1


def gamma_from_jacobi(J, N: int | None = None, tol: Tolerances = DEFAULT_TOL) -> CertResult:
    """Run the coefficient recursion over sites 1..N.

    Computes gamma_0 .. gamma_{2N-1} from a(1..N), b(1..N) and stops at the
    first coefficient with |gamma| >= 1 - tol.gamma_margin.  A violation
    proves that the spectrum is not contained in [-2, 2]; a certified run
    only says that no violation occurred up to N.
    """
    J = as_jacobi(J)
    N = len(J) if N is None else int(N)
    if N < 1 or N > len(J):
        raise ValueError(f"need 1 <= N <= {len(J)}, got {N}")
    g, count, code, bad = _gamma_run(J.a, J.b, N, tol.gamma_margin, _TINY)
    gamma = np.array(g[:count])
    gamma.setflags(write=False)
    ok = gamma[:-1] if code == 1 else gamma
    margin = 1.0 - float(np.abs(ok).max()) if ok.size else 1.0
    if code == 0:
        return CertResult(CERTIFIED, N, gamma, margin=margin)
    value = float(g[bad]) if code == 1 else None
    return CertResult(VIOLATED if code == 1 else INDETERMINATE, N, gamma,
                      index=int(bad), value=value, margin=margin)


def certify(V, N: int | None = None, tol: Tolerances = DEFAULT_TOL) -> CertResult:
    """Certification of a potential or Jacobi matrix, zero-padded to N sites."""
    J = as_jacobi(V)
    if N is not None and N > len(J):
        J = J.padded(N)
    return gamma_from_jacobi(J, N, tol)


def jacobi_from_gamma(gamma) -> JacobiCoeffs:
    """Inverse map: 2M coefficients give a(1..M), b(1..M)."""
    g = np.asarray(gamma, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise ValueError("need at least gamma_0, gamma_1")
    if g.size % 2:
        raise ValueError("odd-length gamma leaves the last a undetermined; pass 2M values")
    if np.any(np.abs(g) >= 1.0):
        raise ValueError("all coefficients must lie in (-1, 1)")
    even, odd = g[0::2], g[1::2]
    odd_prev = np.concatenate([[-1.0], odd[:-1]])   # gamma_{2n-1}
    even_prev = np.concatenate([[0.0], even[:-1]])  # gamma_{2n-2}
    b = (1.0 - odd_prev) * even - (1.0 + odd_prev) * even_prev
    a = np.sqrt((1.0 - odd_prev) * (1.0 - even * even) * (1.0 + odd))
    return JacobiCoeffs(a, b)


def schur_step2(J, tol: Tolerances = DEFAULT_TOL) -> JacobiCoeffs:
    """Jacobi matrix of the measure after two Schur iterations.

    Only the first row changes: b -> kappa^2 b_2 + (kappa^2 - 1) b_1 and
    a -> kappa a_2 with kappa^2 = 2 / (1 - gamma_1); the tail from b_3, a_3
    on is copied.  The Verblunsky sequence shifts left by two.
    """
    J = as_jacobi(J)
    if len(J) < 2:
        raise ValueError("need at least two sites")
    head = gamma_from_jacobi(J, 1, tol)
    if head.status != CERTIFIED:
        raise ArithmeticError(f"gamma_0/gamma_1 not admissible ({head.status})")
    g1 = head.gamma[1]
    if 1.0 - g1 < _TINY:
        raise ArithmeticError("1 - gamma_1 underflows")
    k2 = 2.0 / (1.0 - g1)
    a = np.concatenate([[math.sqrt(k2) * J.a[1]], J.a[2:]])
    b = np.concatenate([[k2 * J.b[1] + (k2 - 1.0) * J.b[0]], J.b[2:]])
    return JacobiCoeffs(a, b)


@dataclass(frozen=True)
class MFunctionEval:
    z: complex
    value: complex
    depth: int


def free_m(z: complex) -> complex:
    """m-function of the free half-line operator: root of m^2 + z m + 1 = 0 with |m| < 1."""
    z = complex(z)
    r = np.sqrt(z * z - 4.0 + 0j)
    m1, m2 = (-z + r) / 2.0, (-z - r) / 2.0
    return complex(m1 if abs(m1) < abs(m2) else m2)


def band_distance(z: complex) -> float:
    z = complex(z)
    return abs(complex(min(max(z.real, -2.0), 2.0), 0.0) - z)


def m_function(J, z: complex, depth: int | None = None,
               tol: Tolerances = DEFAULT_TOL) -> MFunctionEval:
    """m_0(z) = <delta_1, (J - z)^-1 delta_1> by a backward continued fraction.

    The fraction m^(j) = 1 / (-z + b_{j+1} - a_{j+1}^2 m^(j+1)) is seeded at
    ``depth`` with the free m-function, which is exact whenever J is free
    beyond that depth.
    """
    J = as_jacobi(J)
    depth = len(J) if depth is None else int(depth)
    if depth < 1 or depth > len(J):
        raise ValueError(f"need 1 <= depth <= {len(J)}")
    z = complex(z)
    if band_distance(z) < 10 * tol.eq_tol:
        raise ValueError("z too close to [-2, 2]")
    m = free_m(z)
    a, b = J.a, J.b
    for j in range(depth - 1, -1, -1):
        m = 1.0 / (-z + b[j] - a[j] * a[j] * m)
    return MFunctionEval(z, complex(m), depth)


def m2_from_m0(J, z: complex, m0: complex) -> complex:
    """m-function after two Schur steps, expressed through m_0 and (a_1, b_1)."""
    J = as_jacobi(J)
    a1, b1 = J.a[0], J.b[0]
    z = complex(z)
    return ((4 - b1 ** 2 - a1 ** 2) / a1 ** 2) * ((z - b1) * m0 + 1) / ((z * z - 4) * m0 + (z + b1))
