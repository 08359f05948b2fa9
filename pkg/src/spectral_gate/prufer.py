"""Discrete Prüfer variables at interior energies E = 2 cos k.

With x1 = psi(n-1), x2 = (psi(n) - cos k psi(n-1)) / sin k we write
x1 = R sin(theta/2 - k), x2 = R cos(theta/2 - k), so psi(n) = R sin(theta/2).
The phase is stored as a winding number w and a reduced half-angle
h in [0, pi) with theta = 2 (w pi + h); this keeps the reconstruction exact
for long runs where theta itself grows like 2kn.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .core import FLOAT_FMT, Potential, Tolerances, DEFAULT_TOL
from .verblunsky import CERTIFIED, certify


def _check_k(k: float) -> float:
    k = float(k)
    if not 0.0 < k < math.pi:
        raise ValueError("k must lie strictly inside (0, pi)")
    return k


@dataclass(frozen=True)
class PruferState:
    """(log R, theta) at site n; theta = 2 (wind * pi + half)."""

    n: int
    k: float
    logR: float
    wind: int
    half: float

    @property
    def R(self) -> float:
        return math.exp(self.logR)

    @property
    def theta(self) -> float:
        return 2.0 * (self.wind * math.pi + self.half)


def _reduce(phase: float) -> tuple[int, float]:
    w = math.floor(phase / math.pi)
    h = phase - w * math.pi
    if h >= math.pi:  # rounding at the top edge
        w, h = w + 1, 0.0
    return w, h


def prufer_transform(pair, k: float, n: int = 1) -> PruferState:
    """State at site n from (psi(n-1), psi(n))."""
    k = _check_k(k)
    p0, p1 = float(pair[0]), float(pair[1])
    if p0 == 0.0 and p1 == 0.0:
        raise ValueError("(psi(n-1), psi(n)) must not vanish")
    s = math.sin(k)
    x1, x2 = p0, (p1 - math.cos(k) * p0) / s
    w, h = _reduce(k + math.atan2(x1, x2))
    return PruferState(n, k, math.log(math.hypot(x1, x2)), w, h)


def prufer_inverse(s: PruferState) -> tuple[float, float]:
    """(psi(n-1), psi(n)) from a state."""
    R = math.exp(s.logR) * (-1.0 if s.wind % 2 else 1.0)
    x1 = R * math.sin(s.half - s.k)
    return x1, R * math.sin(s.half)


def _step_scalar(logR, wind, half, k, sk, V):
    if V == 0.0:
        h = half + k
    else:
        t = V / sk
        sh, ch = math.sin(half), math.cos(half)
        c = ch - t * sh
        arg = t * t * sh * sh - 2.0 * t * sh * ch
        if not arg > -1.0:
            raise ArithmeticError("Prüfer amplitude ratio is not positive")
        logR += 0.5 * math.log1p(arg)
        h = math.atan2(sh, c) + k
    if h >= math.pi:
        h -= math.pi
        wind += 1
    return logR, wind, h


def prufer_step(s: PruferState, Vn: float) -> PruferState:
    """Advance one site using V(n).

    The R ratio is 1 - t sin(theta) + t^2 sin^2(theta/2) with t = V/sin k;
    the new half-angle is k + atan2(sin h, cos h - t sin h), which picks the
    branch of the cotangent relation on which psi keeps the correct sign.
    """
    logR, wind, half = _step_scalar(s.logR, s.wind, s.half, s.k, math.sin(s.k), float(Vn))
    return PruferState(s.n + 1, s.k, logR, wind, half)


@njit(cache=True)
def _evolve(V, k, logR0, wind0, half0, N):
    sk = math.sin(k)
    logR = np.empty(N + 1)
    wind = np.empty(N + 1, dtype=np.int64)
    half = np.empty(N + 1)
    logR[0], wind[0], half[0] = logR0, wind0, half0
    lr, w, h = logR0, wind0, half0
    for n in range(N):
        v = V[n]
        if v == 0.0:
            h = h + k
        else:
            t = v / sk
            sh = math.sin(h)
            ch = math.cos(h)
            arg = t * t * sh * sh - 2.0 * t * sh * ch
            if not arg > -1.0:
                return logR, wind, half, n
            lr += 0.5 * math.log1p(arg)
            h = math.atan2(sh, ch - t * sh) + k
        if h >= math.pi:
            h -= math.pi
            w += 1
        logR[n + 1] = lr
        wind[n + 1] = w
        half[n + 1] = h
    return logR, wind, half, -1


@dataclass(frozen=True)
class Decomposition:
    """V(n) = W(n) - W(n-1) + Q(n) with W(0) = 0; arrays hold sites 1..N."""

    W: np.ndarray
    Q: np.ndarray
    strategy: str
    tail_error: float = 0.0

    def residual(self, V) -> np.ndarray:
        v = np.asarray(V.values if isinstance(V, Potential) else V, dtype=float)[:self.W.size]
        Wp = np.concatenate([[0.0], self.W[:-1]])
        return v - (self.W - Wp + self.Q)


@dataclass(frozen=True)
class EvolveResult:
    """Trajectory over sites 1..N+1 plus the growth diagnostics."""

    k: float
    logR: np.ndarray
    wind: np.ndarray
    half: np.ndarray
    v_functional: float
    w_functional: float | None
    growth_exponent: float
    r_exponent: float

    @property
    def N(self) -> int:
        return self.logR.size - 1

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * (self.wind * math.pi + self.half)

    def state(self, n: int) -> PruferState:
        i = n - 1
        return PruferState(n, self.k, float(self.logR[i]), int(self.wind[i]), float(self.half[i]))

    def psi(self) -> np.ndarray:
        """psi(1..N+1) reconstructed as R sin(theta/2)."""
        sgn = np.where(self.wind % 2 == 1, -1.0, 1.0)
        return sgn * np.exp(self.logR) * np.sin(self.half)

    def log_norm2(self) -> np.ndarray:
        """log(|psi(n+1)|^2 + |psi(n)|^2) for n = 1..N, overflow-free."""
        s0 = np.sin(self.half[:-1]) ** 2
        s1 = np.sin(self.half[1:]) ** 2
        d = 2.0 * (self.logR[1:] - self.logR[:-1])
        with np.errstate(divide="ignore"):
            return 2.0 * self.logR[:-1] + np.log(s0 + s1 * np.exp(d))

    def cos2_phase_sum(self) -> np.ndarray:
        """Running sum of cos^2(phi(n))/n with phi(n) = (theta(n+1) + theta(n))/2."""
        phi = (self.wind[1:] + self.wind[:-1]) * math.pi + self.half[1:] + self.half[:-1]
        n = np.arange(1, self.N + 1)
        return np.cumsum(np.cos(phi) ** 2 / n)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "logR", "theta"])
        for i, (lr, th) in enumerate(zip(self.logR, self.theta), start=1):
            w.writerow([i, FLOAT_FMT % lr, FLOAT_FMT % th])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _final_decade_slope(y: np.ndarray) -> float:
    N = y.size
    lo = max(N // 10, 1)
    n = np.arange(lo, N + 1)
    if n.size < 2:
        return 0.0
    x = np.log(n)
    return float(np.polyfit(x, y[lo - 1:], 1)[0])


def evolve(V, k: float, boundary=(0.0, 1.0), N: int | None = None,
           decomposition: Decomposition | None = None) -> EvolveResult:
    """Propagate (R, theta) from site 1 to N+1 using V(1..N)."""
    k = _check_k(k)
    V = V if isinstance(V, Potential) else Potential(V)
    N = len(V) if N is None else int(N)
    v = V.padded(N).values
    s0 = prufer_transform(boundary, k, 1)
    logR, wind, half, fail = _evolve(np.ascontiguousarray(v), k, s0.logR, s0.wind, s0.half, N)
    if fail >= 0:
        raise ArithmeticError(f"Prüfer amplitude ratio not positive at n = {fail + 1}")
    theta = 2.0 * (wind * math.pi + half)
    vf = float(np.sum(v * np.sin(theta[:-1])) / math.sin(k))
    wf = None
    if decomposition is not None:
        W = np.asarray(decomposition.W)[:N]
        phi = (wind[1:W.size + 1] + wind[:W.size]) * math.pi + half[1:W.size + 1] + half[:W.size]
        wf = float(2.0 * np.sum(W * np.cos(phi)))
    res = EvolveResult(k, logR, wind, half, vf, wf, 0.0, 0.0)
    g = _final_decade_slope(res.log_norm2())
    r = _final_decade_slope(logR[:-1])
    return EvolveResult(k, logR, wind, half, vf, wf, g, r)


# -------------------------------------------------------------- decomposition

TAIL_TOL = 1e-12
MIN_HORIZON = 10 ** 6


def decompose(V, strategy: str = "gamma", N: int | None = None, horizon: int | None = None,
              tol: Tolerances = DEFAULT_TOL, tail_tol: float = TAIL_TOL) -> Decomposition:
    """Split V into a discrete derivative plus a summable remainder.

    ``gamma``: W(n) = gamma_{2n-2}, Q(1) = gamma_0,
    Q(n) = -gamma_{2n-3} (gamma_{2n-2} + gamma_{2n-4}) for n >= 2.

    ``tail``: W(n) = -sum_{m>n} V(m), truncated at the horizon M with the
    last term halved (endpoint averaging); entries of V beyond its stored
    length are zero.  Q is the residual V - W + W(.-1).  The Cauchy
    difference between horizons M and M/2 must stay below ``tail_tol``.
    """
    V = V if isinstance(V, Potential) else Potential(V)
    if strategy == "gamma":
        N = len(V) if N is None else int(N)
        cert = certify(V, N, tol)
        if cert.status != CERTIFIED:
            raise ArithmeticError(f"gamma strategy needs a certified potential ({cert.status} at {cert.index})")
        g = np.asarray(cert.gamma)
        W = g[0::2].copy()
        Q = np.empty(N)
        Q[0] = g[0]
        if N > 1:
            odd = g[1:2 * N - 2:2]             # gamma_{2n-3}, n = 2..N
            Q[1:] = -odd * (g[2::2] + g[0:2 * N - 2:2])
        return Decomposition(W, Q, "gamma")
    if strategy != "tail":
        raise ValueError(f"unknown strategy {strategy!r}")
    N = len(V) if N is None else int(N)
    M = horizon if horizon is not None else max(10 * N, MIN_HORIZON, len(V))
    v = V.padded(M).values

    def tail(m):
        # sum_{j=n+1}^m V(j) - V(m)/2 for n = 1..N
        r = np.cumsum(v[:m][::-1])[::-1]
        out = np.concatenate([r[1:], [0.0]])[:N] - 0.5 * v[m - 1]
        return out

    T = tail(M)
    err = float(np.abs(T - tail(max(M // 2, N + 1))).max())
    if err > tail_tol:
        raise ArithmeticError(f"tail sums not converged: Cauchy difference {err:.3g} > {tail_tol:g}")
    W = -T
    Wp = np.concatenate([[0.0], W[:-1]])
    Q = v[:N] - W + Wp
    return Decomposition(W, Q, "tail", err)


# ---------------------------------------------------------------- W-hat tails

@dataclass(frozen=True)
class WHat:
    value: complex
    error: float
    converged: bool


def w_hat_profile(W, k: float) -> np.ndarray:
    """sum_{m=n}^{M} W(m) e^{2ikm} for every n = 1..M."""
    W = np.asarray(W, dtype=float)
    m = np.arange(1, W.size + 1)
    terms = W * np.exp(2j * k * m)
    return np.cumsum(terms[::-1])[::-1]


def w_hat_tail(W, k: float, n: int = 1) -> WHat:
    """Partial tail sum up to the stored length M with a Cauchy error estimate.

    The error is |S_M - S_{M/2}|; the sum counts as converged when that
    difference is at most 3/4 of the previous one (|S_{M/2} - S_{M/4}|),
    i.e. the differences decay rather than stall.
    """
    W = np.asarray(W, dtype=float)
    M = W.size
    if not 1 <= n <= M:
        raise ValueError(f"need 1 <= n <= {M}")
    m = np.arange(n, M + 1)
    terms = W[n - 1:] * np.exp(2j * k * m)
    S = np.cumsum(terms)

    def at(mm):
        return S[mm - n] if mm >= n else 0.0

    sM, s2, s4 = at(M), at(max(M // 2, n)), at(max(M // 4, n))
    d1, d2 = abs(sM - s2), abs(s2 - s4)
    conv = d1 == 0.0 or d1 <= 0.75 * d2
    return WHat(complex(sM), float(d1), bool(conv))
