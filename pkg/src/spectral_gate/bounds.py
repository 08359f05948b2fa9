"""Finite-range verification of the coefficient and potential inequalities.

Every check returns a :class:`BoundReport` holding the partial left- and
right-hand sides over n.  Bounds with an explicit right-hand side pass when
the margin is non-negative up to ``eq_tol`` times the local scale; bounds of
the form ``slope * log(n) + C`` pass when the empirical constant
C_N = sup_{n <= N} (lhs - slope log n) has stopped moving over the last
decade (|C_N - C_{N/10}| <= CONST_TOL).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL, FLOAT_FMT, Potential, Tolerances, cumsum
from .prufer import decompose
from .verblunsky import CERTIFIED, CertResult, certify

CONST_TOL = 1e-3
LAMBDA_GRID = np.logspace(-4, 0, 50, endpoint=False)
EPSILONS = (0.1, 0.5)
TRACE_POINTS = 200


@dataclass(frozen=True)
class BoundReport:
    name: str
    n: np.ndarray
    lhs_trace: np.ndarray
    rhs_trace: np.ndarray
    margin: float
    passed: bool
    constant_estimate: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, points: int = TRACE_POINTS) -> dict:
        idx = _log_sample(self.n.size, points)
        out = {"name": self.name, "passed": self.passed, "margin": _num(self.margin)}
        if self.constant_estimate is not None:
            out["constant_estimate"] = _num(self.constant_estimate)
        for k in sorted(self.extra):
            out[k] = _num(self.extra[k])
        out["n"] = [int(x) for x in self.n[idx]]
        out["lhs"] = [_num(x) for x in self.lhs_trace[idx]]
        out["rhs"] = [_num(x) for x in self.rhs_trace[idx]]
        return out


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return float(FLOAT_FMT % x) if math.isfinite(x) else str(x)


def _log_sample(size: int, points: int) -> np.ndarray:
    if size <= points:
        return np.arange(size)
    idx = np.unique(np.round(np.logspace(0, math.log10(size), points)).astype(int) - 1)
    return idx


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=1, sort_keys=False)


def _fixed(name, n, lhs, rhs, tol: Tolerances, **extra) -> BoundReport:
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    diff = rhs - lhs
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    ok = bool(np.all(diff >= -tol.eq_tol * scale)) if diff.size else True
    margin = float(diff.min()) if diff.size else 0.0
    return BoundReport(name, np.asarray(n), lhs, rhs, margin, ok, extra=extra)


def running_constant(n, lhs, slope: float) -> np.ndarray:
    """C_N = sup_{m <= N} (lhs(m) - slope log m)."""
    return np.maximum.accumulate(np.asarray(lhs) - slope * np.log(np.asarray(n, dtype=float)))


def _log_bound(name, n, lhs, slope, **extra) -> BoundReport:
    n = np.asarray(n)
    lhs = np.asarray(lhs, dtype=float)
    C = running_constant(n, lhs, slope)
    rhs = slope * np.log(n.astype(float)) + C[-1]
    N = int(n[-1])
    prev = np.searchsorted(n, max(N // 10, int(n[0])), side="right") - 1
    drift = float(C[-1] - C[max(prev, 0)])
    margin = float((rhs - lhs).min())
    return BoundReport(name, n, lhs, rhs, margin, drift <= CONST_TOL, float(C[-1]),
                       extra={"drift": drift, **extra})


# --------------------------------------------------------------- coefficients

def _as_gamma(g) -> np.ndarray:
    if isinstance(g, CertResult):
        if g.status != CERTIFIED:
            raise ValueError(f"bounds need a certified run, got {g.status}")
        g = g.gamma
    g = np.asarray(g, dtype=float)
    if g.size < 2 or g.size % 2:
        raise ValueError("need an even number (>= 2) of coefficients")
    return g


def verify_gamma_bounds(g, N: int | None = None, tol: Tolerances = DEFAULT_TOL) -> list[BoundReport]:
    """Checks on gamma_0 .. gamma_{2N-1} from a certified run.

    i   gamma_{2n-1} <= gamma_{2n+1} <= 0
    ii  gamma_{2n+1} >= -1/(n+2) + sum_{j<=n} (j+1)(j+2)/(n+2)^2 gamma_{2j}^2
    iii sum_{j<=n} (j+1)(j+2) gamma_{2j}^2 <= n+2
    iv  #{j : |gamma_{2j}| >= lam} <= 9/lam on a log grid of lam
    v   sum_{j<=n} (j+1) gamma_{2j}^2 <= log(n)/4 + C
    vi  sum_{j<=n} |gamma_{2j}| <= log(n)/2 + C
    """
    g = _as_gamma(g)
    if N is not None:
        g = g[:2 * int(N)]
    M = g.size // 2
    ev, od = g[0::2], g[1::2]
    n = np.arange(M)
    od_prev = np.concatenate([[-1.0], od[:-1]])
    reps = [
        _fixed("odd_monotone", n, od_prev, od, tol),
        _fixed("odd_nonpositive", n, od, np.zeros(M), tol),
    ]
    w2 = (n + 1.0) * (n + 2.0) * ev * ev
    S2 = cumsum(w2)
    reps.append(_fixed("odd_lower", n, -1.0 / (n + 2) + S2 / (n + 2.0) ** 2, od, tol))
    reps.append(_fixed("weighted_even_sum", n, S2, n + 2.0, tol))
    absg = np.sort(np.abs(ev))
    counts = absg.size - np.searchsorted(absg, LAMBDA_GRID, side="left")
    reps.append(_fixed("even_weak_l1", LAMBDA_GRID, counts, 9.0 / LAMBDA_GRID, tol))
    if M >= 2:
        k = n[1:]
        reps.append(_log_bound("even_log_quadratic", k, cumsum((n + 1.0) * ev * ev)[1:], 0.25))
        reps.append(_log_bound("even_log_l1", k, cumsum(np.abs(ev))[1:], 0.5))
    return reps


# ------------------------------------------------------------------ potential

def verify_potential_bounds(V, g=None, N: int | None = None,
                            tol: Tolerances = DEFAULT_TOL) -> list[BoundReport]:
    """Checks on V(1..N) given (or computing) its certified coefficients.

    a      #{n : |V(n)| >= lam} <= 54/lam  (|V(n+1)| <= 2|gamma_{2n}| + |gamma_{2n-2}|)
    b      sum n^{1-eps} V(n)^2: the last-decade increment does not exceed the previous one
    c      sum |V(n)| <= log(N) + C
    d      sum n W(n)^2 <= log(N)/4 + C with W(n) = gamma_{2n-2}
    sharp  |V(n)| sqrt(n/2) <= 1
    """
    V = V if isinstance(V, Potential) else Potential(V)
    N = len(V) if N is None else int(N)
    if g is None:
        g = certify(V, N, tol)
    g = _as_gamma(g)[:2 * N]
    v = V.padded(N).values
    n = np.arange(1, N + 1)
    reps = []
    absv = np.sort(np.abs(v))
    counts = absv.size - np.searchsorted(absv, LAMBDA_GRID, side="left")
    reps.append(_fixed("potential_weak_l1", LAMBDA_GRID, counts, 54.0 / LAMBDA_GRID, tol))
    for eps in EPSILONS:
        part = cumsum(n ** (1.0 - eps) * v * v)
        reps.append(_decade_decay(f"potential_weighted_l2_eps{eps:g}", n, part, tol))
    S1 = cumsum(np.abs(v))
    reps.append(_log_bound("potential_log_l1", n, S1, 1.0))
    d = decompose(V, "gamma", N, tol=tol)
    reps.append(_log_bound("decomposition_log_w2", n, cumsum(n * d.W * d.W), 0.25))
    ratio = np.abs(v) * np.sqrt(n / 2.0)
    reps.append(_fixed("sharp_pointwise", n, ratio, np.ones(N), tol,
                       argmax=int(np.argmax(ratio)) + 1, max_ratio=float(ratio.max())))
    return reps


def log_l1_lower_witness(V, N: int | None = None) -> BoundReport:
    """sum |V(n)| >= log(N) - C: the reverse of (c), attained by (-1)^n/n.

    Not implied by the absence of bound states; it shows that the slope 1
    in (c) cannot be lowered when it passes.
    """
    V = V if isinstance(V, Potential) else Potential(V)
    N = len(V) if N is None else int(N)
    n = np.arange(1, N + 1)
    return _log_bound("potential_log_l1_lower", n, -cumsum(np.abs(V.padded(N).values)), -1.0)


def _decade_decay(name, n, partial, tol: Tolerances) -> BoundReport:
    """Increment over (N/10, N] versus (N/100, N/10]; a convergent series shrinks them."""
    N = int(n[-1])
    a, b = max(N // 100, 1), max(N // 10, 1)
    inc_last = float(partial[-1] - partial[b - 1])
    inc_prev = float(partial[b - 1] - partial[a - 1])
    scale = max(1.0, abs(inc_prev))
    ok = inc_last <= inc_prev + tol.eq_tol * scale
    return BoundReport(name, n, partial, np.full(n.size, partial[-1]), inc_prev - inc_last, ok,
                       extra={"increment_last": inc_last, "increment_prev": inc_prev})


def all_passed(reports) -> bool:
    return all(r.passed for r in reports)
