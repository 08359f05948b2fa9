"""Continuum half-line analogue: zero-energy solutions, Gamma fields, Prüfer ODEs.

u and v solve -u'' + V u = 0 and -v'' - V v = 0 with u(0) = v(0) = 0,
u'(0) = v'(0) = 1.  From them

    Gamma_e = (u'/u - v'/v) / 2,    Gamma_o = -(u'/u + v'/v) / 2,

which obey Gamma_e' = V + 2 Gamma_e Gamma_o and Gamma_o' = Gamma_o^2 + Gamma_e^2.
The Riccati pair is only used as a residual check; the integration itself
is done on (u, u', v, v') with classical RK4, which stays regular at x = 0.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from numba import njit

from .bounds import BoundReport, _fixed
from .core import DEFAULT_TOL, FLOAT_FMT, Tolerances, cumsum

RICHARDSON_TOL = 1e-8
LAMBDA_GRID = np.logspace(-4, 1, 50, endpoint=False)


class StepSizeError(ArithmeticError):
    pass


class ZeroCrossing(ArithmeticError):
    """u or v vanished: the window already shows a bound state."""

    def __init__(self, which: str, x: float):
        super().__init__(f"{which} changes sign near x = {x:.6g}")
        self.which = which
        self.x = x


# ------------------------------------------------------------------ potential

@dataclass(frozen=True)
class ContinuumPotential:
    """Vectorised sampler x -> V(x) plus a label for reports."""

    sampler: Callable[[np.ndarray], np.ndarray]
    label: str = "V"

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.broadcast_to(np.asarray(self.sampler(x), dtype=float), x.shape)
        return np.array(out)

    def __neg__(self) -> "ContinuumPotential":
        f = self.sampler
        return ContinuumPotential(lambda x: -np.asarray(f(x), dtype=float), f"-({self.label})")

    @classmethod
    def zero(cls) -> "ContinuumPotential":
        return cls(lambda x: np.zeros_like(x), "0")

    @classmethod
    def from_expr(cls, expr: str) -> "ContinuumPotential":
        """Closed-form potential in the variable x, e.g. ``0.3*sin(x)/(1+x)``."""
        import sympy

        x = sympy.Symbol("x", real=True)
        try:
            e = sympy.sympify(expr, locals={"x": x})
        except (sympy.SympifyError, SyntaxError, TypeError) as err:
            raise ValueError(f"cannot parse potential {expr!r}: {err}") from None
        extra = e.free_symbols - {x}
        if extra:
            raise ValueError(f"unknown symbols in potential: {sorted(map(str, extra))}")
        f = sympy.lambdify(x, e, "numpy")
        return cls(lambda t: np.asarray(f(t), dtype=float) + np.zeros_like(t), expr)

    @classmethod
    def from_samples(cls, xs, vs, label: str = "samples") -> "ContinuumPotential":
        xs = np.asarray(xs, dtype=float)
        vs = np.asarray(vs, dtype=float)
        if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
            raise ValueError("samples need increasing x and matching v")
        return cls(lambda t: np.interp(t, xs, vs), label)

    @classmethod
    def from_csv(cls, path) -> "ContinuumPotential":
        rows = list(csv.reader(io.StringIO(Path(path).read_text())))
        if [h.strip() for h in rows[0]] != ["x", "v"]:
            raise ValueError("continuum CSV needs header x,v")
        body = [r for r in rows[1:] if r]
        return cls.from_samples([float(r[0]) for r in body], [float(r[1]) for r in body], str(path))

    def local_l2_bound(self, x_max: float, h: float = 1e-3, x_min: float = 0.0) -> float:
        """sup over unit windows [n, n+1] inside [x_min, x_max] of int V^2."""
        best = 0.0
        a = x_min
        while a < x_max:
            b = min(a + 1.0, x_max)
            m = max(int(math.ceil((b - a) / h)), 2)
            t = np.linspace(a, b, m + 1)
            y = self(t) ** 2
            best = max(best, float(np.sum((y[1:] + y[:-1]) * np.diff(t)) / 2))
            a = b
        if not math.isfinite(best):
            raise ValueError("potential is not locally square integrable on the window")
        return best


def sparse_example() -> ContinuumPotential:
    """V = d/dx [sin(e^{2x}) / (4x)]."""
    def f(x):
        e = np.exp(2.0 * x)
        return np.cos(e) * e / (2.0 * x) - np.sin(e) / (4.0 * x * x)
    return ContinuumPotential(f, "d/dx[sin(exp(2x))/(4x)]")


# ---------------------------------------------------------------- integrators

@njit(cache=True)
def _rk4_uv(Vh, h, y0, stride):
    # Vh: samples at x0 + j*h/2 (j = 0..2M) for unit stride; stride 2 uses step 2h
    M = (Vh.size - 1) // (2 * stride)
    out = np.empty((M + 1, 4))
    u, up, v, vp = y0[0], y0[1], y0[2], y0[3]
    out[0, 0], out[0, 1], out[0, 2], out[0, 3] = u, up, v, vp
    H = h * stride
    for i in range(M):
        j = 2 * stride * i
        va, vm, vb = Vh[j], Vh[j + stride], Vh[j + 2 * stride]
        k1u, k1p = up, va * u
        k1v, k1q = vp, -va * v
        u2, p2, v2, q2 = u + 0.5 * H * k1u, up + 0.5 * H * k1p, v + 0.5 * H * k1v, vp + 0.5 * H * k1q
        k2u, k2p, k2v, k2q = p2, vm * u2, q2, -vm * v2
        u3, p3, v3, q3 = u + 0.5 * H * k2u, up + 0.5 * H * k2p, v + 0.5 * H * k2v, vp + 0.5 * H * k2q
        k3u, k3p, k3v, k3q = p3, vm * u3, q3, -vm * v3
        u4, p4, v4, q4 = u + H * k3u, up + H * k3p, v + H * k3v, vp + H * k3q
        k4u, k4p, k4v, k4q = p4, vb * u4, q4, -vb * v4
        u += H / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        up += H / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        v += H / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        vp += H / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        out[i + 1, 0], out[i + 1, 1], out[i + 1, 2], out[i + 1, 3] = u, up, v, vp
    return out


@njit(cache=True)
def _rk4_psi(Vh, h, k2, y0):
    # psi'' = (V - k^2) psi on the half-step samples
    M = (Vh.size - 1) // 2
    out = np.empty((M + 1, 2))
    p, q = y0[0], y0[1]
    out[0, 0], out[0, 1] = p, q
    for i in range(M):
        a, m, b = Vh[2 * i] - k2, Vh[2 * i + 1] - k2, Vh[2 * i + 2] - k2
        k1p, k1q = q, a * p
        k2p, k2q = q + 0.5 * h * k1q, m * (p + 0.5 * h * k1p)
        k3p, k3q = q + 0.5 * h * k2q, m * (p + 0.5 * h * k2p)
        k4p, k4q = q + h * k3q, b * (p + h * k3p)
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        q += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        out[i + 1, 0], out[i + 1, 1] = p, q
    return out


@njit(cache=True)
def _rk4_prufer(Vh, h, k, lr0, th0):
    M = (Vh.size - 1) // 2
    lr = np.empty(M + 1)
    th = np.empty(M + 1)
    lr[0], th[0] = lr0, th0
    a_, t_ = lr0, th0
    c1 = 0.5 / k
    c2 = 1.0 / k
    for i in range(M):
        va, vm, vb = Vh[2 * i], Vh[2 * i + 1], Vh[2 * i + 2]
        r1 = c1 * va * math.sin(t_)
        s1 = 2 * k - c2 * va * (1 - math.cos(t_))
        tt = t_ + 0.5 * h * s1
        r2 = c1 * vm * math.sin(tt)
        s2 = 2 * k - c2 * vm * (1 - math.cos(tt))
        tt = t_ + 0.5 * h * s2
        r3 = c1 * vm * math.sin(tt)
        s3 = 2 * k - c2 * vm * (1 - math.cos(tt))
        tt = t_ + h * s3
        r4 = c1 * vb * math.sin(tt)
        s4 = 2 * k - c2 * vb * (1 - math.cos(tt))
        a_ += h / 6.0 * (r1 + 2 * r2 + 2 * r3 + r4)
        t_ += h / 6.0 * (s1 + 2 * s2 + 2 * s3 + s4)
        lr[i + 1] = a_
        th[i + 1] = t_
    return lr, th


def _half_samples(V: ContinuumPotential, x0: float, h: float, M: int) -> np.ndarray:
    xs = x0 + 0.5 * h * np.arange(2 * M + 1)
    vals = V(xs)
    if not np.all(np.isfinite(vals)):
        raise ValueError("potential is not finite on the integration grid")
    return np.ascontiguousarray(vals)


def _steps(x_start: float, x_max: float, h: float) -> int:
    M = int(round((x_max - x_start) / h))
    if M < 2:
        raise ValueError("window shorter than two steps")
    return M


# ------------------------------------------------------------------- fields

@dataclass(frozen=True)
class GammaFields:
    """Samples on x_i = (i + 1) h, i = 0..M."""

    x: np.ndarray
    V: np.ndarray
    u: np.ndarray
    up: np.ndarray
    v: np.ndarray
    vp: np.ndarray
    h: float
    richardson_error: float
    potential: ContinuumPotential | None = None
    zero_crossing: tuple | None = None

    @property
    def positive(self) -> bool:
        """u and v stayed positive on the whole window."""
        return self.zero_crossing is None

    @property
    def gamma_e(self) -> np.ndarray:
        return 0.5 * (self.up / self.u - self.vp / self.v)

    @property
    def gamma_o(self) -> np.ndarray:
        return -0.5 * (self.up / self.u + self.vp / self.v)

    @property
    def richardson_ok(self) -> bool:
        return self.richardson_error <= RICHARDSON_TOL

    def riccati_residuals(self, x_min: float = 0.5) -> tuple[float, float]:
        """Sup norms of Ge' - V - 2 Ge Go and Go' - Go^2 - Ge^2 by central differences."""
        ge, go = self.gamma_e, self.gamma_o
        dge = (ge[2:] - ge[:-2]) / (2 * self.h)
        dgo = (go[2:] - go[:-2]) / (2 * self.h)
        sl = slice(1, -1)
        r1 = dge - self.V[sl] - 2 * ge[sl] * go[sl]
        r2 = dgo - go[sl] ** 2 - ge[sl] ** 2
        mask = self.x[sl] >= x_min
        return float(np.abs(r1[mask]).max()), float(np.abs(r2[mask]).max())

    def wronskian_drift(self) -> float:
        """Integrator health check: W = u'v - uv' obeys W' = 2 V u v.

        Returns max |W(x) - W(x0) - int 2 V u v| relative to max |W|.
        """
        W = self.up * self.v - self.u * self.vp
        f = 2.0 * self.V * self.u * self.v
        I = np.concatenate([[0.0], cumsum((f[1:] + f[:-1]) * self.h / 2)])
        return float(np.abs(W - W[0] - I).max() / max(1.0, np.abs(W).max()))

    def to_csv(self, path=None, stride: int = 1) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "gamma_e", "gamma_o", "u", "v"])
        ge, go = self.gamma_e, self.gamma_o
        for i in range(0, self.x.size, stride):
            w.writerow([FLOAT_FMT % self.x[i], FLOAT_FMT % ge[i], FLOAT_FMT % go[i],
                        FLOAT_FMT % self.u[i], FLOAT_FMT % self.v[i]])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def integrate_uv(V: ContinuumPotential, x_max: float = 10.0, h: float = 1e-4,
                 strict: bool = True) -> GammaFields:
    """RK4 for (u, u', v, v') from x0 = h with u(x0) = v(x0) = x0, u' = v' = 1.

    The Richardson estimate compares the run with one at step 2h on the
    common points: max |y_h - y_2h| / (15 |y|), divided by the window length.
    ``strict`` turns an estimate above 1e-8 per unit length into
    :class:`StepSizeError` and a sign change of u or v into
    :class:`ZeroCrossing`; otherwise both are only recorded on the result.
    """
    if not 0 < h <= 1e-3:
        raise ValueError("step must satisfy 0 < h <= 1e-3")
    x0 = h
    if not x_max > x0:
        raise ValueError("x_max must exceed the first grid point")
    M = _steps(x0, x_max, h)
    M += M % 2  # the halved run needs an even count
    Vh = _half_samples(V, x0, h, M)
    y0 = np.array([x0, 1.0, x0, 1.0])
    Y = _rk4_uv(Vh, h, y0, 1)
    x = h * (np.arange(M + 1) + 1.0)
    zero = None
    for col, name in ((0, "u"), (2, "v")):
        bad = np.nonzero(Y[:, col] <= 0)[0]
        if bad.size and (zero is None or x[bad[0]] < zero[1]):
            zero = (name, float(x[bad[0]]))
    if strict and zero is not None:
        raise ZeroCrossing(*zero)
    Y2 = _rk4_uv(Vh, h, y0, 2)
    fine = Y[::2]
    norm = np.maximum(np.hypot(fine[:, 0], fine[:, 1]), np.hypot(fine[:, 2], fine[:, 3]))
    diff = np.maximum(np.hypot(*(fine[:, :2] - Y2[:, :2]).T), np.hypot(*(fine[:, 2:] - Y2[:, 2:]).T))
    err = float((diff / norm).max() / 15.0 / (x[-1] - x0))
    if strict and not err <= RICHARDSON_TOL:
        raise StepSizeError(f"Richardson estimate {err:.3g} per unit length exceeds {RICHARDSON_TOL:g}")
    return GammaFields(x, Vh[0::2].copy(), Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 3], h, err, V, zero)


def wronskian_constancy(V: ContinuumPotential, x_max: float = 10.0, h: float = 1e-4,
                        energy: float = 0.0) -> float:
    """max |W(x) - 1| for the Dirichlet and Neumann solutions of psi'' = (V - E) psi from 0.

    Both solve the same equation, so their Wronskian is exactly 1; the drift
    measures integrator health independently of the Richardson estimate.
    """
    M = _steps(0.0, x_max, h)
    Vh = _half_samples(V, 0.0, h, M)
    D = _rk4_psi(Vh, h, float(energy), np.array([0.0, 1.0]))
    N = _rk4_psi(Vh, h, float(energy), np.array([1.0, 0.0]))
    W = N[:, 0] * D[:, 1] - N[:, 1] * D[:, 0]
    return float(np.abs(W - 1.0).max())


# ----------------------------------------------------------------- bounds

def _trapz_cum(y, h) -> np.ndarray:
    return np.concatenate([[0.0], cumsum((y[1:] + y[:-1]) * (h / 2.0))])


def t_gamma_e2_sup(x, I) -> np.ndarray:
    """sup_{y <= x} [I(x) - I(y) - log(x/y)/4] for I(x) = int t Ge^2, via a running minimum."""
    J = I - 0.25 * np.log(x)
    return J - np.minimum.accumulate(J)


def verify_continuum_bounds(f: GammaFields, tol: Tolerances = DEFAULT_TOL) -> list[BoundReport]:
    """Sandwich, weighted quadratic, weak-L^1 measure, log-quadratic and log-L^1 checks."""
    x, h = f.x, f.h
    ge, go = f.gamma_e, f.gamma_o
    reps = [
        _fixed("gamma_o_lower", x, -1.0 / x, go, tol),
        _fixed("gamma_o_upper", x, go, np.zeros_like(x), tol),
    ]
    # the integrand is O(t^4) on (0, x0) so the grid starts the integral
    integrand = x ** 2 * (ge ** 2 + (go + 1.0 / x) ** 2)
    reps.append(_fixed("t2_quadratic", x, _trapz_cum(integrand, h), x, tol))
    absg = np.sort(np.abs(ge))
    measure = h * (absg.size - np.searchsorted(absg, LAMBDA_GRID, side="left"))
    reps.append(_fixed("gamma_e_weak_l1", LAMBDA_GRID, measure, 5.0 / LAMBDA_GRID, tol))
    I = _trapz_cum(x * ge ** 2, h)
    reps.append(_fixed("t_gamma_e2_log", x, t_gamma_e2_sup(x, I), np.ones_like(x), tol))
    m = x >= 1.0
    if np.count_nonzero(m) >= 2:
        xs = x[m]
        L1 = _trapz_cum(np.abs(ge[m]), h)
        # Cauchy-Schwarz with the previous bound gives the constant 1
        reps.append(_fixed("gamma_e_log_l1", xs, L1, 0.5 * np.log(xs) + 1.0, tol,
                           constant_estimate=float((L1 - 0.5 * np.log(xs)).max())))
    return reps


# ------------------------------------------------------------ decomposition

def smooth_step(x) -> tuple[np.ndarray, np.ndarray]:
    """C-infinity g with g = 0 on [0, 1/2], g = 1 on [1, inf), and g'."""
    x = np.asarray(x, dtype=float)
    s = 2.0 * x - 1.0

    def phi(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out

    def dphi(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
        return out

    a, b = phi(s), phi(1.0 - s)
    da, db = 2.0 * dphi(s), -2.0 * dphi(1.0 - s)
    den = a + b
    g = a / den
    dg = (da * den - a * (da + db)) / den ** 2
    return g, dg


@dataclass(frozen=True)
class ContinuumDecomposition:
    """V = W' + Q on the field grid, W = g Gamma_e."""

    x: np.ndarray
    W: np.ndarray
    dW: np.ndarray
    Q: np.ndarray
    q_l1: float
    reports: list = field(default_factory=list)


def continuum_decompose(f: GammaFields, tol: Tolerances = DEFAULT_TOL) -> ContinuumDecomposition:
    """W = g Gamma_e, W' = g' Gamma_e + g (V + 2 Gamma_e Gamma_o), Q = V - W'.

    For x >= 1 this gives Q = -2 Gamma_e Gamma_o.  Reports the int |Q| over the
    window and the bound int_1^x t W^2 <= log(x)/4 + 1.
    """
    x, h = f.x, f.h
    ge, go = f.gamma_e, f.gamma_o
    g, dg = smooth_step(x)
    W = g * ge
    dW = dg * ge + g * (f.V + 2.0 * ge * go)
    Q = f.V - dW
    q_l1 = float(_trapz_cum(np.abs(Q), h)[-1])
    reps = []
    m = x >= 1.0
    if np.count_nonzero(m) >= 2:
        xs = x[m]
        I = _trapz_cum(xs * W[m] ** 2, h)
        reps.append(_fixed("w_log_quadratic", xs, I, 0.25 * np.log(xs) + 1.0, tol))
    return ContinuumDecomposition(x, W, dW, Q, q_l1, reps)


@dataclass(frozen=True)
class WRegularity:
    sup_scaled: float
    w4dw_l1: float
    w4dw_tail: float

    def to_dict(self):
        return {"sup_scaled": self.sup_scaled, "w4dw_l1": self.w4dw_l1, "w4dw_tail": self.w4dw_tail}


def check_w_regularity(dec: ContinuumDecomposition) -> WRegularity:
    """sup_{x >= e} |W| (x / log x)^{1/4} and int |W^4 W'| (total and over the last half)."""
    x, W = dec.x, dec.W
    m = x >= math.e
    sup = float(np.max(np.abs(W[m]) * (x[m] / np.log(x[m])) ** 0.25)) if m.any() else 0.0
    h = x[1] - x[0]
    I = _trapz_cum(np.abs(W ** 4 * dec.dW), h)
    half = np.searchsorted(x, x[-1] / 2)
    return WRegularity(sup, float(I[-1]), float(I[-1] - I[half]))


# ----------------------------------------------------------------- Prüfer

@dataclass(frozen=True)
class ContinuumPrufer:
    """(log R, theta) on x_i = i h with psi = R sin(theta/2), psi' = k R cos(theta/2)."""

    x: np.ndarray
    logR: np.ndarray
    theta: np.ndarray
    k: float
    dual_error: float | None = None
    rbound_functional: np.ndarray | None = None
    rbound_residual: np.ndarray | None = None

    def psi(self) -> tuple[np.ndarray, np.ndarray]:
        R = np.exp(self.logR)
        return R * np.sin(self.theta / 2), self.k * R * np.cos(self.theta / 2)

    def residual_sup(self, x_lo: float = 1.0, x_hi: float | None = None) -> float:
        if self.rbound_residual is None:
            raise ValueError("run with a decomposition to get the residual")
        x_hi = self.x[-1] if x_hi is None else x_hi
        m = (self.x >= x_lo) & (self.x <= x_hi)
        return float(np.abs(self.rbound_residual[m]).max())


def continuum_prufer(V: ContinuumPotential, k: float, x_max: float = 10.0, h: float = 1e-4,
                     boundary=(0.0, 1.0), dual: bool = True,
                     decomposition: ContinuumDecomposition | None = None) -> ContinuumPrufer:
    """RK4 for d log R/dx = V sin(theta)/(2k), d theta/dx = 2k - (V/k)(1 - cos theta).

    With ``dual`` the same ψ is integrated directly from psi'' = (V - k^2) psi
    and the largest relative deviation, |Δψ| / sqrt(psi^2 + (psi'/k)^2), is
    recorded.  A decomposition on the grid (i + 1) h adds the functional
    -int_0^x W cos(theta) and the residual log(R/R(0)) minus it.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    M = _steps(0.0, x_max, h)
    Vh = _half_samples(V, 0.0, h, M)
    p0, d0 = float(boundary[0]), float(boundary[1])
    if p0 == 0.0 and d0 == 0.0:
        raise ValueError("boundary data must not vanish")
    lr0 = math.log(math.hypot(p0, d0 / k))
    th0 = 2.0 * math.atan2(p0, d0 / k)
    lr, th = _rk4_prufer(Vh, h, float(k), lr0, th0)
    x = h * np.arange(M + 1)
    err = None
    if dual:
        P = _rk4_psi(Vh, h, float(k) ** 2, np.array([p0, d0]))
        R = np.exp(lr)
        ps, dps = R * np.sin(th / 2), k * R * np.cos(th / 2)
        scale = np.hypot(P[:, 0], P[:, 1] / k)
        err = float(np.max(np.hypot(ps - P[:, 0], (dps - P[:, 1]) / k) / scale))
    fun = res = None
    if decomposition is not None:
        W = np.concatenate([[0.0], decomposition.W])[: M + 1]
        if W.size < M + 1:
            raise ValueError("decomposition grid shorter than the Prüfer window")
        fun = -_trapz_cum(W * np.cos(th), h)
        res = (lr - lr0) - fun
    return ContinuumPrufer(x, lr, th, float(k), err, fun, res)
