import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spectral_gate.core import JacobiCoeffs, Potential, gen_alternating
from spectral_gate.eigenfunctions import edge_solutions, node_signs
from spectral_gate.verblunsky import (CERTIFIED, INDETERMINATE, VIOLATED, certify, free_m,
                                      gamma_from_jacobi, jacobi_from_gamma, m2_from_m0, m_function,
                                      schur_step2)

from conftest import short_potentials


def _rel(x, y):
    return np.max(np.abs(x - y) / np.maximum(1.0, np.abs(y)))


class TestFree:
    def test_closed_form(self):
        r = certify(Potential([0.0]), 10 ** 4)
        n = np.arange(10 ** 4)
        assert r.certified
        assert np.all(r.gamma[0::2] == 0.0)
        assert np.max(np.abs(r.gamma[1::2] + 1.0 / (n + 2))) <= 1e-12

    def test_json(self):
        obj = json.loads(certify(Potential([0.0]), 2).to_json())
        assert obj["status"] == "certified"
        assert obj["gamma"] == pytest.approx([0.0, -0.5, 0.0, -1.0 / 3.0])
        assert "index" not in obj


@given(st.integers(1, 500), st.integers(0, 2 ** 32 - 1))
def test_round_trip(M, seed):
    g = np.random.default_rng(seed).uniform(-0.1, 0.1, 2 * M)
    back = gamma_from_jacobi(jacobi_from_gamma(g))
    assert back.certified
    assert _rel(back.gamma, g) <= 1e-10


@pytest.mark.parametrize("amp,M", [(0.9, 10), (0.5, 50), (0.3, 100), (0.2, 100)])
def test_round_trip_short(amp, M):
    for seed in range(20):
        g = np.random.default_rng(seed).uniform(-amp, amp, 2 * M)
        assert _rel(gamma_from_jacobi(jacobi_from_gamma(g)).gamma, g) <= 1e-9


def test_inverse_map_conditioning():
    """One ulp in a_1 moves late coefficients by O(1): exact arithmetic, so no algorithm helps."""
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 80
    worst = 0.0
    for seed in range(5):
        g = np.random.default_rng(seed).uniform(-0.9, 0.9, 200)
        J = jacobi_from_gamma(g)
        a = [mpmath.mpf(float(x)) for x in J.a]
        b = [mpmath.mpf(float(x)) for x in J.b]
        a[0] *= 1 + mpmath.mpf(2) ** -52
        gm1, gm2 = mpmath.mpf(-1), mpmath.mpf(0)
        for n in range(len(a)):
            d = 1 - gm1
            e = (b[n] + (1 + gm1) * gm2) / d
            o = a[n] ** 2 / (d * (1 - e * e)) - 1
            worst = max(worst, abs(float(e) - g[2 * n]))
            gm2, gm1 = e, o
            if abs(o) >= 1:
                break
    assert worst > 1e-3


@pytest.mark.parametrize("g", [[0.1], [0.1, 0.2, 0.3], [0.5, 1.0], [-1.0, 0.0]])
def test_jacobi_from_gamma_rejects(g):
    with pytest.raises(ValueError):
        jacobi_from_gamma(g)


class TestViolations:
    def test_threshold_pinned(self):
        r = certify(gen_alternating(1.1, 1000))
        assert r.status == VIOLATED and r.index == 385
        assert abs(r.value) >= 1.0

    def test_threshold_certified_below(self):
        assert certify(gen_alternating(0.99, 10 ** 5)).certified

    def test_large_delta(self):
        r = certify(Potential([3.0]), 50)
        assert r.status == VIOLATED and r.index == 0

    def test_indeterminate(self):
        # gamma_1 -> +1 is forced by a huge a_1; the next divisor 1 - gamma_1 vanishes
        J = JacobiCoeffs([1e9, 1.0], [0.0, 0.0])
        assert certify(J, 2).status in (VIOLATED, INDETERMINATE)

    def test_bad_N(self):
        with pytest.raises(ValueError):
            gamma_from_jacobi(Potential([0.0]), 5)


def _certified_jacobi(seed, N=200):
    """Short random potential with a free tail, certified to N."""
    rng = np.random.default_rng(seed)
    while True:
        J = Potential(rng.uniform(-0.3, 0.3, rng.integers(1, 9))).to_jacobi().padded(N)
        if certify(J, N).certified:
            return J, certify(J, N).gamma


@given(st.integers(0, 2 ** 32 - 1))
def test_shift_property(seed):
    J, g = _certified_jacobi(seed)
    shifted = gamma_from_jacobi(schur_step2(J))
    assert shifted.certified
    assert np.max(np.abs(shifted.gamma - g[2:])) <= 1e-10


@pytest.mark.parametrize("lam", [0.5, 0.9, 1.0])
def test_shift_property_alternating(lam):
    J = gen_alternating(lam, 500).to_jacobi()
    g = certify(J).gamma
    assert np.max(np.abs(gamma_from_jacobi(schur_step2(J)).gamma - g[2:])) <= 1e-10


@given(st.integers(0, 2 ** 32 - 1), st.floats(-6, 6), st.floats(1e-3, 6))
def test_herglotz(seed, x, y):
    J, _ = _certified_jacobi(seed, 50)
    assert m_function(J, complex(x, y)).value.imag > 0


@given(st.integers(0, 2 ** 32 - 1), st.floats(3, 10), st.floats(0, 2 * np.pi))
def test_m2_relation(seed, r, phi):
    J, _ = _certified_jacobi(seed, 50)
    z = r * np.exp(1j * phi)
    m0 = m_function(J, z).value
    m2 = m_function(schur_step2(J), z).value
    assert abs(m2_from_m0(J, z, m0) - m2) <= 1e-8 * max(1.0, abs(m2))


def test_m_function_free_tail_exact():
    z = 1.0 + 2.0j
    assert m_function(Potential([0.0] * 5), z).value == pytest.approx(free_m(z), abs=1e-14)


def test_free_m_solves_quadratic():
    for z in (3.0, -3.0, 1 + 1j, 5j):
        m = free_m(z)
        assert abs(m * m + z * m + 1) < 1e-12 and abs(m) < 1


def test_m_function_near_band():
    with pytest.raises(ValueError):
        m_function(Potential([0.0]), 1.0 + 0j)


@given(short_potentials())
def test_certify_iff_edge_positive(V):
    N = 200
    J = V.to_jacobi().padded(N)
    u, _, v = edge_solutions(J, N)
    pos = bool(np.all(node_signs(u)[1:] > 0) and np.all(node_signs(v)[1:] > 0))
    assert certify(J, N).certified == pos


def test_certify_iff_edge_positive_200(rng):
    N = 200
    agree = 0
    for _ in range(200):
        V = Potential(rng.uniform(-0.3, 0.3, rng.integers(1, 9)))
        J = V.to_jacobi().padded(N)
        u, _, v = edge_solutions(J, N)
        pos = bool(np.all(node_signs(u)[1:] > 0) and np.all(node_signs(v)[1:] > 0))
        agree += certify(J, N).certified == pos
    assert agree == 200
