import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spectral_gate.core import JacobiCoeffs, Potential, gen_alternating
from spectral_gate.oracle import (eig_count_above, eigs_outside, first_outside_truncation,
                                  gershgorin, outside_json, spectrum)
from spectral_gate.verblunsky import certify

from conftest import short_potentials


def _dense(J, N):
    M = np.diag(J.b[:N]) + np.diag(J.a[:N - 1], 1) + np.diag(J.a[:N - 1], -1)
    return np.linalg.eigvalsh(M)


def _random_jacobi(seed, N=None):
    rng = np.random.default_rng(seed)
    N = N or int(rng.integers(1, 80))
    return JacobiCoeffs(rng.uniform(0.2, 2.0, N), rng.uniform(-2, 2, N))


class TestCount:
    def test_free_three(self):
        assert eig_count_above(Potential(np.zeros(3)), 3, 1.0) == 1

    def test_free_closed_form(self):
        N = 30
        ev = spectrum(Potential(np.zeros(N))).eigenvalues
        exact = np.sort(2 * np.cos(np.arange(1, N + 1) * math.pi / (N + 1)))
        assert np.max(np.abs(ev - exact)) <= 1e-11

    @given(st.integers(0, 2 ** 32 - 1))
    def test_above_gershgorin(self, seed):
        J = _random_jacobi(seed)
        assert eig_count_above(J, len(J), gershgorin(J)[1] + 1e-9) == 0

    @given(st.integers(0, 2 ** 32 - 1), st.floats(-5, 5), st.floats(0, 2))
    def test_monotone_in_E(self, seed, E, dE):
        J = _random_jacobi(seed)
        assert eig_count_above(J, len(J), E + dE) <= eig_count_above(J, len(J), E)

    @given(st.integers(0, 2 ** 32 - 1), st.floats(-5, 5))
    def test_matches_dense(self, seed, E):
        J = _random_jacobi(seed)
        ev = _dense(J, len(J))
        if np.min(np.abs(ev - E)) > 1e-9:
            assert eig_count_above(J, len(J), E) == int(np.sum(ev > E))

    def test_tie_nudged(self):
        J = Potential(np.zeros(3)).to_jacobi()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            # E = 0 is an eigenvalue of the 3x3 free block; E + 4ulp sits just above it
            assert eig_count_above(J, 3, 0.0) == 1

    def test_bad_N(self):
        with pytest.raises(ValueError):
            eig_count_above(Potential([0.0]), 2, 0.0)


class TestSpectrum:
    @given(st.integers(0, 2 ** 32 - 1))
    def test_dense_agreement(self, seed):
        J = _random_jacobi(seed, 40)
        ev = spectrum(J).eigenvalues
        assert np.max(np.abs(ev - _dense(J, 40))) <= 1e-10
        assert np.all(np.diff(ev) > 0)
        lo, hi = gershgorin(J)
        assert lo <= ev[0] and ev[-1] <= hi

    @given(short_potentials(max_len=30, amp=2.0))
    def test_flip_symmetry(self, V):
        a = spectrum(V).eigenvalues
        b = spectrum(-V).eigenvalues
        assert np.max(np.abs(a + b[::-1])) <= 2e-12


class TestOutside:
    def test_free_empty(self):
        for N in (1, 2, 10, 200):
            assert eigs_outside(Potential(np.zeros(N))).empty

    def test_delta(self):
        res = eigs_outside(Potential(np.r_[3.0, np.zeros(49)]), 50)
        assert len(res.above) == 1 and res.below == []
        # closed form for the half-line: E = 3 + 1/3
        assert res.above[0] == pytest.approx(10.0 / 3.0, abs=1e-12)

    def test_json(self):
        obj = outside_json(eigs_outside(Potential(np.r_[-3.0, np.zeros(49)])))
        assert obj["above"] == [] and obj["below"] == [pytest.approx(-10.0 / 3.0, abs=1e-12)]
        assert set(json.loads(eigs_outside(Potential([0.0])).to_json())) == {"above", "below"}

    def test_alternating_threshold_pinned(self):
        J = gen_alternating(1.1, 2000)
        assert first_outside_truncation(J) == 194
        assert eigs_outside(J, 193).empty and not eigs_outside(J, 194).empty

    def test_certified_none(self):
        assert first_outside_truncation(gen_alternating(0.99, 10 ** 5)) is None

    def test_consistency_with_certify(self, rng):
        for _ in range(100):
            V = Potential(rng.uniform(-1.5, 1.5, rng.integers(1, 6))).padded(300)
            if certify(V).certified:
                assert first_outside_truncation(V) is None
            else:
                assert first_outside_truncation(V) is not None
