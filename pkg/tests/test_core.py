import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spectral_gate.core import (DEFAULT_TOL, JacobiCoeffs, Potential, Tolerances, cumsum,
                                extremal_values, gen_alternating, gen_extremal, gen_wvn,
                                load_potential, potential_to_csv, potential_to_json)


class TestTolerances:
    def test_defaults(self):
        assert DEFAULT_TOL.eq_tol == 1e-9
        assert DEFAULT_TOL.gamma_margin == 1e-12
        assert DEFAULT_TOL.osc_zero_tol == 1e-14

    @pytest.mark.parametrize("kw", [{"eq_tol": 0.0}, {"gamma_margin": -1.0}, {"eq_tol": 1e-3},
                                    {"osc_zero_tol": 0.0}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            Tolerances(**kw)


class TestTypes:
    def test_potential_padding_and_at(self):
        V = Potential([1.0, -2.0])
        assert V.at(2) == -2.0 and V.at(5) == 0.0
        assert len(V.padded(5)) == 5 and V.padded(1).values.tolist() == [1.0]
        with pytest.raises(IndexError):
            V.at(0)

    def test_potential_is_read_only(self):
        V = Potential([1.0])
        with pytest.raises(ValueError):
            V.values[0] = 2.0

    @pytest.mark.parametrize("bad", [[], [np.nan], [np.inf]])
    def test_potential_rejects(self, bad):
        with pytest.raises(ValueError):
            Potential(bad)

    def test_jacobi_rejects_nonpositive_a(self):
        with pytest.raises(ValueError):
            JacobiCoeffs([1.0, 0.0], [0.0, 0.0])
        with pytest.raises(ValueError):
            JacobiCoeffs([1.0], [0.0, 0.0])

    def test_flip_and_schrodinger(self):
        J = Potential([0.5, -0.25]).to_jacobi()
        assert J.is_schrodinger
        assert J.flipped().b.tolist() == [-0.5, 0.25]
        assert not JacobiCoeffs([2.0], [0.0]).is_schrodinger
        with pytest.raises(ValueError):
            JacobiCoeffs([2.0], [0.0]).potential()


class TestGenerators:
    @given(st.floats(-3, 3, allow_nan=False), st.integers(1, 500))
    def test_alternating_exact_magnitude(self, lam, N):
        V = gen_alternating(lam, N).values
        n = np.arange(1, N + 1)
        assert np.all(np.abs(V) == abs(lam) / n)
        assert np.all(np.sign(V[1::2]) >= 0) if lam >= 0 else True

    @pytest.mark.parametrize("n", [1, 2, 3, 7, 50, 1000])
    def test_extremal_square_law(self, n):
        V = gen_extremal(n)
        assert abs(V.at(n) ** 2 * n - 2.0) <= 1e-14 * 2.0
        assert set(np.flatnonzero(V.values) + 1) == set(extremal_values(n))

    def test_extremal_small_cases(self):
        assert gen_extremal(1).values.tolist() == pytest.approx([math.sqrt(2), -math.sqrt(0.5)])
        v2 = gen_extremal(2).values
        assert v2 == pytest.approx([-1.0, 1.0, -0.5])

    @pytest.mark.parametrize("alpha", [0.6, 0.75, 1.0, 2.0])
    def test_wvn_residual(self, alpha):
        V, t = gen_wvn(alpha, 5000)
        psi, v = t.psi, V.values
        lhs = psi[2:] + psi[:-2] + v * psi[1:-1]
        scale = np.abs(psi[2:]) + np.abs(psi[:-2]) + np.abs(v * psi[1:-1])
        ulp = np.finfo(float).eps
        assert np.all(np.abs(lhs) <= 8 * ulp * scale)

    def test_wvn_shape(self):
        V, t = gen_wvn(0.75, 100)
        n = np.arange(1, 102)
        assert np.allclose(np.abs(t.psi[1:]), n ** -0.75, rtol=0, atol=0)
        assert t.energy == 0.0 and len(V) == 100

    @pytest.mark.parametrize("alpha", [0.5, 0.2])
    def test_wvn_rejects_non_l2(self, alpha):
        with pytest.raises(ValueError):
            gen_wvn(alpha, 10)


def test_cumsum_compensated():
    x = np.full(10 ** 6, 0.1)
    assert abs(cumsum(x)[-1] - 1e5) < 1e-9
    assert cumsum(np.ones(5)).tolist() == [1, 2, 3, 4, 5]


class TestSerialization:
    def test_csv_round_trip(self, tmp_path):
        V = gen_alternating(1.0 / 3.0, 20)
        p = tmp_path / "v.csv"
        potential_to_csv(V, p)
        assert p.read_text().splitlines()[0] == "n,v"
        assert np.array_equal(load_potential(p).values, V.values)

    def test_json_round_trip(self, tmp_path):
        J = JacobiCoeffs([1.5, 0.7], [0.1, -0.2])
        p = tmp_path / "j.json"
        potential_to_json(J, p)
        obj = json.loads(p.read_text())
        assert obj["n0"] == 1
        back = load_potential(p)
        assert np.array_equal(back.a, J.a) and np.array_equal(back.b, J.b)

    def test_jacobi_csv(self, tmp_path):
        J = JacobiCoeffs([1.5, 0.7], [0.1, -0.2])
        p = tmp_path / "j.csv"
        potential_to_csv(J, p)
        assert p.read_text().startswith("n,a,b\n")
        assert np.array_equal(load_potential(p).a, J.a)

    def test_bad_indices(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("n,v\n1,0.1\n3,0.2\n")
        with pytest.raises(ValueError):
            load_potential(p)
