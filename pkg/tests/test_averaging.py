import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from twocenter import averaging as avg
from twocenter.averaging import (AveragingQuery, a_for_ratio, averaged_f, candidate_zero, check_applicable,
                                 det_jacobian, frequency_ratio, initial_conditions, reduce_s, reduced_rhs,
                                 resonance_order, solve_zeros_sqrt5, symmetry_family)
from twocenter.errors import DomainError, ResonantParameter
from twocenter.model import ModelParams, PhaseState

RESONANT = [math.sqrt(N * N + 1) for N in range(1, 6)]


def generic_a(lo=1.02, hi=5.0):
    return st.floats(lo, hi).filter(
        lambda a: all(abs(a - r) > 1e-3 for r in RESONANT) and abs(a - math.sqrt(3)) > 1e-3)


class TestReducedSystem:
    @given(generic_a(), st.floats(0.1, 4.0), st.floats(0.0, 30.0), st.floats(0.05, 1.0), st.floats(-6.3, 6.3))
    def test_matches_oracle_pointwise(self, a, h, theta, frac, s):
        rho = frac * math.sqrt(h)
        F = reduced_rhs(ModelParams(a), h, theta, rho, s)
        ref = oracles.reduced_rhs(a, h, theta, rho, s)
        np.testing.assert_allclose(F, ref, rtol=1e-11, atol=1e-11 * (1 + abs(ref[1])))

    def test_vectorised_over_theta(self):
        p = ModelParams(2.0)
        th = np.linspace(0, 5, 7)
        F11, F12 = reduced_rhs(p, 1.0, th, 0.4, 0.3)
        assert F11.shape == (7,)
        assert F12[3] == pytest.approx(oracles.reduced_rhs(2.0, 1.0, th[3], 0.4, 0.3)[1])

    def test_rho_must_be_positive(self):
        with pytest.raises(DomainError):
            reduced_rhs(ModelParams(2.0), 1.0, 0.0, 0.0, 0.0)


class TestAveragedFunction:
    @given(generic_a(), st.floats(0.1, 4.0), st.floats(0.05, 1.0), st.floats(-6.28, 6.28))
    def test_quadrature_consistency(self, a, h, frac, s):
        rho = frac * math.sqrt(h)
        f = averaged_f(ModelParams(a), h, rho, s)
        q = oracles.averaged_by_quadrature(a, h, rho, s)
        np.testing.assert_allclose(f, q, atol=1e-8)

    @pytest.mark.parametrize("s", [-5.0, -1.0, 0.3, 2.2, 4.9])
    @pytest.mark.parametrize("rho", [0.2, 0.6, 0.9])
    def test_sqrt5_branch_against_quadrature(self, rho, s):
        a = math.sqrt(5)
        f = averaged_f(ModelParams(a), 1.0, rho, s)
        np.testing.assert_allclose(f, oracles.averaged_by_quadrature(a, 1.0, rho, s), atol=1e-10)

    @pytest.mark.parametrize("N", [1, 3, 4, 5])
    def test_resonant_parameters_vanish(self, N):
        a = math.sqrt(N * N + 1)
        worst = 0.0
        for rho in np.linspace(0.05, 1.0, 9):
            for s in np.linspace(-2 * math.pi, 2 * math.pi, 13):
                worst = max(worst, *map(abs, avg._averaged_generic(a, 1.0, rho, s)))
        assert worst <= 1e-12
        with pytest.raises(ResonantParameter):
            averaged_f(ModelParams(a), 1.0, 0.5, 0.0)

    def test_resonance_detection(self):
        assert resonance_order(ModelParams(math.sqrt(10))) == 3
        assert resonance_order(ModelParams(math.sqrt(10) + 1e-9)) is None
        assert resonance_order(ModelParams(0.5)) is None
        check_applicable(ModelParams(math.sqrt(5)))
        with pytest.raises(DomainError):
            check_applicable(ModelParams(0.9))


class TestZeros:
    def test_zero_property_on_grid(self):
        n_checked = 0
        for a in np.linspace(1.05, 5.0, 100):
            if any(abs(a - r) < 1e-3 for r in RESONANT) or abs(a - math.sqrt(3)) < 1e-3:
                continue
            p = ModelParams(float(a))
            for n in (0, 1):
                z = candidate_zero(p, 1.0, n)
                if not z.valid:
                    continue
                f = averaged_f(p, 1.0, z.rho_tilde, z.s_tilde)
                assert max(map(abs, f)) <= 1e-10
                n_checked += 1
        assert n_checked > 150

    @given(generic_a(), st.floats(0.01, 10.0))
    def test_scaling_in_h(self, a, h):
        p = ModelParams(a)
        z1 = candidate_zero(p, 1.0, 0)
        zh = candidate_zero(p, h, 0)
        assert zh.rho_tilde == pytest.approx(math.sqrt(h) * z1.rho_tilde, rel=1e-12)
        assert zh.r_tilde == pytest.approx(math.sqrt(h) * z1.r_tilde, rel=1e-12)
        assert zh.s_tilde == z1.s_tilde

    @given(generic_a(), st.floats(0.2, 3.0), st.integers(0, 1))
    def test_det_matches_finite_differences(self, a, h, n):
        p = ModelParams(a)
        z = candidate_zero(p, h, n)
        d = det_jacobian(p, h)
        if abs(d) <= 1e-12:
            return
        J = oracles.fd_jacobian(lambda r, s: averaged_f(p, h, r, s), z.rho_tilde, z.s_tilde, step=1e-5)
        assert np.linalg.det(J) == pytest.approx(d, rel=1e-6)

    def test_published_zero_sqrt13_over_3(self):
        p = ModelParams(math.sqrt(13) / 3)
        z0, z1 = candidate_zero(p, 1.0, 0), candidate_zero(p, 1.0, 1)
        assert (z0.rho_tilde, z0.s_tilde) == pytest.approx((0.557978, -2.66984), abs=1e-5)
        assert (z1.rho_tilde, z1.s_tilde) == pytest.approx((0.557978, 1.33492), abs=1e-5)
        assert z0.r_tilde == pytest.approx(1.142835, abs=1e-6)

    def test_sqrt5_zeros(self):
        zs = solve_zeros_sqrt5(1.0)
        assert all(z.valid for z in zs)
        assert [z.n for z in zs] == [-2, -1, 0, 1, 2]
        step = math.pi / (2 * math.sqrt(2 / 5))
        for z in zs:
            assert z.rho_tilde == pytest.approx(math.sqrt(5 / 12))
            assert z.s_tilde == pytest.approx(z.n * step)
            assert -2 * math.pi <= z.s_tilde < 2 * math.pi
        assert zs[0].s_tilde == pytest.approx(-4.96729, abs=1e-5)
        assert zs[1].s_tilde == pytest.approx(-2.48365, abs=1e-5)

    def test_sqrt5_det_matches_fd(self):
        p = ModelParams(math.sqrt(5))
        for z in solve_zeros_sqrt5(2.0):
            J = oracles.fd_jacobian(lambda r, s: averaged_f(p, 2.0, r, s), z.rho_tilde, z.s_tilde)
            assert np.linalg.det(J) == pytest.approx(det_jacobian(p, 2.0, z), rel=1e-6)

    def test_candidate_zero_errors(self):
        with pytest.raises(DomainError):
            candidate_zero(ModelParams(math.sqrt(5)), 1.0, 0)
        with pytest.raises(DomainError):
            candidate_zero(ModelParams(math.sqrt(3)), 1.0, 0)
        with pytest.raises(DomainError):
            candidate_zero(ModelParams(2.0), 0.0, 0)
        with pytest.raises(ResonantParameter):
            candidate_zero(ModelParams(math.sqrt(2)), 1.0, 0)

    @given(generic_a(), st.integers(-6, 6))
    def test_reduce_s_window(self, a, n):
        p = ModelParams(a)
        raw = math.pi * a * (n - p.g) / (math.sqrt(2) * p.g)
        s = reduce_s(p, raw)
        if s is None:
            return
        assert -2 * math.pi <= s < 2 * math.pi
        k = (s - raw) / avg.s_period(p)
        assert k == pytest.approx(round(k), abs=1e-9)


class TestInitialConditions:
    @pytest.mark.parametrize("a,n,expected", [
        (math.sqrt(13) / 3, 0, (0.011428, 0.663877, 0.0, 0.00379)),
        (math.sqrt(29) / 2, 0, (0.021911, 2.5, 0.0, 0.00822)),
    ])
    def test_published(self, a, n, expected):
        q = AveragingQuery(ModelParams(a), 1.0, 1e-2)
        ic = initial_conditions(q, candidate_zero(q.params, 1.0, n))
        np.testing.assert_allclose(ic.as_array(), expected, atol=1e-5)

    def test_published_sqrt5(self):
        q = AveragingQuery(ModelParams(math.sqrt(5)), 1.0, 1e-2)
        ic = initial_conditions(q, solve_zeros_sqrt5(1.0)[0])
        np.testing.assert_allclose(ic.as_array(), (0.0182574, 2.00645, 0.0, 0.0), atol=1e-5)

    def test_energy_is_eps_squared_h(self):
        from twocenter.model import hamiltonian
        p = ModelParams(2.3)
        for eps in (1e-3, 1e-2):
            q = AveragingQuery(p, 1.5, eps)
            ic = initial_conditions(q, candidate_zero(p, 1.5, 0))
            assert hamiltonian(p, ic) == pytest.approx(eps ** 2 * 1.5, rel=5 * eps)

    def test_large_epsilon_warns(self):
        q = AveragingQuery(ModelParams(2.0), 1.0, 0.2)
        with pytest.warns(UserWarning):
            initial_conditions(q, candidate_zero(q.params, 1.0, 0))

    def test_query_validation(self):
        with pytest.raises(DomainError):
            AveragingQuery(ModelParams(2.0), 0.0)
        with pytest.raises(DomainError):
            AveragingQuery(ModelParams(2.0), 1.0, -1.0)
        with pytest.raises(ResonantParameter):
            AveragingQuery(ModelParams(math.sqrt(2)))


class TestFamilies:
    def test_generic_has_four_members(self):
        fam = symmetry_family(PhaseState(0.01, 0.66, 0.002, 0.003))
        assert len(fam) == 4
        assert sorted(m.neighbor for m in fam) == [-1, -1, 1, 1]
        by = {m.symmetry: m for m in fam}
        assert by["S2"].state.y == -0.66 and by["S2"].neighbor == -1

    def test_symmetric_ic_collapses(self):
        fam = symmetry_family(PhaseState(0.0, 2.0, 0.0, 0.0))
        assert [m.symmetry for m in fam] == ["id", "S2"]


class TestRatios:
    @pytest.mark.parametrize("a,ratio", [(math.sqrt(5), (1, 2)), (math.sqrt(29) / 2, (2, 5)),
                                         (math.sqrt(13) / 3, (3, 2)), (math.sqrt(2), (1, 1))])
    def test_frequency_ratio(self, a, ratio):
        wx, wy, r = frequency_ratio(ModelParams(a))
        assert r == ratio
        assert wx / wy == pytest.approx(ratio[0] / ratio[1])

    def test_irrational(self):
        assert frequency_ratio(ModelParams(2.0))[2] is None

    @pytest.mark.parametrize("l,j,a", [(3, 2, math.sqrt(13) / 3), (1, 2, math.sqrt(5)), (2, 5, math.sqrt(29) / 2)])
    def test_a_for_ratio(self, l, j, a):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert a_for_ratio(l, j).a == pytest.approx(a, rel=1e-15)

    def test_resonant_ratio_flagged(self):
        with pytest.warns(UserWarning, match="resonant"):
            assert a_for_ratio(1, 1).a == pytest.approx(math.sqrt(2))

    @pytest.mark.parametrize("l,j", [(0, 1), (-1, 2), (2, 4)])
    def test_a_for_ratio_errors(self, l, j):
        with pytest.raises(DomainError):
            a_for_ratio(l, j)

    @given(st.integers(1, 12), st.integers(1, 12))
    def test_roundtrip(self, l, j):
        if math.gcd(l, j) != 1:
            return
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = a_for_ratio(l, j)
        assert frequency_ratio(p)[2] == (l, j)
