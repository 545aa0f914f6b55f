import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twocenter.errors import DegenerateParameter, DomainError, SingularCenter
from twocenter.model import (EquilibriumKind, ModelParams, PhaseState, apply_symmetry, equilibria,
                             hamiltonian, jacobian_vf, linear_spectrum, potential, potential_gradient,
                             potential_grid, potential_hessian, vector_field)

a_any = st.floats(0.0, 6.0)
coord = st.floats(-4.0, 4.0)
mom = st.floats(-3.0, 3.0)


def away_from_centers(x, y):
    return min(math.hypot(x + 1, y), math.hypot(x - 1, y)) > 1e-3


# Oracle: potential written straight from the spring picture.
def spring_potential(a, x, y):
    d1 = math.sqrt((x + 1) ** 2 + y ** 2)
    d2 = math.sqrt((x - 1) ** 2 + y ** 2)
    return 0.5 * (d1 - a) ** 2 + 0.5 * (d2 - a) ** 2


class TestParams:
    def test_derived_constants(self):
        p = ModelParams(2.0)
        assert p.g == pytest.approx(math.sqrt(3))
        assert p.E_s == 1.0
        assert p.omega_x == pytest.approx(math.sqrt(2) / 2)
        assert p.omega_y == pytest.approx(math.sqrt(6) / 2)

    @pytest.mark.parametrize("a", [-1.0, float("nan"), float("inf")])
    def test_rejects_bad_a(self, a):
        with pytest.raises(DomainError):
            ModelParams(a)

    def test_g_needs_a_above_one(self):
        with pytest.raises(DomainError):
            ModelParams(0.5).g


class TestPhaseState:
    def test_roundtrip(self):
        s = PhaseState(0.1, -0.2, 0.3, 0.4)
        assert PhaseState.from_array(s.as_array()) == s
        assert tuple(s) == (0.1, -0.2, 0.3, 0.4)
        assert s.to_dict() == {"x": 0.1, "y": -0.2, "px": 0.3, "py": 0.4}

    def test_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            PhaseState(0.0, float("nan"), 0.0, 0.0)


class TestPotential:
    def test_values_at_reference_points(self):
        # U(0,0) = (a-1)^2 and U vanishes at the off-axis equilibria
        for a in (0.5, 1.5, 2.0, 5.0):
            p = ModelParams(a)
            assert potential(p, 0.0, 0.0) == pytest.approx((a - 1) ** 2)
        p = ModelParams(2.0)
        assert potential(p, 0.0, math.sqrt(3)) == pytest.approx(0.0, abs=1e-15)

    @given(a_any, coord, coord)
    def test_matches_spring_oracle(self, a, x, y):
        assert potential(ModelParams(a), x, y) == pytest.approx(spring_potential(a, x, y), rel=1e-13, abs=1e-13)

    @given(a_any, coord, coord)
    def test_gradient_matches_finite_differences(self, a, x, y):
        if not away_from_centers(x, y):
            return
        p = ModelParams(a)
        h = 1e-6
        fd = [(spring_potential(a, x + h, y) - spring_potential(a, x - h, y)) / (2 * h),
              (spring_potential(a, x, y + h) - spring_potential(a, x, y - h)) / (2 * h)]
        np.testing.assert_allclose(potential_gradient(p, x, y), fd, atol=1e-6 * (1 + a))

    @given(a_any, coord, coord)
    def test_hessian_matches_gradient_differences(self, a, x, y):
        if not away_from_centers(x, y) or min(math.hypot(x + 1, y), math.hypot(x - 1, y)) < 0.05:
            return
        p = ModelParams(a)
        h = 1e-6
        K = potential_hessian(p, x, y)
        Kx = (potential_gradient(p, x + h, y) - potential_gradient(p, x - h, y)) / (2 * h)
        Ky = (potential_gradient(p, x, y + h) - potential_gradient(p, x, y - h)) / (2 * h)
        np.testing.assert_allclose(K, np.column_stack([Kx, Ky]), atol=1e-5 * (1 + a))
        np.testing.assert_allclose(K, K.T)

    def test_grid_matches_pointwise(self):
        p = ModelParams(1.5)
        xs = np.linspace(-2, 2, 7)
        ys = np.linspace(-1, 3, 5)
        U = potential_grid(p, xs, ys)
        assert U.shape == (5, 7)
        assert U[3, 2] == pytest.approx(potential(p, xs[2], ys[3]))

    @pytest.mark.parametrize("x", [-1.0, 1.0])
    def test_singular_center_guard(self, x):
        with pytest.raises(SingularCenter):
            vector_field(ModelParams(2.0), (x, 0.0, 0.0, 0.0))

    def test_no_singularity_at_a_zero(self):
        v = vector_field(ModelParams(0.0), (1.0, 0.0, 0.0, 0.0))
        np.testing.assert_allclose(v, [0, 0, -2, 0])


class TestHamiltonian:
    @given(a_any, coord, coord, mom, mom)
    def test_symmetries_preserve_energy(self, a, x, y, px, py):
        p = ModelParams(a)
        s = PhaseState(x, y, px, py)
        H = hamiltonian(p, s)
        for name in ("S1", "S2", "S1S2"):
            assert hamiltonian(p, apply_symmetry(name, s)) == pytest.approx(H, rel=1e-13, abs=1e-13)

    @given(a_any, coord, coord, mom, mom)
    def test_symmetries_are_involutions(self, a, x, y, px, py):
        s = PhaseState(x, y, px, py)
        for name in ("S1", "S2", "S1S2"):
            assert apply_symmetry(name, apply_symmetry(name, s)) == s

    @given(a_any, coord, coord, mom, mom)
    def test_vector_field_is_hamiltonian(self, a, x, y, px, py):
        if not away_from_centers(x, y):
            return
        p = ModelParams(a)
        s = np.array([x, y, px, py])
        v = vector_field(p, s)
        # dH/dt = grad H . v = 0
        grad = np.concatenate([potential_gradient(p, x, y), [px, py]])
        assert abs(grad @ v) <= 1e-10 * (1 + np.abs(grad).max() * np.abs(v).max())

    @given(a_any, coord, coord, mom, mom)
    def test_jacobian_matches_finite_differences(self, a, x, y, px, py):
        if min(math.hypot(x + 1, y), math.hypot(x - 1, y)) < 0.05:
            return
        p = ModelParams(a)
        s = np.array([x, y, px, py])
        h = 1e-6
        fd = np.column_stack([(vector_field(p, s + h * e) - vector_field(p, s - h * e)) / (2 * h)
                              for e in np.eye(4)])
        np.testing.assert_allclose(jacobian_vf(p, s), fd, atol=1e-5 * (1 + a))

    def test_unknown_symmetry(self):
        with pytest.raises(DomainError):
            apply_symmetry("S3", (0, 0, 0, 0))


class TestEquilibria:
    @pytest.mark.parametrize("a", [1.5, 2.0, math.sqrt(5), 5.0])
    def test_five_points_and_kinds(self, a):
        p = ModelParams(a)
        eqs = equilibria(p)
        assert len(eqs) == 5
        for e in eqs:
            np.testing.assert_allclose(vector_field(p, e.state), 0, atol=1e-13)
        kinds = {(round(e.state.x, 9), round(e.state.y, 9)): e.kind for e in eqs}
        g = round(math.sqrt(a * a - 1), 9)
        assert kinds[(0.0, g)] is EquilibriumKind.LINEAR_CENTER
        assert kinds[(0.0, -g)] is EquilibriumKind.LINEAR_CENTER
        assert kinds[(0.0, 0.0)] is EquilibriumKind.SADDLE_CENTER

    @pytest.mark.parametrize("a", [0.0, 0.3, 0.9])
    def test_single_point_below_one(self, a):
        eqs = equilibria(ModelParams(a))
        assert len(eqs) == 1
        assert eqs[0].kind is EquilibriumKind.LINEAR_CENTER

    def test_a_equal_one_is_degenerate(self):
        with pytest.raises(DegenerateParameter):
            equilibria(ModelParams(1.0))

    def test_minimum_frequencies(self):
        a = 2.0
        eqs = equilibria(ModelParams(a))
        top = next(e for e in eqs if e.state.y > 1)
        ims = sorted(abs(l.imag) for l in top.eigenvalues)
        np.testing.assert_allclose(ims, [math.sqrt(2) / a] * 2 + [math.sqrt(6) / a] * 2, atol=1e-12)

    @given(st.floats(1.01, 6.0), coord, coord)
    def test_spectrum_agrees_with_dense_solver(self, a, x, y):
        if min(math.hypot(x + 1, y), math.hypot(x - 1, y)) < 0.05:
            return
        p = ModelParams(a)
        s = (x, y, 0.0, 0.0)
        ours = list(linear_spectrum(p, s))
        ref = np.linalg.eigvals(jacobian_vf(p, s))
        tol = 1e-6 * (1 + np.abs(ref).max())
        # match as multisets; sort order is fragile under tiny real parts
        for lam in ref:
            k = int(np.argmin([abs(lam - m) for m in ours]))
            assert abs(lam - ours.pop(k)) <= tol
