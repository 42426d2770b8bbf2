import numpy as np
import pytest
from scipy.integrate import quad

from oracles import heat_by_quadrature, mehler_expectation
from otto_lab.errors import CurvatureRefusal, DomainError
from otto_lab.grid import build_grid, heat_kernel_column, integrate
from otto_lab.local import (
    LOCAL_NAMES,
    ResolutionRefusal,
    bump_density,
    delta_limit_bridge_vs_local,
    eval_dim_lsi,
    eval_dim_reverse_liyau,
    eval_grad_commutation,
    eval_local_lsi,
    eval_reverse_lsi,
    local_suite,
    semigroup_terms,
)
from otto_lab.modes import Mode


def circle_g(s):
    return np.exp(0.5 * np.sin(s))


def circle_dg(s):
    return 0.5 * np.cos(s) * circle_g(s)


def ou_g(z):
    return np.exp(0.3 * np.sin(z))


def ou_dg(z):
    return 0.3 * np.cos(z) * ou_g(z)


@pytest.fixture(scope="module")
def delta_circle():
    M = build_grid("circle", 512)
    g = np.exp(0.5 * np.sin(M.x))
    return M, g


class TestSemigroupTerms:
    def test_circle_against_fourier_quadrature(self):
        # the derivative commutes with P_T on the circle, so (P_T g)' = P_T g'
        M = build_grid("circle", 128)
        th, T = M.x, 0.3
        s = semigroup_terms(M, circle_g(th), T)
        P = heat_by_quadrature(circle_g, th, T, 30)
        dP = heat_by_quadrature(circle_dg, th, T, 30)
        np.testing.assert_allclose(s.P, P, atol=1e-13)
        np.testing.assert_allclose(s.grad_ratio, dP**2 / P, atol=1e-12)
        np.testing.assert_allclose(
            s.smoothed_ratio, heat_by_quadrature(lambda u: circle_dg(u) ** 2 / circle_g(u), th, T, 30), atol=1e-12
        )
        glogg = heat_by_quadrature(lambda u: circle_g(u) * np.log(circle_g(u)), th, T, 30)
        np.testing.assert_allclose(s.bracket, glogg - P * np.log(P), atol=1e-12)

    def test_ou_against_mehler_quadrature(self, ou128):
        # on the Gaussian line (P_T g)' = e^{-T} P_T g'
        x, T = ou128.x, 0.3
        m = ou128.interior
        s = semigroup_terms(ou128, ou_g(x), T)
        P = mehler_expectation(ou_g, x[m], T)
        dP = np.exp(-T) * mehler_expectation(ou_dg, x[m], T)
        np.testing.assert_allclose(s.P[m], P, atol=1e-12)
        np.testing.assert_allclose(s.grad_ratio[m], dP**2 / P, atol=1e-11)
        np.testing.assert_allclose(
            s.smoothed_ratio[m], mehler_expectation(lambda z: ou_dg(z) ** 2 / ou_g(z), x[m], T), atol=1e-12
        )
        glogg = mehler_expectation(lambda z: ou_g(z) * np.log(ou_g(z)), x[m], T)
        np.testing.assert_allclose(s.bracket[m], glogg - P * np.log(P), atol=1e-12)

    def test_integrated_terms(self, circle64):
        # P_T preserves integrals on the circle
        g = circle_g(circle64.x)
        s = semigroup_terms(circle64, g, 0.4)
        ref = quad(lambda u: circle_dg(u) ** 2 / circle_g(u), 0, 2 * np.pi)[0]
        np.testing.assert_allclose(integrate(circle64, s.smoothed_ratio), ref, rtol=1e-12)
        np.testing.assert_allclose(
            integrate(circle64, s.bracket), integrate(circle64, g * np.log(g) - s.P * np.log(s.P)), rtol=1e-12
        )

    def test_rejects_nonpositive_g(self, circle64):
        with pytest.raises(DomainError):
            semigroup_terms(circle64, np.sin(circle64.x), 0.5)
        with pytest.raises(DomainError):
            semigroup_terms(circle64, np.ones(64), 0.0)


class TestRhoInequalities:
    @pytest.mark.parametrize("evaluate", [eval_grad_commutation, eval_local_lsi, eval_reverse_lsi])
    def test_circle_flat(self, circle256, evaluate):
        g = np.exp(0.5 * np.sin(circle256.x)) + 0.2 * np.cos(3 * circle256.x)
        check = evaluate(circle256, 0.0, g, 0.5)
        assert check.passed
        assert check.indices.size == 256

    @pytest.mark.parametrize("evaluate", [eval_grad_commutation, eval_local_lsi, eval_reverse_lsi])
    def test_ou_curvature_one(self, ou128, evaluate):
        check = evaluate(ou128, 1.0, ou_g(ou128.x), 0.5)
        assert check.passed
        assert check.metadata["label"] == "extension"
        assert check.indices.size == int(ou128.interior.sum())

    @pytest.mark.parametrize("evaluate", [eval_grad_commutation, eval_local_lsi, eval_reverse_lsi])
    def test_torus_flat(self, torus32, evaluate):
        X, Y = torus32.mesh()
        assert evaluate(torus32, 0.0, np.exp(0.4 * np.sin(X) * np.cos(Y)), 0.3).passed

    @pytest.mark.parametrize("evaluate", [eval_grad_commutation, eval_local_lsi, eval_reverse_lsi])
    def test_refuses_excess_curvature(self, circle64, ou128, evaluate):
        with pytest.raises(CurvatureRefusal):
            evaluate(circle64, 0.1, circle_g(circle64.x), 0.5)
        with pytest.raises(CurvatureRefusal):
            evaluate(ou128, 1.5, ou_g(ou128.x), 0.5)

    def test_slack_shrinks_as_curvature_grows(self, ou128):
        # the curvature coefficients are monotone in rho, so the ou slacks shrink towards rho = 1
        g = ou_g(ou128.x)
        for evaluate in (eval_grad_commutation, eval_local_lsi, eval_reverse_lsi):
            slacks = [evaluate(ou128, rho, g, 0.5).slack for rho in (0.0, 0.5, 1.0)]
            assert np.all(slacks[0] >= slacks[1] - 1e-12)
            assert np.all(slacks[1] >= slacks[2] - 1e-12)

    def test_curvature_one_exact_for_linear_exponent(self, ou128):
        # for g = exp(b x), P_T g = exp(b e^{-T} x + c) and Gamma(P_T g)/P_T g = e^{-2T} P_T(Gamma(g)/g)
        g = np.exp(0.4 * ou128.x)
        check = eval_grad_commutation(ou128, 1.0, g, 0.7)
        np.testing.assert_allclose(check.lhs, check.rhs, rtol=1e-9)


class TestConstantG:
    @pytest.mark.parametrize("fixture", ["circle64", "torus32"])
    def test_exact_equalities(self, fixture, request):
        M = request.getfixturevalue(fixture)
        checks = local_suite(M, Mode.zero_n(float(M.dim)), np.ones(M.shape), 0.5)
        by_name = {c.name: c for c in checks}
        for name in (
            "gradient-commutation",
            "local-lsi",
            "reverse-local-lsi",
            "dimensional-local-lsi",
            "dimensional-reverse-local-lsi",
        ):
            np.testing.assert_array_equal(by_name[name].slack, 0.0)
        np.testing.assert_allclose(by_name["li-yau"].slack, M.dim / (2 * 0.5), rtol=1e-15)

    def test_ou(self, ou128):
        for c in local_suite(ou128, Mode.rho_inf(1.0), np.ones(128), 0.5):
            np.testing.assert_array_equal(c.slack, 0.0)


class TestDimensionalInequalities:
    def test_circle(self, circle256):
        th = circle256.x
        g = 0.2 + np.exp((np.cos(th - 1.0) - 1) / 0.36)
        checks = eval_dim_lsi(circle256, 1.0, g, 0.5) + eval_dim_reverse_liyau(circle256, 1.0, g, 0.5)
        names = [c.name for c in checks]
        assert names == [
            "dimensional-local-lsi",
            "dimensional-laplacian-bound",
            "dimensional-reverse-local-lsi",
            "li-yau",
            "li-yau-literal",
        ]
        for c in checks:
            if c.gating:
                assert c.passed, c.name
        assert checks[0].metadata["restored_bracket"] is True

    def test_torus(self, torus32):
        X, Y = torus32.mesh()
        g = 0.2 + np.exp((np.cos(X) + np.cos(Y - 1) - 2) / 0.5)
        for c in eval_dim_lsi(torus32, 2.0, g, 0.3) + eval_dim_reverse_liyau(torus32, 2.0, g, 0.3):
            if c.gating:
                assert c.passed, c.name

    def test_refuses_low_dimension(self, torus32):
        with pytest.raises(CurvatureRefusal):
            eval_dim_lsi(torus32, 1.0, np.ones((32, 32)), 0.5)
        with pytest.raises(CurvatureRefusal):
            eval_dim_reverse_liyau(torus32, 1.5, np.ones((32, 32)), 0.5)

    def test_literal_li_yau_is_informational(self, circle64):
        literal = eval_dim_reverse_liyau(circle64, 1.0, circle_g(circle64.x), 0.5)[2]
        assert literal.name == "li-yau-literal"
        assert literal.gating is False

    def test_li_yau_heat_kernel(self, circle256):
        # g = p_s(., y) makes P_T g = p_{s+T}; on the line the Li-Yau slack is n/2T - n/2(s+T)
        T = 0.5
        slacks = []
        for s in (0.4, 0.2, 0.1, 0.05, 0.02):
            c = eval_dim_reverse_liyau(circle256, 1.0, heat_kernel_column(circle256, 0, s), T)[1]
            assert c.passed
            np.testing.assert_allclose(c.slack[0], 1 / (2 * T) - 1 / (2 * (s + T)), rtol=1e-3)
            slacks.append(c.slack.min())
        assert np.all(np.diff(slacks) < 0)


class TestLocalSuite:
    def test_names(self, circle64, ou128):
        g = circle_g(circle64.x)
        assert [c.name for c in local_suite(circle64, Mode.zero_n(1.0), g, 0.5)] == list(LOCAL_NAMES)
        assert len(local_suite(ou128, Mode.rho_inf(1.0), ou_g(ou128.x), 0.5)) == 3

    def test_report_at_worst_point(self, circle64):
        check = eval_local_lsi(circle64, 0.0, circle_g(circle64.x), 0.5)
        rep = check.worst
        k = int(np.argmin(check.slack / check.tolerances))
        assert rep.point == int(check.indices[k])
        assert len(check.reports()) == 64


class TestBumps:
    def test_unit_mass_and_centre(self, delta_circle):
        M, _ = delta_circle
        for w in (0.4, 0.1, 0.05):
            f = bump_density(M, 37, w)
            np.testing.assert_allclose(integrate(M, f), 1.0, rtol=1e-13)
            assert int(np.argmax(f)) == 37

    def test_torus_bump(self, torus32):
        f = bump_density(torus32, 5 * 32 + 7, 0.7)
        np.testing.assert_allclose(integrate(torus32, f), 1.0, rtol=1e-13)
        assert np.unravel_index(np.argmax(f), f.shape) == (5, 7)

    def test_under_resolved(self, delta_circle):
        M, _ = delta_circle
        with pytest.raises(ResolutionRefusal) as info:
            bump_density(M, 0, 0.02)
        assert info.value.exit_code == 2

    def test_not_on_ou(self, ou128):
        with pytest.raises(DomainError):
            bump_density(ou128, 64, 0.5)


class TestDeltaLimit:
    @pytest.mark.parametrize("pair", ["gradient-commutation", "local-lsi"])
    def test_monotone_and_taylor(self, delta_circle, pair):
        M, g = delta_circle
        rec = delta_limit_bridge_vs_local(M, pair, g, 37, 0.5, [0.4, 0.2, 0.1, 0.05], rho=0.0)
        assert rec.monotone()
        assert np.all(np.diff(rec.gap_lhs) < 0) and np.all(np.diff(rec.gap_rhs) < 0)
        for gap, model in ((rec.gap_lhs[-1], rec.taylor_lhs[-1]), (rec.gap_rhs[-1], rec.taylor_rhs[-1])):
            assert gap <= 10 * model
        # bridge sides converge to the local values at y
        assert rec.gap_lhs[-1] <= 0.01 * max(1.0, abs(rec.local_lhs))
        assert rec.gap_rhs[-1] <= 0.01 * max(1.0, abs(rec.local_rhs))

    def test_gap_scales_with_second_moment(self, delta_circle):
        # halving the width quarters the second moment, so the gap drops by about 4
        M, g = delta_circle
        rec = delta_limit_bridge_vs_local(M, "gradient-commutation", g, 37, 0.5, [0.1, 0.05], rho=0.0)
        np.testing.assert_allclose(rec.gap_lhs[0] / rec.gap_lhs[1], 4.0, rtol=0.05)

    def test_reverse_pair(self, delta_circle):
        M, g = delta_circle
        rec = delta_limit_bridge_vs_local(M, "reverse-local-lsi", g, 100, 0.5, [0.4, 0.2, 0.1], rho=0.0)
        assert rec.monotone()
        assert np.all(rec.bridge_lhs <= rec.bridge_rhs)

    def test_table_and_dict(self, delta_circle):
        M, g = delta_circle
        rec = delta_limit_bridge_vs_local(M, "local-lsi", g, 37, 0.5, [0.4, 0.2])
        names, data = rec.table()
        assert names == ["width", "bridge_lhs", "bridge_rhs", "local_lhs", "local_rhs", "gap_lhs", "gap_rhs"]
        assert data.shape == (2, 7)
        d = rec.to_dict()
        assert d["inequality"] == "local-lsi" and d["widths"] == [0.4, 0.2]

    def test_guards(self, delta_circle, ou128):
        M, g = delta_circle
        with pytest.raises(DomainError):
            delta_limit_bridge_vs_local(M, "li-yau", g, 0, 0.5, [0.4])
        with pytest.raises(DomainError):
            delta_limit_bridge_vs_local(M, "local-lsi", g, 0, 0.5, [0.2, 0.4])
        with pytest.raises(DomainError):
            delta_limit_bridge_vs_local(M, "local-lsi", g, 512, 0.5, [0.4])
        with pytest.raises(CurvatureRefusal):
            delta_limit_bridge_vs_local(M, "local-lsi", g, 0, 0.5, [0.4], rho=1.0)
        with pytest.raises(ResolutionRefusal):
            delta_limit_bridge_vs_local(M, "local-lsi", g, 0, 0.5, [0.4, 0.01])
        with pytest.raises(DomainError):
            delta_limit_bridge_vs_local(ou128, "local-lsi", ou_g(ou128.x), 64, 0.5, [0.4])
