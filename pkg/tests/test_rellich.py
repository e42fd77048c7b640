import math

import numpy as np
import pytest
from scipy.special import roots_legendre

from wavedamp import CATALOG, rellich_residual, unit_square
from wavedamp.rellich import SmoothTestFunction

from conftest import make_field


def gauss_legendre_sides(u, field, order=60):
    """Independent high-order evaluation of both sides of the identity."""
    x, w = roots_legendre(order)
    x = 0.5 * (x + 1.0)  # map to (0, 1)
    w = 0.5 * w
    X, Y = np.meshgrid(x, x)
    W = np.outer(w, w)
    gx, gy = u.gradient(X, Y)
    lap = u.laplacian(X, Y)
    c, s = math.cos(field.theta), math.sin(field.theta)
    mx = c * (X - field.x0[0]) - s * (Y - field.x0[1])
    my = s * (X - field.x0[0]) + c * (Y - field.x0[1])
    lhs = 2.0 * np.sum(W * lap * (mx * gx + my * gy))
    rhs = 0.0
    for edge in unit_square().edges:
        pts = edge.start[None, :] + x[:, None] * (edge.end - edge.start)[None, :]
        ex, ey = pts[:, 0], pts[:, 1]
        gx, gy = u.gradient(ex, ey)
        mx = c * (ex - field.x0[0]) - s * (ey - field.x0[1])
        my = s * (ex - field.x0[0]) + c * (ey - field.x0[1])
        nx, ny = edge.normal
        integrand = 2.0 * (gx * nx + gy * ny) * (mx * gx + my * gy) - (
            mx * nx + my * ny
        ) * (gx * gx + gy * gy)
        rhs += float(np.sum(w * integrand)) * edge.length
    return lhs, rhs


class TestCatalog:
    def test_expected_entries_present(self):
        for name in ("one", "r2", "saddle", "x3y", "sinsin"):
            assert name in CATALOG

    @pytest.mark.parametrize("name", sorted(CATALOG))
    def test_gradient_and_laplacian_match_finite_differences(self, name, rng):
        u = CATALOG[name]
        h = 1e-5
        pts = rng.uniform(0.1, 0.9, size=(20, 2))
        X, Y = pts[:, 0], pts[:, 1]
        gx, gy = u.gradient(X, Y)
        fd_gx = (u.value(X + h, Y) - u.value(X - h, Y)) / (2 * h)
        fd_gy = (u.value(X, Y + h) - u.value(X, Y - h)) / (2 * h)
        assert np.allclose(gx, fd_gx, atol=1e-6, rtol=1e-6)
        assert np.allclose(gy, fd_gy, atol=1e-6, rtol=1e-6)
        lap = u.laplacian(X, Y)
        fd_lap = (
            u.value(X + h, Y)
            + u.value(X - h, Y)
            + u.value(X, Y + h)
            + u.value(X, Y - h)
            - 4 * u.value(X, Y)
        ) / (h * h)
        assert np.allclose(lap, fd_lap, atol=5e-5, rtol=5e-5)


class TestRellichResidual:
    def test_constant_function_trivial(self, square):
        res = rellich_residual(CATALOG["one"], make_field(0.3, (0.2, -1.0)), square, 32)
        assert res.lhs == 0.0 and res.rhs == 0.0 and res.residual == 0.0

    def test_r2_closed_form(self, square):
        # 2 * int 4 * 2(x^2+y^2) over the unit square = 32/3
        res = rellich_residual(CATALOG["r2"], make_field(0.0, (0.0, 0.0)), square, 1024)
        assert res.lhs == pytest.approx(32.0 / 3.0, rel=1e-5)
        assert res.residual <= 4e-6

    def test_harmonic_lhs_vanishes(self, square):
        for theta in (0.0, 0.3, math.pi / 4):
            for x0 in ((0.0, 0.0), (-1.0, -0.5)):
                res = rellich_residual(CATALOG["saddle"], make_field(theta, x0), square, 512)
                assert res.lhs == 0.0
                assert abs(res.rhs) <= 2e-5

    @pytest.mark.parametrize("name", ["r2", "x3y", "sinsin", "quartic", "coscos"])
    def test_matches_gauss_legendre_oracle(self, name, square):
        field = make_field(0.3, (-1.0, -0.5))
        lhs_gl, rhs_gl = gauss_legendre_sides(CATALOG[name], field)
        assert lhs_gl == pytest.approx(rhs_gl, abs=1e-9 * max(1, abs(lhs_gl)))
        res = rellich_residual(CATALOG[name], field, square, 1024)
        assert res.lhs == pytest.approx(lhs_gl, rel=1e-4, abs=1e-5)
        assert res.rhs == pytest.approx(rhs_gl, rel=1e-4, abs=1e-5)

    @pytest.mark.parametrize("name", ["r2", "x3y", "sinsin"])
    def test_quadratic_convergence_in_q(self, name, square):
        field = make_field(0.3, (-1.0, -0.5))
        r1 = rellich_residual(CATALOG[name], field, square, 256).residual
        r2 = rellich_residual(CATALOG[name], field, square, 512).residual
        assert r1 < 1e-3
        assert 3.5 <= r1 / r2 <= 4.5

    def test_symmetric_part_identity_also_closes(self, square):
        # dropping the rotation (keeping d (x - x0)) must still close the
        # identity: the skew part never contributes to the volume term
        for name in ("r2", "x3y", "sinsin"):
            field = make_field(0.4, (-0.5, 0.25))
            res = rellich_residual(CATALOG[name], field, square, 2048, symmetric_only=True)
            assert res.residual <= 1e-6

    def test_translated_function_and_pivot(self, square):
        # displacing u and the pivot together changes both sides only through
        # the (shifted) domain; the identity itself still closes
        u = CATALOG["x3y"].translated((0.3, -0.2))
        field = make_field(0.25, (0.3 + 0.1, -0.2 + 0.4))
        res = rellich_residual(u, field, square, 2048)
        assert res.residual <= 1e-6

    def test_input_validation(self, square):
        with pytest.raises(ValueError, match="at least 8"):
            rellich_residual(CATALOG["r2"], make_field(0.0, (0, 0)), square, 4)
        import wavedamp.geometry as g

        tri = g.PolygonDomain(np.array([[0, 0], [1.0, 0], [0, 1.0]]))
        with pytest.raises(ValueError, match="unit square"):
            rellich_residual(CATALOG["r2"], make_field(0.0, (0, 0)), tri, 64)


class TestTranslationInvariance:
    def test_residual_scale_invariant_under_joint_shift(self, square):
        # the identity depends on the pivot only through m: shifting u and
        # x0 by the same vector keeps the residual at quadrature-error level
        u0 = CATALOG["sinsin"]
        base = rellich_residual(u0, make_field(0.3, (0.0, 0.0)), square, 256)
        shifted = rellich_residual(
            u0.translated((1.0, 2.0)), make_field(0.3, (1.0, 2.0)), square, 256
        )
        assert shifted.residual <= 10 * max(base.residual, 1e-10)
