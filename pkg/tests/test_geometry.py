import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavedamp import (
    EdgeLabel,
    MultiplierField,
    PolygonDomain,
    admissible_region,
    build_partition,
    check_conditions,
    classify_edge,
    edge_belt,
    eval_multiplier,
    lower_left_dirichlet_partition,
    unit_square,
)
from wavedamp.geometry import SIGN_TOL, explicit_partition, mask_to_csv, mask_to_svg

from conftest import make_field

# bounded coordinates keep |m . nu| comfortably above the sign tolerance
coords = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
angles = st.floats(min_value=-1.4, max_value=1.4, allow_nan=False)


# ---------------------------------------------------------------------------
# multiplier field
# ---------------------------------------------------------------------------


class TestMultiplierField:
    def test_identity_rotation(self):
        f = make_field(0.0, (0.0, 0.0))
        assert np.allclose(eval_multiplier(f, (1.0, 2.0)), [1.0, 2.0])

    def test_quarter_pi_rotation_on_axis(self):
        f = make_field(math.pi / 4, (0.0, 0.0))
        m = eval_multiplier(f, (1.0, 0.0))
        assert np.allclose(m, [math.sqrt(2) / 2, math.sqrt(2) / 2], atol=1e-15)

    def test_general_rotation_matches_matrix_oracle(self):
        theta = 0.3
        f = make_field(theta, (-1.0, -0.5))
        c, s = math.cos(theta), math.sin(theta)
        oracle = np.array([[c, -s], [s, c]]) @ np.array([1.0, 1.5])
        assert np.allclose(eval_multiplier(f, (0.0, 1.0)), oracle, atol=1e-15)

    def test_invalid_theta_rejected_at_construction(self):
        for bad in (math.pi / 2, -math.pi / 2, 2.0):
            with pytest.raises(ValueError):
                MultiplierField(bad, (0.0, 0.0))

    def test_d_is_cos_theta(self):
        f = make_field(0.7, (0.0, 0.0))
        assert f.d == math.cos(0.7)
        assert f.d**2 + math.sin(0.7) ** 2 == pytest.approx(1.0, abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(angles, coords, coords, coords, coords)
    def test_rotation_preserves_norm(self, theta, x0x, x0y, px, py):
        f = make_field(theta, (x0x, x0y))
        m = eval_multiplier(f, (px, py))
        r = math.hypot(px - x0x, py - x0y)
        assert math.hypot(*m) == pytest.approx(r, abs=1e-12, rel=1e-12)


# ---------------------------------------------------------------------------
# edge classification and belts
# ---------------------------------------------------------------------------


def _sample_m_dot_nu(edge, field, n=1000):
    ts = np.linspace(0.0, 1.0, n)
    pts = edge.start[None, :] + ts[:, None] * (edge.end - edge.start)[None, :]
    m = field(pts)
    return m @ edge.normal


class TestClassifyEdge:
    def test_constant_positive_is_neumann(self, square):
        cls = classify_edge(square.edges[2], make_field(0.0, (0.5, 0.5)))
        assert cls.label == EdgeLabel.NEUMANN
        assert cls.split is None

    def test_mixed_split_solves_affine_zero(self, square):
        cls = classify_edge(square.edges[2], make_field(math.pi / 4, (1.5, 0.0)))
        assert cls.label == EdgeLabel.MIXED
        assert np.allclose(cls.split, [0.5, 1.0], atol=1e-12)
        vals = _sample_m_dot_nu(square.edges[2], make_field(math.pi / 4, (1.5, 0.0)))
        # sign sampling agrees: both signs occur
        assert (vals > SIGN_TOL).any() and (vals < -SIGN_TOL).any()

    def test_pivot_on_edge_line_is_neutral(self, square):
        cls = classify_edge(square.edges[0], make_field(0.0, (0.5, 0.0)))
        assert cls.label == EdgeLabel.NEUTRAL

    def test_sign_sampling_agreement_random(self, square, rng):
        # 100 random configurations; classification must agree with the
        # majority sign at 1000 uniformly spaced points
        done = 0
        while done < 100:
            theta = rng.uniform(-1.4, 1.4)
            x0 = rng.uniform(-2.0, 3.0, size=2)
            field = make_field(theta, x0)
            for edge in unit_square().edges:
                vals = _sample_m_dot_nu(edge, field)
                if np.abs(vals).min() < 1e-12:
                    break  # degenerate draw, excluded by the property
                cls = classify_edge(edge, field)
                pos, neg = (vals > 0).any(), (vals < 0).any()
                if pos and neg:
                    assert cls.label == EdgeLabel.MIXED
                elif pos:
                    assert cls.label == EdgeLabel.NEUMANN
                else:
                    assert cls.label == EdgeLabel.DIRICHLET
            else:
                done += 1

    def test_mixed_iff_belt_membership(self, square, rng):
        for _ in range(100):
            theta = rng.uniform(-1.4, 1.4)
            x0 = rng.uniform(-2.0, 3.0, size=2)
            field = make_field(theta, x0)
            for edge in square.edges:
                belt = edge_belt(edge, theta)
                is_mixed = classify_edge(edge, field).label == EdgeLabel.MIXED
                assert belt.contains(x0) == is_mixed


class TestEdgeBelt:
    def test_axis_aligned_belt_is_degenerate(self, square):
        b = edge_belt(square.edges[2], 0.0)
        assert np.allclose(b.direction, [0.0, 1.0])
        assert b.lower == b.upper == 1.0
        assert not b.contains((0.5, 1.0))

    def test_top_edge_quarter_pi_offsets(self, square):
        b = edge_belt(square.edges[2], math.pi / 4)
        r = math.sqrt(2) / 2
        assert np.allclose(b.direction, [r, r], atol=1e-15)
        assert b.lower == pytest.approx(r, abs=1e-15)
        assert b.upper == pytest.approx(math.sqrt(2), abs=1e-15)
        # x0 with x + y in (1, 2) lies inside
        assert b.contains((0.9, 0.9))
        assert not b.contains((0.4, 0.5))
        assert not b.contains((1.2, 0.9))

    def test_outside_belt_never_mixed(self, square):
        field = make_field(0.0, (2.5, -0.7))
        for edge in square.edges:
            assert classify_edge(edge, field).label in (
                EdgeLabel.DIRICHLET,
                EdgeLabel.NEUMANN,
            )


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------


class TestBuildPartition:
    def test_outside_corner_pivot(self, square):
        part = build_partition(square, make_field(0.0, (-1.0, -1.0)))
        labels = {a.edge_index: a.label for a in part.arcs}
        assert labels[0] == EdgeLabel.DIRICHLET  # bottom
        assert labels[3] == EdgeLabel.DIRICHLET  # left
        assert labels[1] == EdgeLabel.NEUMANN  # right
        assert labels[2] == EdgeLabel.NEUMANN  # top
        gamma = sorted(tuple(ip.position) for ip in part.interfaces)
        assert np.allclose(gamma, [(0.0, 1.0), (1.0, 0.0)])

    def test_interior_pivot_all_neumann(self, square):
        part = build_partition(square, make_field(0.0, (0.5, 0.5)))
        assert all(a.label == EdgeLabel.NEUMANN for a in part.arcs)
        assert part.interfaces == ()

    def test_mixed_edge_split_point_in_interfaces(self, square):
        part = build_partition(square, make_field(math.pi / 4, (1.5, 0.0)))
        positions = [tuple(np.round(ip.position, 12)) for ip in part.interfaces]
        assert (0.5, 1.0) in positions

    def test_neutral_edge_assigned_dirichlet(self, square):
        part = build_partition(square, make_field(0.0, (0.5, 0.0)))
        bottom = [a for a in part.arcs if a.edge_index == 0]
        assert len(bottom) == 1 and bottom[0].label == EdgeLabel.DIRICHLET

    def test_all_neutral_rejected(self):
        # a square tiny enough that every sign expression is below tolerance
        eps = 1e-14
        tiny = PolygonDomain(
            np.array([[0, 0], [eps, 0], [eps, eps], [0, eps]], dtype=float)
        )
        with pytest.raises(ValueError, match="whole boundary"):
            build_partition(tiny, make_field(0.0, (eps / 2, eps / 2)))

    def test_sign_condition_by_construction(self, square, rng):
        # sampled m . nu >= -tol on the Neumann part, <= tol on the Dirichlet part
        for _ in range(25):
            field = make_field(rng.uniform(-1.4, 1.4), rng.uniform(-2, 3, size=2))
            part = build_partition(square, field)
            for arc in part.arcs:
                edge = square.edges[arc.edge_index]
                ts = np.linspace(arc.t0, arc.t1, 1000)
                pts = edge.start[None, :] + ts[:, None] * (edge.end - edge.start)
                vals = field(pts) @ edge.normal
                if arc.label == EdgeLabel.NEUMANN:
                    assert vals.min() >= -SIGN_TOL
                else:
                    assert vals.max() <= SIGN_TOL

    def test_interior_interfaces_have_angle_pi_exactly(self, square, rng):
        for _ in range(25):
            field = make_field(rng.uniform(-1.4, 1.4), rng.uniform(-2, 3, size=2))
            part = build_partition(square, field)
            for ip in part.interfaces:
                assert abs(np.linalg.norm(ip.tau) - 1.0) < 1e-14
                assert 0.0 < ip.omega < 2 * math.pi
                if not ip.at_vertex:
                    assert ip.omega == math.pi  # exact by construction

    def test_label_on_edge_ties_to_dirichlet(self, study_partition):
        # (0, 1/2) lies on the closure of both left-edge arcs
        assert study_partition.label_on_edge(3, 0.5) == EdgeLabel.DIRICHLET
        assert study_partition.label_on_edge(3, 0.25) == EdgeLabel.NEUMANN
        assert study_partition.label_on_edge(3, 0.75) == EdgeLabel.DIRICHLET


class TestStudyPartition:
    def test_arcs_and_interfaces(self, square, study_partition):
        assert study_partition.measure(EdgeLabel.DIRICHLET) == pytest.approx(1.5)
        assert study_partition.measure(EdgeLabel.NEUMANN) == pytest.approx(2.5)
        gamma = sorted(tuple(ip.position) for ip in study_partition.interfaces)
        assert np.allclose(gamma, [(0.0, 0.5), (1.0, 0.0)])

    def test_interface_geometry(self, study_partition):
        by_pos = {tuple(ip.position): ip for ip in study_partition.interfaces}
        mid = by_pos[(0.0, 0.5)]
        assert mid.omega == math.pi
        assert np.allclose(mid.tau, [0.0, -1.0])  # Neumann above, Dirichlet below
        corner = by_pos[(1.0, 0.0)]
        assert corner.omega == pytest.approx(math.pi / 2)


# ---------------------------------------------------------------------------
# admissibility conditions
# ---------------------------------------------------------------------------


class TestCheckConditions:
    def test_study_config_valid(self, square, study_partition):
        report = check_conditions(square, study_partition, make_field(0.0, (0.0, -0.5)))
        by_pos = {tuple(c.point.position): c for c in report.interface_checks}
        mid = by_pos[(0.0, 0.5)]
        assert mid.m_dot_tau == pytest.approx(-1.0, abs=1e-14)
        assert abs(mid.m_dot_nu) <= SIGN_TOL
        assert mid.s2_ok and mid.r_ok
        corner = by_pos[(1.0, 0.0)]
        assert corner.point.omega < math.pi and corner.s2_ok and corner.r_ok
        assert report.overall_ok

    def test_pivot_at_interface_boundary_case(self, square, study_partition):
        report = check_conditions(square, study_partition, make_field(0.0, (0.0, 0.5)))
        by_pos = {tuple(c.point.position): c for c in report.interface_checks}
        mid = by_pos[(0.0, 0.5)]
        # m vanishes there: the orientation check passes as a boundary case
        assert mid.m_dot_tau == pytest.approx(0.0, abs=1e-14)
        assert mid.s2_ok and mid.r_ok
        # but the sign condition now fails on the bottom Dirichlet edge
        assert not report.s1_dirichlet_ok

    def test_reflected_pivot_fails_orientation(self, square, study_partition):
        report = check_conditions(square, study_partition, make_field(0.0, (0.0, 1.5)))
        by_pos = {tuple(c.point.position): c for c in report.interface_checks}
        mid = by_pos[(0.0, 0.5)]
        assert mid.m_dot_tau == pytest.approx(1.0, abs=1e-14)
        assert not mid.s2_ok
        assert not report.overall_ok

    def test_wrong_domain_rejected(self, square, study_partition):
        other = PolygonDomain(np.array([[0, 0], [2.0, 0], [0, 2.0]]))
        with pytest.raises(ValueError, match="different domain"):
            check_conditions(other, study_partition, make_field(0.0, (0.0, 0.0)))


# ---------------------------------------------------------------------------
# admissible region
# ---------------------------------------------------------------------------


def _oracle_admissible(square, theta, x0):
    """Independent closed form: an edge's mixed split satisfies the
    orientation condition iff the pivot lies weakly outside the edge line."""
    field = make_field(theta, x0)
    for edge in square.edges:
        if edge_belt(edge, theta).contains(np.asarray(x0)):
            if float((edge.start - np.asarray(x0)) @ edge.normal) > SIGN_TOL:
                return False
    return True


class TestAdmissibleRegion:
    def test_matches_definition_cell_by_cell(self, square):
        res = admissible_region(square, 0.3, (-2.0, -2.0, 3.0, 3.0), 12)
        for j, y in enumerate(res.ys):
            for i, x in enumerate(res.xs):
                field = make_field(0.3, (x, y))
                part = build_partition(square, field)
                expected = check_conditions(square, part, field).overall_ok
                assert res.mask[j, i] == expected

    def test_matches_independent_closed_form(self, square, rng):
        for theta in (0.3, math.pi / 4, 1.0, -0.6):
            res = admissible_region(square, theta, (-2.0, -2.0, 3.0, 3.0), 20)
            for j, y in enumerate(res.ys):
                for i, x in enumerate(res.xs):
                    assert res.mask[j, i] == _oracle_admissible(square, theta, (x, y)), (
                        theta,
                        x,
                        y,
                    )

    def test_barycenter_valid_below_quarter_pi(self, square):
        # for |theta| < pi/4 the belts miss the barycenter, the partition is
        # all-Neumann and every condition holds vacuously; beyond pi/4 the
        # belts cover the square interior and mixed splits fail orientation
        for theta in (0.0, 0.3, 0.7, -0.7):
            res = admissible_region(square, theta, (0.49, 0.49, 0.51, 0.51), 2)
            assert res.mask.all()
        res = admissible_region(square, 1.0, (0.4, 0.4, 0.6, 0.6), 2)
        assert not res.mask.any()

    def test_reflection_symmetry(self, square):
        # reflecting the pivot across x = 1/2 and negating theta preserves
        # the mask for the symmetric square over a symmetric rectangle
        plus = admissible_region(square, 0.5, (-2.0, -2.0, 3.0, 3.0), 15)
        minus = admissible_region(square, -0.5, (-2.0, -2.0, 3.0, 3.0), 15)
        assert np.array_equal(plus.mask, minus.mask[:, ::-1])

    def test_resolution_validation(self, square):
        with pytest.raises(ValueError):
            admissible_region(square, 0.0, (-1, -1, 1, 1), 1)

    def test_csv_and_svg_output(self, square):
        res = admissible_region(square, 0.4, (-1.0, -1.0, 2.0, 2.0), 4)
        csv = mask_to_csv(res)
        rows = csv.strip().split("\n")
        assert len(rows) == 4 and all(len(r.split(",")) == 4 for r in rows)
        assert set(csv.replace(",", "").replace("\n", "")) <= {"0", "1"}
        svg = mask_to_svg(res)
        assert svg.startswith("<svg") and svg.count("<rect") == 16


# ---------------------------------------------------------------------------
# polygon domain plumbing
# ---------------------------------------------------------------------------


class TestPolygonDomain:
    def test_rejects_clockwise(self):
        with pytest.raises(ValueError, match="counter-clockwise"):
            PolygonDomain(np.array([[0, 0], [0, 1.0], [1.0, 1.0], [1.0, 0]]))

    def test_rejects_self_intersection(self):
        # positively oriented but edges 1 and 3 cross
        with pytest.raises(ValueError, match="self-intersecting"):
            PolygonDomain(np.array([[0, 0], [2.0, 0], [0.5, 1.5], [1.5, 1.5]]))

    def test_rejects_too_few_vertices(self):
        with pytest.raises(ValueError):
            PolygonDomain(np.array([[0, 0], [1.0, 0]]))

    def test_outward_normals(self, square):
        normals = [tuple(e.normal) for e in square.edges]
        assert normals == [(0, -1), (1, 0), (0, 1), (-1, 0)]

    def test_from_text(self):
        text = "# triangle\n0 0\n2 0\n\n1 1.5\n"
        tri = PolygonDomain.from_text(text)
        assert tri.n_edges == 3
        with pytest.raises(ValueError, match="expected 'x y'"):
            PolygonDomain.from_text("0 0\n1\n2 2")

    def test_explicit_partition_must_tile(self, square):
        with pytest.raises(ValueError, match="covered"):
            explicit_partition(square, [(0, 0.0, 0.5, EdgeLabel.DIRICHLET)])
