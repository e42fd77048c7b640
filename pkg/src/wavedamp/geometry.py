"""Planar geometry of the rotated multiplier field and boundary design.

The multiplier field ``m(x) = R_theta(x - x0)`` (rotation by ``theta`` about
the pivot ``x0``) drives every boundary-design decision: the sign of
``m . nu`` along a polygon edge selects Dirichlet, Neumann or mixed boundary
conditions, the strip of pivots that makes an edge mixed is the edge's
*belt*, and the sign/orientation conditions at Dirichlet-Neumann interface
points decide whether a configuration admits a uniform decay estimate.

Conventions
-----------
* Polygons are simple, counter-clockwise; the outward normal of an edge is
  the edge direction rotated by ``-pi/2``.
* ``|m . nu| <= SIGN_TOL`` is treated as zero everywhere.
* Neutral edges (``m . nu`` identically zero) are assigned to the Dirichlet
  part: they carry no feedback either way, and Dirichlet keeps the stiffness
  operator definite.
* At an interface point, ``tau`` is the unit tangent to the boundary pointing
  from the Neumann side into the Dirichlet side, and ``omega`` is the
  interior angle (exactly ``pi`` at points interior to a straight edge).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

#: absolute tolerance under which a sign expression counts as zero
SIGN_TOL = 1e-12

#: tolerance used when comparing an interface angle against pi
ANGLE_TOL = 1e-9


def _as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"point has non-finite coordinates: {p!r}")
    return a


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


# ---------------------------------------------------------------------------
# multiplier field
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MultiplierField:
    """Rotated multiplier ``m(x) = R_theta(x - x0)`` with ``theta in (-pi/2, pi/2)``.

    The dilation coefficient ``d = cos(theta)`` is positive on that interval
    and satisfies ``d**2 + sin(theta)**2 = 1``, the planar instance of the
    normalization ``d**2 + |skew part|**2 = 1``.
    """

    theta: float
    x0: np.ndarray

    def __post_init__(self):
        if not (-math.pi / 2 < self.theta < math.pi / 2):
            raise ValueError(
                f"theta must lie in (-pi/2, pi/2), got {self.theta!r}"
            )
        object.__setattr__(self, "x0", _as_point(self.x0))

    @property
    def d(self) -> float:
        """Dilation part ``cos(theta)`` of the field."""
        return math.cos(self.theta)

    @property
    def rotation(self) -> np.ndarray:
        return _rot(self.theta)

    def __call__(self, x) -> np.ndarray:
        """Evaluate ``m`` at one point or at an ``(n, 2)`` array of points."""
        pts = np.asarray(x, dtype=float)
        return (pts - self.x0) @ self.rotation.T

    def m_dot_nu(self, x, nu) -> float:
        """``m(x) . nu`` evaluated as ``(x - x0) . R_{-theta}(nu)``."""
        w = _rot(-self.theta) @ _as_point(nu)
        return float((_as_point(x) - self.x0) @ w)


def eval_multiplier(field: MultiplierField, x) -> np.ndarray:
    """Evaluate the multiplier field at ``x``; preserves ``|x - x0|``."""
    return field(_as_point(x))


# ---------------------------------------------------------------------------
# polygon domain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    """Directed polygon edge with unit tangent and outward normal."""

    index: int
    start: np.ndarray
    end: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    length: float

    def point_at(self, t: float) -> np.ndarray:
        return self.start + t * (self.end - self.start)


def _segments_properly_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        v = float((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
        return (v > 0) - (v < 0)

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


@dataclass(frozen=True, eq=False)
class PolygonDomain:
    """Simple counter-clockwise polygon given by its ordered vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polygon needs at least 3 planar vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon vertices must be finite")
        x, y = v[:, 0], v[:, 1]
        area2 = float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
        if area2 <= 0.0:
            raise ValueError("vertices must be ordered counter-clockwise")
        n = v.shape[0]
        segs = [(v[i], v[(i + 1) % n]) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue  # adjacent edges share a vertex
                if _segments_properly_intersect(*segs[i], *segs[j]):
                    raise ValueError("polygon is self-intersecting")
        object.__setattr__(self, "vertices", v)
        edges = []
        for i in range(n):
            p, q = v[i], v[(i + 1) % n]
            d = q - p
            length = float(np.hypot(*d))
            if length <= 0.0:
                raise ValueError(f"edge {i} has zero length")
            t = d / length
            nu = np.array([t[1], -t[0]])  # tangent rotated by -pi/2
            edges.append(Edge(i, p, q, t, nu, length))
        object.__setattr__(self, "_edges", tuple(edges))

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def perimeter(self) -> float:
        return sum(e.length for e in self._edges)

    def is_unit_square(self, tol: float = 1e-12) -> bool:
        ref = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        v = self.vertices
        if v.shape != (4, 2):
            return False
        # any cyclic rotation starting at a different vertex still counts
        for shift in range(4):
            if np.allclose(np.roll(v, -shift, axis=0), ref, atol=tol):
                return True
        return False

    @classmethod
    def from_text(cls, text: str) -> "PolygonDomain":
        """Parse a plain-text vertex list: one ``x y`` pair per line, CCW.

        Blank lines and ``#`` comments are ignored.
        """
        pts = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'x y', got {raw!r}")
            try:
                pts.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls(np.array(pts))


def unit_square() -> PolygonDomain:
    """The unit square ``(0,1)^2`` with vertices in CCW order from the origin."""
    return PolygonDomain(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


def load_polygon(path) -> PolygonDomain:
    with open(path, "r", encoding="utf-8") as fh:
        return PolygonDomain.from_text(fh.read())


# ---------------------------------------------------------------------------
# per-edge classification and belts
# ---------------------------------------------------------------------------


class EdgeLabel(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    MIXED = "mixed"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class EdgeClassification:
    """Label of one edge under the sign of ``m . nu``.

    ``split`` is the unique zero of ``m . nu`` along the edge and is present
    iff the label is MIXED; ``first_label`` is then the label of the portion
    before the split (in the CCW direction).
    """

    label: EdgeLabel
    split: np.ndarray | None = None
    t_split: float | None = None
    first_label: EdgeLabel | None = None


def _edge_sign_values(edge: Edge, field: MultiplierField) -> tuple[float, float]:
    """``m . nu`` at the two edge endpoints (the extremes of the affine map)."""
    w = _rot(-field.theta) @ edge.normal
    f0 = float((edge.start - field.x0) @ w)
    f1 = float((edge.end - field.x0) @ w)
    return f0, f1


def classify_edge(
    edge: Edge, field: MultiplierField, tol: float = SIGN_TOL
) -> EdgeClassification:
    """Classify an edge by the sign of the affine function ``m . nu`` along it."""
    f0, f1 = _edge_sign_values(edge, field)
    s0 = 0 if abs(f0) <= tol else (1 if f0 > 0 else -1)
    s1 = 0 if abs(f1) <= tol else (1 if f1 > 0 else -1)
    if s0 * s1 == -1:
        t = f0 / (f0 - f1)
        first = EdgeLabel.NEUMANN if s0 > 0 else EdgeLabel.DIRICHLET
        return EdgeClassification(
            EdgeLabel.MIXED, split=edge.point_at(t), t_split=t, first_label=first
        )
    if s0 > 0 or s1 > 0:
        return EdgeClassification(EdgeLabel.NEUMANN)
    if s0 < 0 or s1 < 0:
        return EdgeClassification(EdgeLabel.DIRICHLET)
    return EdgeClassification(EdgeLabel.NEUTRAL)


@dataclass(frozen=True)
class Belt:
    """Strip of pivot positions for which an edge receives mixed conditions.

    The bounding lines are orthogonal to ``direction = R_{-theta}(nu)`` and
    pass through the edge endpoints; the pivot lies strictly inside iff
    ``lower < x0 . direction < upper``.
    """

    direction: np.ndarray
    lower: float
    upper: float

    def contains(self, x0, tol: float = SIGN_TOL) -> bool:
        s = float(_as_point(x0) @ self.direction)
        return self.lower + tol < s < self.upper - tol

    @property
    def width(self) -> float:
        return self.upper - self.lower


def edge_belt(edge: Edge, theta: float) -> Belt:
    """Belt of the edge for rotation angle ``theta``."""
    if not (-math.pi / 2 < theta < math.pi / 2):
        raise ValueError(f"theta must lie in (-pi/2, pi/2), got {theta!r}")
    w = _rot(-theta) @ edge.normal
    a = float(edge.start @ w)
    b = float(edge.end @ w)
    lower, upper = (a, b) if a <= b else (b, a)
    return Belt(direction=w, lower=lower, upper=upper)


# ---------------------------------------------------------------------------
# boundary partition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryArc:
    """Maximal labeled sub-segment ``[t0, t1]`` of one polygon edge."""

    edge_index: int
    t0: float
    t1: float
    label: EdgeLabel
    start: np.ndarray
    end: np.ndarray


@dataclass(frozen=True)
class InterfacePoint:
    """Point of the interface between the Dirichlet and Neumann parts.

    ``tau`` points from the Neumann side into the Dirichlet side along the
    boundary, ``omega`` is the interior angle, and ``nu`` is the outward
    normal used for reporting ``m . nu`` (the edge normal for a point
    interior to an edge, the Neumann-side normal at a vertex).
    """

    position: np.ndarray
    tau: np.ndarray
    omega: float
    nu: np.ndarray
    at_vertex: bool


@dataclass(frozen=True)
class BoundaryPartition:
    """CCW-ordered labeled arcs covering the whole boundary, plus interfaces."""

    domain: PolygonDomain
    arcs: tuple[BoundaryArc, ...]
    interfaces: tuple[InterfacePoint, ...]

    def arcs_with_label(self, label: EdgeLabel) -> list[BoundaryArc]:
        return [a for a in self.arcs if a.label == label]

    def measure(self, label: EdgeLabel) -> float:
        total = 0.0
        for a in self.arcs:
            if a.label == label:
                total += (a.t1 - a.t0) * self.domain.edges[a.edge_index].length
        return total

    def label_on_edge(self, edge_index: int, t: float, tol: float = 1e-12) -> EdgeLabel:
        """Label of the boundary point at parameter ``t`` of one edge.

        Points lying on the closure of a Dirichlet arc (interfaces included)
        report Dirichlet.
        """
        labels = {
            a.label
            for a in self.arcs
            if a.edge_index == edge_index and a.t0 - tol <= t <= a.t1 + tol
        }
        if not labels:
            raise ValueError(f"t={t} outside [0,1] for edge {edge_index}")
        return EdgeLabel.DIRICHLET if EdgeLabel.DIRICHLET in labels else EdgeLabel.NEUMANN


def _interfaces_from_arcs(
    domain: PolygonDomain, arcs: list[BoundaryArc]
) -> list[InterfacePoint]:
    out = []
    n = len(arcs)
    for k in range(n):
        prev, nxt = arcs[k], arcs[(k + 1) % n]
        if prev.label == nxt.label:
            continue
        pos = nxt.start
        at_vertex = prev.edge_index != nxt.edge_index
        e_prev = domain.edges[prev.edge_index]
        e_next = domain.edges[nxt.edge_index]
        if at_vertex:
            a, b = e_prev.tangent, e_next.tangent
            turn = math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])
            omega = math.pi - turn
        else:
            omega = math.pi
        if prev.label == EdgeLabel.NEUMANN:
            tau = e_next.tangent  # crossing N -> D in CCW direction
            nu = e_prev.normal
        else:
            tau = -e_prev.tangent  # D -> N in CCW order; into D means going back
            nu = e_next.normal
        if not at_vertex:
            nu = e_prev.normal
        out.append(
            InterfacePoint(
                position=pos.copy(), tau=tau.copy(), omega=omega, nu=nu.copy(),
                at_vertex=at_vertex,
            )
        )
    return out


def build_partition(
    domain: PolygonDomain, field: MultiplierField, tol: float = SIGN_TOL
) -> BoundaryPartition:
    """Partition the boundary by the sign of ``m . nu``.

    Every boundary point receives a Dirichlet or Neumann label (neutral edges
    go to Dirichlet); mixed edges are split at the zero of ``m . nu``.
    Raises ``ValueError`` when ``m . nu`` vanishes identically on the whole
    boundary, which admits no stabilizing feedback.
    """
    arcs: list[BoundaryArc] = []
    any_active = False
    for edge in domain.edges:
        cls = classify_edge(edge, field, tol=tol)
        if cls.label == EdgeLabel.MIXED:
            any_active = True
            second = (
                EdgeLabel.DIRICHLET
                if cls.first_label == EdgeLabel.NEUMANN
                else EdgeLabel.NEUMANN
            )
            arcs.append(
                BoundaryArc(edge.index, 0.0, cls.t_split, cls.first_label,
                            edge.start, cls.split)
            )
            arcs.append(
                BoundaryArc(edge.index, cls.t_split, 1.0, second,
                            cls.split, edge.end)
            )
        else:
            label = cls.label
            if label == EdgeLabel.NEUTRAL:
                label = EdgeLabel.DIRICHLET
            elif label == EdgeLabel.NEUMANN:
                any_active = True
            arcs.append(BoundaryArc(edge.index, 0.0, 1.0, label, edge.start, edge.end))
    if not any_active:
        raise ValueError(
            "m . nu vanishes on the whole boundary: no stabilizable configuration"
        )
    interfaces = _interfaces_from_arcs(domain, arcs)
    return BoundaryPartition(domain, tuple(arcs), tuple(interfaces))


def explicit_partition(
    domain: PolygonDomain, pieces: list[tuple[int, float, float, EdgeLabel]]
) -> BoundaryPartition:
    """Build a partition from explicit ``(edge_index, t0, t1, label)`` pieces.

    The pieces must tile the boundary exactly, in CCW order.
    """
    arcs = []
    by_edge: dict[int, list[tuple[float, float, EdgeLabel]]] = {}
    for idx, t0, t1, label in pieces:
        if label not in (EdgeLabel.DIRICHLET, EdgeLabel.NEUMANN):
            raise ValueError("explicit arcs must be Dirichlet or Neumann")
        if not (0.0 <= t0 < t1 <= 1.0):
            raise ValueError(f"bad arc parameters ({t0}, {t1}) on edge {idx}")
        by_edge.setdefault(idx, []).append((t0, t1, label))
    for edge in domain.edges:
        spans = sorted(by_edge.get(edge.index, []))
        cover = 0.0
        for t0, t1, label in spans:
            if abs(t0 - cover) > 1e-12:
                raise ValueError(f"edge {edge.index} not fully covered")
            arcs.append(
                BoundaryArc(edge.index, t0, t1, label,
                            edge.point_at(t0), edge.point_at(t1))
            )
            cover = t1
        if abs(cover - 1.0) > 1e-12:
            raise ValueError(f"edge {edge.index} not fully covered")
    interfaces = _interfaces_from_arcs(domain, arcs)
    return BoundaryPartition(domain, tuple(arcs), tuple(interfaces))


def lower_left_dirichlet_partition(domain: PolygonDomain | None = None) -> BoundaryPartition:
    """Fixed study partition of the unit square.

    Dirichlet on the bottom edge and on the lower half of the left edge,
    Neumann elsewhere; the interface is ``{(1, 0), (0, 1/2)}``.
    """
    domain = domain if domain is not None else unit_square()
    if not domain.is_unit_square():
        raise ValueError("the fixed study partition is defined on the unit square")
    D, N = EdgeLabel.DIRICHLET, EdgeLabel.NEUMANN
    return explicit_partition(
        domain,
        [
            (0, 0.0, 1.0, D),   # bottom
            (1, 0.0, 1.0, N),   # right
            (2, 0.0, 1.0, N),   # top
            (3, 0.0, 0.5, N),   # left, upper half (CCW runs top to bottom)
            (3, 0.5, 1.0, D),   # left, lower half
        ],
    )


# ---------------------------------------------------------------------------
# admissibility conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InterfaceCheck:
    """Sign data and verdicts for one interface point."""

    point: InterfacePoint
    m_dot_tau: float
    m_dot_nu: float
    s2_ok: bool
    r_ok: bool


@dataclass(frozen=True)
class ConditionsReport:
    """Outcome of the admissibility checks for one (domain, partition, field).

    ``s1_*`` report the sign compatibility of ``m . nu`` on the two boundary
    parts, each interface entry carries the orientation check (angle
    dichotomy with ``m . tau <= 0`` at straight-edge interfaces) and the
    requirement that ``m . nu`` vanish there; ``overall_ok`` is the
    conjunction of everything.
    """

    interface_checks: tuple[InterfaceCheck, ...]
    s1_neumann_ok: bool
    s1_dirichlet_ok: bool
    s1_min_neumann: float
    s1_max_dirichlet: float

    @property
    def s1_ok(self) -> bool:
        return self.s1_neumann_ok and self.s1_dirichlet_ok

    @property
    def s2_ok(self) -> bool:
        return all(c.s2_ok for c in self.interface_checks)

    @property
    def r_ok(self) -> bool:
        return all(c.r_ok for c in self.interface_checks)

    @property
    def overall_ok(self) -> bool:
        return self.s1_ok and self.s2_ok and self.r_ok


def check_conditions(
    domain: PolygonDomain,
    partition: BoundaryPartition,
    field: MultiplierField,
    tol: float = SIGN_TOL,
) -> ConditionsReport:
    """Check the sign condition, the orientation condition and ``m . nu = 0``
    at interfaces; violations are reported, never raised."""
    if partition.domain is not domain and not np.array_equal(
        partition.domain.vertices, domain.vertices
    ):
        raise ValueError("partition was built for a different domain")

    s1_min_n = math.inf
    s1_max_d = -math.inf
    for arc in partition.arcs:
        edge = domain.edges[arc.edge_index]
        w = _rot(-field.theta) @ edge.normal
        vals = [
            float((edge.point_at(arc.t0) - field.x0) @ w),
            float((edge.point_at(arc.t1) - field.x0) @ w),
        ]
        if arc.label == EdgeLabel.NEUMANN:
            s1_min_n = min(s1_min_n, *vals)
        else:
            s1_max_d = max(s1_max_d, *vals)
    s1_neumann_ok = s1_min_n == math.inf or s1_min_n >= -tol
    s1_dirichlet_ok = s1_max_d == -math.inf or s1_max_d <= tol

    checks = []
    for ip in partition.interfaces:
        m = field(ip.position)
        m_tau = float(m @ ip.tau)
        m_nu = float(m @ ip.nu)
        straight = abs(ip.omega - math.pi) <= ANGLE_TOL
        if straight:
            s2 = m_tau <= tol
            r = abs(m_nu) <= tol
        elif ip.omega < math.pi:
            s2 = True  # convex corner: no orientation constraint applies
            r = True  # normal jumps at a corner, the vanishing condition is vacuous
        else:
            s2 = False  # reflex interface angle is outside the admissible range
            r = True
        checks.append(InterfaceCheck(ip, m_tau, m_nu, s2, r))

    return ConditionsReport(
        interface_checks=tuple(checks),
        s1_neumann_ok=s1_neumann_ok,
        s1_dirichlet_ok=s1_dirichlet_ok,
        s1_min_neumann=s1_min_n if s1_min_n != math.inf else 0.0,
        s1_max_dirichlet=s1_max_d if s1_max_d != -math.inf else 0.0,
    )


# ---------------------------------------------------------------------------
# admissible pivot regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdmissibleMask:
    """Validity of the pivot over a rectangular grid of cell centers.

    ``mask[j, i]`` is the overall admissibility flag for the pivot placed at
    ``(xs[i], ys[j])``; indices ascend with the coordinates.
    """

    theta: float
    xs: np.ndarray
    ys: np.ndarray
    mask: np.ndarray


def admissible_region(
    domain: PolygonDomain,
    theta: float,
    rect: tuple[float, float, float, float],
    resolution: int | tuple[int, int],
    partition_rule=build_partition,
    tol: float = SIGN_TOL,
) -> AdmissibleMask:
    """Evaluate the overall admissibility flag on a grid of pivot positions.

    For each cell center the partition is recomputed with ``partition_rule``
    and the full set of conditions is checked; cells where no partition
    exists at all count as inadmissible.
    """
    if isinstance(resolution, int):
        nx = ny = resolution
    else:
        nx, ny = resolution
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2 in each direction")
    x_lo, y_lo, x_hi, y_hi = rect
    if not (x_hi > x_lo and y_hi > y_lo):
        raise ValueError("rectangle must have positive extent")
    dx = (x_hi - x_lo) / nx
    dy = (y_hi - y_lo) / ny
    xs = x_lo + dx * (np.arange(nx) + 0.5)
    ys = y_lo + dy * (np.arange(ny) + 0.5)
    mask = np.zeros((ny, nx), dtype=bool)
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            field = MultiplierField(theta, np.array([x, y]))
            try:
                part = partition_rule(domain, field, tol=tol)
            except ValueError:
                continue
            mask[j, i] = check_conditions(domain, part, field, tol=tol).overall_ok
    return AdmissibleMask(theta=theta, xs=xs, ys=ys, mask=mask)


def mask_to_csv(result: AdmissibleMask) -> str:
    """Render the mask as 0/1 CSV, top row = largest y (image orientation)."""
    lines = []
    for j in range(result.mask.shape[0] - 1, -1, -1):
        lines.append(",".join("1" if v else "0" for v in result.mask[j]))
    return "\n".join(lines) + "\n"


def mask_to_svg(result: AdmissibleMask, cell: int = 8) -> str:
    """Render the mask as a grayscale SVG grid (admissible = black)."""
    from ._svg import grayscale_grid_svg

    values = result.mask[::-1].astype(float)  # top row = largest y
    return grayscale_grid_svg(values, cell=cell)
