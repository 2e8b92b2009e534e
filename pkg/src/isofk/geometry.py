"""Isoradial embeddings: lattice builders, duals, diamond graphs and checks.

Conventions
-----------
Every inner face is stored as a counterclockwise vertex list together with
the center of its circumscribed unit circle.  For an edge ``e = (x, y)`` with
adjacent face centers ``c1`` and ``c2`` the quadrilateral ``x, c1, y, c2`` is
a rhombus of side one.  ``theta[e]`` is the rhombus angle at the primal
endpoints ``x`` and ``y``; the angle at the two centers is ``pi - theta[e]``
and the chord length is ``2 cos(theta[e] / 2)``.  With this choice the three
angles of a triangular face sum to ``pi`` and the dual edge carries
``pi - theta[e]``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidEmbedding, InvalidParameter

TOL = 1e-9


def _angle_between(u, v):
    """Unsigned angle between two planar vectors, in [0, pi]."""
    return float(np.arctan2(abs(u[0] * v[1] - u[1] * v[0]), u[0] * v[0] + u[1] * v[1]))


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def circumcenter(a, b, c):
    """Circumcenter of the triangle ``a, b, c``."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-15:
        raise InvalidEmbedding("degenerate face (collinear vertices)")
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return np.array([ux, uy])


def polygon_area(points):
    """Signed shoelace area; positive for counterclockwise order."""
    p = np.asarray(points, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


class IsoradialGraph:
    """Finite planar graph whose inner faces are inscribed in unit circles.

    Parameters
    ----------
    vertices : array_like, shape (n, 2)
    edges : array_like, shape (m, 2)
        Vertex index pairs; each undirected edge is listed once.
    faces : list of list of int
        Inner faces.  Orientation is normalized to counterclockwise.
    validate : bool
        Run the isoradial, rhombus and planarity checks.
    """

    def __init__(self, vertices, edges, faces, validate=True, label=""):
        self.vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.label = label
        self.faces = []
        for f in faces:
            f = [int(v) for v in f]
            if polygon_area(self.vertices[f]) < 0:
                f = f[::-1]
            self.faces.append(f)
        self.edge_index = {}
        for k, (i, j) in enumerate(self.edges):
            key = (min(i, j), max(i, j))
            if key in self.edge_index:
                raise InvalidEmbedding("duplicate edge %s" % (key,), [key])
            self.edge_index[key] = k
        self.vertex_edges = [[] for _ in range(len(self.vertices))]
        for k, (i, j) in enumerate(self.edges):
            self.vertex_edges[i].append(k)
            self.vertex_edges[j].append(k)
        self._face_topology()
        self.centers = self._compute_centers()
        self.theta = self._compute_theta()
        if validate:
            self.validate()

    # -- construction helpers -------------------------------------------------

    def _face_topology(self):
        # edge_faces[e] = [left, right] relative to the stored direction i -> j
        m = len(self.edges)
        self.edge_faces = -np.ones((m, 2), dtype=np.int64)
        bad = []
        for fi, f in enumerate(self.faces):
            for a, b in zip(f, f[1:] + f[:1]):
                key = (min(a, b), max(a, b))
                if key not in self.edge_index:
                    bad.append(fi)
                    continue
                e = self.edge_index[key]
                side = 0 if self.edges[e][0] == a else 1
                if self.edge_faces[e, side] != -1:
                    bad.append(fi)
                self.edge_faces[e, side] = fi
        if bad:
            raise InvalidEmbedding("faces do not match the edge list", sorted(set(bad)))

    def _compute_centers(self):
        c = np.zeros((len(self.faces), 2))
        for fi, f in enumerate(self.faces):
            p = self.vertices[f]
            c[fi] = circumcenter(p[0], p[1], p[2])
        return c

    def far_center(self, e, side):
        """Center on ``side`` of edge ``e``, reflected across the chord if missing."""
        f = self.edge_faces[e, side]
        if f >= 0:
            return self.centers[f]
        other = self.edge_faces[e, 1 - side]
        if other < 0:
            raise InvalidEmbedding("edge %d has no inner face" % e, [int(e)])
        i, j = self.edges[e]
        return self.vertices[i] + self.vertices[j] - self.centers[other]

    def _compute_theta(self):
        th = np.zeros(len(self.edges))
        for e, (i, j) in enumerate(self.edges):
            if self.edge_faces[e, 0] < 0 and self.edge_faces[e, 1] < 0:
                th[e] = np.nan
                continue
            x = self.vertices[i]
            th[e] = _angle_between(self.far_center(e, 0) - x, self.far_center(e, 1) - x)
        return th

    # -- queries ---------------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    def edge_id(self, i, j):
        return self.edge_index[(min(i, j), max(i, j))]

    def edge_lengths(self):
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def boundary_edges(self):
        """Edges bordering fewer than two inner faces."""
        return [e for e in range(self.n_edges) if min(self.edge_faces[e]) < 0]

    def rhombus(self, e):
        """Corners ``(x, c_right, y, c_left)`` of the rhombus of edge ``e`` (CCW)."""
        i, j = self.edges[e]
        return (self.vertices[i], self.far_center(e, 1), self.vertices[j], self.far_center(e, 0))

    # -- validation --------------------------------------------------------------

    def violations(self):
        """List of human readable violations of the isoradial conditions."""
        out = []
        for fi, f in enumerate(self.faces):
            r = np.hypot(*(self.vertices[f] - self.centers[fi]).T)
            if np.max(np.abs(r - 1.0)) > TOL:
                out.append(("face", fi, "circumradius %.12g" % r.max()))
        for e in range(self.n_edges):
            if self.edge_faces[e, 0] < 0 and self.edge_faces[e, 1] < 0:
                out.append(("edge", e, "no adjacent inner face"))
                continue
            x, cr, y, cl = self.rhombus(e)
            sides = [np.hypot(*(p - q)) for p, q in ((x, cr), (cr, y), (y, cl), (cl, x))]
            if max(abs(s - 1.0) for s in sides) > TOL:
                out.append(("edge", e, "rhombus side lengths %s" % sides))
                continue
            # the two centers must lie strictly on opposite sides of the chord
            t = y - x
            if not (_cross(t, cl - x) > TOL and _cross(t, cr - x) < -TOL):
                out.append(("edge", e, "degenerate rhombus"))
        out.extend(("edge", e, "crossing") for e in self._crossing_edges())
        return out

    def _crossing_edges(self):
        from shapely import STRtree, LineString

        lines = [LineString(self.vertices[[i, j]]) for i, j in self.edges]
        tree = STRtree(lines)
        bad = set()
        pairs = tree.query(lines, predicate="intersects")
        for a, b in zip(*pairs):
            if a >= b:
                continue
            shared = set(self.edges[a]) & set(self.edges[b])
            if shared:
                # sharing an endpoint is allowed unless the edges overlap
                if lines[a].intersection(lines[b]).length > TOL:
                    bad.update((int(a), int(b)))
                continue
            bad.update((int(a), int(b)))
        return sorted(bad)

    def validate(self):
        v = self.violations()
        if v:
            raise InvalidEmbedding("%d isoradial violations, first: %s" % (len(v), v[0]), v)
        return True

    # -- serialization -----------------------------------------------------------

    def to_dict(self):
        return {
            "vertices": [[float(x), float(y)] for x, y in self.vertices],
            "edges": [[int(i), int(j)] for i, j in self.edges],
            "faces": [list(map(int, f)) for f in self.faces],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=None, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d, validate=True):
        return cls(d["vertices"], d["edges"], d["faces"], validate=validate)

    @classmethod
    def from_json(cls, text, validate=True):
        """Load a graph; circumcenters are recomputed and checked."""
        return cls.from_dict(json.loads(text), validate=validate)


# ---------------------------------------------------------------------------
# lattice builders


def _check_angle(a, name="angle"):
    if not (0.0 < a < np.pi):
        raise InvalidParameter("%s must lie in (0, pi), got %r" % (name, a))


def build_square(n_cols, n_rows, alpha=np.pi / 2):
    """Rectangular lattice with faces inscribed in unit circles.

    Horizontal edges carry ``theta = alpha`` and have length
    ``2 cos(alpha/2)``; vertical edges carry ``pi - alpha``.
    """
    if n_cols < 1 or n_rows < 1:
        raise InvalidParameter("n_cols and n_rows must be >= 1")
    _check_angle(alpha, "rhombus angle")
    h = 2.0 * np.cos(alpha / 2.0)
    v = 2.0 * np.sin(alpha / 2.0)
    nx = n_cols + 1
    idx = lambda i, j: j * nx + i
    verts = [(i * h, j * v) for j in range(n_rows + 1) for i in range(nx)]
    edges = []
    for j in range(n_rows + 1):
        for i in range(n_cols):
            edges.append((idx(i, j), idx(i + 1, j)))
    for j in range(n_rows):
        for i in range(nx):
            edges.append((idx(i, j), idx(i, j + 1)))
    faces = [[idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]
             for j in range(n_rows) for i in range(n_cols)]
    return IsoradialGraph(verts, edges, faces, label="square(%d,%d,%.17g)" % (n_cols, n_rows, alpha))


def _triangle_angles(angles):
    th = tuple(float(a) for a in angles)
    if len(th) != 3:
        raise InvalidParameter("three edge angles required")
    for a in th:
        _check_angle(a, "edge angle")
    if abs(sum(th) - np.pi) > 1e-9:
        raise InvalidParameter("edge angles must sum to pi, got %r" % (sum(th),))
    return th


def _triangular_frame(th):
    # class 0 along u, class 1 along w, class 2 along w - u
    l0 = 2.0 * np.cos(th[0] / 2.0)
    l1 = 2.0 * np.cos(th[1] / 2.0)
    phi = (np.pi - th[2]) / 2.0   # inscribed angle opposite the class-2 side
    u = np.array([l0, 0.0])
    w = l1 * np.array([np.cos(phi), np.sin(phi)])
    return u, w


def build_triangular(n, angles=(np.pi / 3,) * 3):
    """Rhombus-shaped ``n x n`` patch of a periodic isoradial triangulation.

    ``angles`` gives the three edge classes (along ``u``, along ``w`` and
    along ``w - u``); they must sum to ``pi``.
    """
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    th = _triangle_angles(angles)
    u, w = _triangular_frame(th)
    m = n + 1
    idx = lambda i, j: j * m + i
    verts = [i * u + j * w for j in range(m) for i in range(m)]
    edges = []
    for j in range(m):
        for i in range(m):
            if i < n:
                edges.append((idx(i, j), idx(i + 1, j)))
            if j < n:
                edges.append((idx(i, j), idx(i, j + 1)))
            if i > 0 and j < n:
                edges.append((idx(i, j), idx(i - 1, j + 1)))
    faces = []
    for j in range(n):
        for i in range(n):
            faces.append([idx(i, j), idx(i + 1, j), idx(i, j + 1)])
            faces.append([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)])
    lab = "triangular(%d,%s)" % (n, ",".join("%.17g" % a for a in th))
    return IsoradialGraph(verts, edges, faces, label=lab)


def build_hexagonal(n, angles=(np.pi / 3,) * 3):
    """Hexagonal patch obtained as the dual of a triangular patch.

    ``angles`` are the triangular edge classes (summing to ``pi``); the
    hexagonal edges crossing them carry ``pi - theta``.  The result has
    ``n * n`` hexagonal faces.
    """
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    tri = build_triangular(n + 1, angles)
    g = compact(dual(tri).graph)
    g.label = "hexagonal(%d,%s)" % (n, ",".join("%.17g" % a for a in _triangle_angles(angles)))
    return g


# ---------------------------------------------------------------------------
# duality


@dataclass
class DualGraph:
    """Dual of an isoradial graph.

    ``graph`` is the dual embedding.  Vertex ``i`` of ``graph`` is the center
    of primal face ``i``; ``primal_edge[k]`` is the primal edge crossed by
    dual edge ``k`` and ``dual_edge`` is the inverse map (``-1`` for primal
    edges on the boundary, which have no dual).  ``face_vertex[f]`` is the
    primal vertex at the center of dual face ``f``.
    """

    graph: IsoradialGraph
    primal_edge: np.ndarray
    dual_edge: np.ndarray
    face_vertex: np.ndarray
    skipped_edges: list = field(default_factory=list)
    skipped_vertices: list = field(default_factory=list)

    def boundary_report(self):
        return {"skipped_primal_edges": list(self.skipped_edges),
                "skipped_primal_vertices": list(self.skipped_vertices)}


def faces_around_vertex(g, v):
    """Inner faces around ``v`` in counterclockwise order, or None if ``v`` is on the boundary."""
    es = g.vertex_edges[v]
    if not es:
        return None
    for e in es:
        if min(g.edge_faces[e]) < 0:
            return None
    # walk: the face to the left of v -> w is the face to the right of the next edge
    order = []
    e = es[0]
    start = e
    while True:
        i, j = g.edges[e]
        f = g.edge_faces[e, 0] if i == v else g.edge_faces[e, 1]
        order.append(int(f))
        face = g.faces[f]
        k = face.index(v)
        prev = face[k - 1]
        e = g.edge_id(v, prev)
        if e == start or len(order) > len(es):
            break
    return order


def dual(g):
    """Dual embedding; primal faces become vertices at their circumcenters.

    Primal edges without two inner faces and primal vertices on the
    boundary have no dual counterpart; they are listed in the boundary
    report rather than dropped silently.
    """
    dual_edge = -np.ones(g.n_edges, dtype=np.int64)
    d_edges, primal_edge, skipped = [], [], []
    for e in range(g.n_edges):
        left, right = g.edge_faces[e]
        if left < 0 or right < 0:
            skipped.append(e)
            continue
        # orient e* so that x = edges[e][0] stays on its left... keep (right, left)
        dual_edge[e] = len(d_edges)
        d_edges.append((int(right), int(left)))
        primal_edge.append(e)
    d_faces, face_vertex, skipped_v = [], [], []
    covered = set()
    for v in range(g.n_vertices):
        ring = faces_around_vertex(g, v)
        if ring is None:
            skipped_v.append(v)
            continue
        d_faces.append(ring)
        face_vertex.append(v)
        covered.update(g.vertex_edges[v])
    # dual edges that border no dual face (both primal endpoints on the
    # boundary) are reported as skipped as well
    keep = [k for k, e in enumerate(primal_edge) if e in covered]
    for k, e in enumerate(primal_edge):
        if e not in covered:
            skipped.append(e)
            dual_edge[e] = -1
    d_edges = [d_edges[k] for k in keep]
    primal_edge = [primal_edge[k] for k in keep]
    for k, e in enumerate(primal_edge):
        dual_edge[e] = k
    skipped.sort()
    dg = IsoradialGraph(g.centers.copy(), d_edges, d_faces, label="dual(%s)" % g.label)
    return DualGraph(dg, np.array(primal_edge, dtype=np.int64), dual_edge,
                     np.array(face_vertex, dtype=np.int64), skipped, skipped_v)


def compact(g):
    """Copy of ``g`` with isolated vertices removed."""
    used = sorted(set(int(v) for v in g.edges.ravel()))
    new = {v: k for k, v in enumerate(used)}
    edges = [(new[int(i)], new[int(j)]) for i, j in g.edges]
    faces = [[new[v] for v in f] for f in g.faces]
    return IsoradialGraph(g.vertices[used], edges, faces, label=g.label)


# ---------------------------------------------------------------------------
# diamond graph


@dataclass
class DiamondGraph:
    """Rhombic graph on primal vertices and face centers.

    ``points`` holds primal vertices first (same indices as the graph), then
    centers.  ``rhombi[e]`` lists the four corner indices ``(x, c_right, y,
    c_left)`` of the rhombus crossed by primal edge ``e`` in counterclockwise
    order.  ``edges`` are unordered corner pairs (primal index first) and
    ``n_rhombi[k]`` counts the rhombi bordering diamond edge ``k``;
    ``interior`` marks those with two.
    """

    points: np.ndarray
    n_primal: int
    rhombi: list
    edges: list
    n_rhombi: np.ndarray

    @property
    def interior(self):
        return self.n_rhombi == 2

    @property
    def boundary(self):
        return self.n_rhombi == 1

    def side_lengths(self):
        p = self.points
        return np.array([np.hypot(*(p[a] - p[b])) for a, b in self.edges])

    def dual_angles(self):
        """Rhombus angle at the center corners, per rhombus."""
        p = self.points
        return np.array([_angle_between(p[x] - p[cr], p[y] - p[cr]) for x, cr, y, cl in self.rhombi])

    def primal_angles(self):
        p = self.points
        return np.array([_angle_between(p[cr] - p[x], p[cl] - p[x]) for x, cr, y, cl in self.rhombi])


def diamond(g, marks=None):
    """Diamond graph of ``g``.

    A primal edge with only one inner face gets its missing center by
    reflecting the existing one across the edge, so every edge owns a full
    rhombus.  If ``marks`` is a Dobrushin domain, its own diamond graph
    (which contains the dual arc) is returned instead.
    """
    if marks is not None:
        return marks.diamond_graph()
    pts = [tuple(p) for p in g.vertices]
    n0 = len(pts)
    center_id = {}
    for f in range(len(g.faces)):
        center_id[("f", f)] = len(pts)
        pts.append(tuple(g.centers[f]))
    rhombi = []
    for e in range(g.n_edges):
        corners = []
        for side in (1, 0):
            f = g.edge_faces[e, side]
            key = ("f", int(f)) if f >= 0 else ("r", e, side)
            if key not in center_id:
                center_id[key] = len(pts)
                pts.append(tuple(g.far_center(e, side)))
            corners.append(center_id[key])
        i, j = g.edges[e]
        rhombi.append((int(i), corners[0], int(j), corners[1]))
    count = {}
    for x, cr, y, cl in rhombi:
        for s in ((x, cr), (y, cr), (y, cl), (x, cl)):
            count[s] = count.get(s, 0) + 1
    edges = list(count)
    return DiamondGraph(np.array(pts), n0, rhombi, edges, np.array([count[s] for s in edges]))


# ---------------------------------------------------------------------------
# bounded-angle property


@dataclass
class BapReport:
    passed: bool
    theta_min: float
    violators: list

    def __bool__(self):
        return self.passed


def check_bap(g, theta_min):
    """Check ``theta_min <= theta_e <= pi - theta_min`` for every edge (inclusive)."""
    th = g.theta if hasattr(g, "theta") else np.asarray(g)
    bad = [int(e) for e, t in enumerate(th)
           if not (theta_min - TOL <= t <= np.pi - theta_min + TOL)]
    return BapReport(not bad, float(theta_min), bad)
