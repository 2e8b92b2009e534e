"""Finite-volume random-cluster measures and their loop representation.

A configuration is a boolean vector over the variable edges of a region.
Boundary conditions are expressed as a :class:`ClusterGraph`: the variable
edges plus a set of permanently open edges (to ghost vertices or along a
wired arc) that realise the boundary partition.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InvalidDomain, InvalidParameter, NotOnPath
from .weights import p_of_beta, x_crit


# ---------------------------------------------------------------------------
# cluster graphs


@dataclass
class ClusterGraph:
    """Graph on ``n`` vertices with variable edges ``uv`` and open edges ``fixed``."""

    n: int
    uv: np.ndarray
    fixed: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    theta: np.ndarray = None

    def __post_init__(self):
        self.uv = np.asarray(self.uv, dtype=np.int64).reshape(-1, 2)
        self.fixed = np.asarray(self.fixed, dtype=np.int64).reshape(-1, 2)

    @property
    def n_edges(self):
        return len(self.uv)

    def components(self, omega):
        """Component labels of the open graph."""
        omega = np.asarray(omega, dtype=bool)
        if omega.shape != (self.n_edges,):
            raise InvalidParameter("configuration has %d bits, expected %d" % (omega.size, self.n_edges))
        e = np.vstack([self.uv[omega], self.fixed])
        a = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(self.n, self.n))
        return connected_components(a, directed=False)

    def count(self, omega):
        return int(self.components(omega)[0])

    def counts(self, omegas):
        """Cluster counts for a batch of configurations (rows of ``omegas``).

        Min-label propagation vectorised across the batch.
        """
        om = np.asarray(omegas, dtype=bool)
        nb = len(om)
        lab = np.tile(np.arange(self.n, dtype=np.int32), (nb, 1))
        rows = np.arange(nb)
        # fixed edges are open in every row
        allu = np.concatenate([self.uv[:, 0], self.fixed[:, 0]])
        allv = np.concatenate([self.uv[:, 1], self.fixed[:, 1]])
        mask = np.hstack([om, np.ones((nb, len(self.fixed)), dtype=bool)])
        while True:
            changed = False
            for k in range(len(allu)):
                u, v = allu[k], allv[k]
                sel = rows[mask[:, k]]
                if sel.size == 0:
                    continue
                lu = lab[sel, u]
                lv = lab[sel, v]
                m = np.minimum(lu, lv)
                if np.any(m != lu) or np.any(m != lv):
                    changed = True
                    lab[sel, u] = m
                    lab[sel, v] = m
            # pointer jumping compresses chains of labels
            lab = np.take_along_axis(lab, lab, axis=1)
            if not changed:
                break
        return (lab == np.arange(self.n)).sum(axis=1)


def cluster_count(graph, omega, bc=None):
    """Number of clusters of ``omega`` with the boundary blocks wired together.

    ``graph`` is a :class:`Region` (then ``bc`` is required), a
    :class:`DobrushinDomain` or a :class:`ClusterGraph`.
    """
    return _as_cluster_graph(graph, bc).count(omega)


def _as_cluster_graph(graph, bc=None):
    if isinstance(graph, ClusterGraph):
        return graph
    if isinstance(graph, DobrushinDomain):
        return graph.cluster_graph()
    if bc is None:
        raise InvalidParameter("a boundary condition is required for a region")
    return graph.cluster_graph(bc)


def edge_probabilities(graph, beta, q):
    return np.asarray(p_of_beta(graph.theta, beta, q), dtype=float).reshape(-1)


def config_weight(graph, omega, q, bc=None, p=None, beta=None):
    """Unnormalised weight ``prod p^open (1-p)^closed * q^k``.

    Edge probabilities come from ``p`` if given, otherwise from the critical
    parametrisation at ``beta``.
    """
    cg = _as_cluster_graph(graph, bc)
    if p is None:
        if beta is None:
            raise InvalidParameter("give either p or beta")
        p = edge_probabilities(cg, beta, q)
    p = np.broadcast_to(np.asarray(p, dtype=float), (cg.n_edges,))
    om = np.asarray(omega, dtype=bool)
    w = np.prod(np.where(om, p, 1.0 - p))
    return float(w * q ** cg.count(om))


# ---------------------------------------------------------------------------
# regions and boundary conditions


@dataclass(frozen=True)
class BoundaryCondition:
    """``kind`` is one of free, wired, partition, dobrushin."""

    kind: str
    blocks: tuple = ()

    @classmethod
    def free(cls):
        return cls("free")

    @classmethod
    def wired(cls):
        return cls("wired")

    @classmethod
    def partition(cls, blocks):
        return cls("partition", tuple(tuple(int(v) for v in b) for b in blocks))

    @classmethod
    def dobrushin(cls):
        return cls("dobrushin")

    def blocks_for(self, region):
        if self.kind == "free":
            return []
        if self.kind == "wired":
            return [tuple(region.boundary)]
        if self.kind == "partition":
            seen = []
            for b in self.blocks:
                seen.extend(b)
            if len(seen) != len(set(seen)) or set(seen) != set(region.boundary):
                raise InvalidParameter("partition blocks must cover the boundary disjointly")
            return [b for b in self.blocks]
        raise InvalidParameter("Dobrushin conditions need a DobrushinDomain")


class Region:
    """Connected finite subgraph of a host isoradial graph.

    The boundary consists of vertices with a host neighbour outside the
    region, together with vertices on the host's outer boundary (the host
    is thought of as a window into an infinite lattice).
    """

    def __init__(self, host, vertices, edges):
        self.host = host
        self.vertices = np.array(sorted(set(int(v) for v in vertices)), dtype=np.int64)
        self.edges = np.array(sorted(set(int(e) for e in edges)), dtype=np.int64)
        self.local = {int(v): k for k, v in enumerate(self.vertices)}
        for e in self.edges:
            i, j = host.edges[e]
            if int(i) not in self.local or int(j) not in self.local:
                raise InvalidDomain("edge %d has an endpoint outside the region" % e)
        self.uv = np.array([[self.local[int(i)], self.local[int(j)]] for i, j in host.edges[self.edges]],
                           dtype=np.int64).reshape(-1, 2)
        self.theta = host.theta[self.edges]
        cg = ClusterGraph(len(self.vertices), self.uv)
        if len(self.vertices) and cg.count(np.ones(len(self.edges), dtype=bool)) != 1:
            raise InvalidDomain("region is not connected")
        host_bnd = set()
        for e in host.boundary_edges():
            host_bnd.update(int(v) for v in host.edges[e])
        bnd = set()
        inside = set(self.local)
        for v in self.vertices:
            v = int(v)
            if v in host_bnd:
                bnd.add(v)
                continue
            for e in host.vertex_edges[v]:
                i, j = host.edges[e]
                w = int(j) if int(i) == v else int(i)
                if w not in inside:
                    bnd.add(v)
                    break
        self.boundary = sorted(bnd)

    @classmethod
    def whole(cls, host):
        return cls(host, range(host.n_vertices), range(host.n_edges))

    @classmethod
    def induced(cls, host, vertices):
        vs = set(int(v) for v in vertices)
        es = [e for e, (i, j) in enumerate(host.edges) if int(i) in vs and int(j) in vs]
        return cls(host, vs, es)

    @classmethod
    def from_faces(cls, host, faces):
        vs, es = set(), set()
        for f in faces:
            face = host.faces[f]
            vs.update(face)
            for a, b in zip(face, face[1:] + face[:1]):
                es.add(host.edge_id(a, b))
        return cls(host, vs, es)

    @property
    def n_edges(self):
        return len(self.edges)

    def cluster_graph(self, bc):
        blocks = bc.blocks_for(self)
        n = len(self.vertices)
        fixed = []
        for k, b in enumerate(blocks):
            for v in b:
                fixed.append((self.local[int(v)], n + k))
        return ClusterGraph(n + len(blocks), self.uv, np.array(fixed, dtype=np.int64).reshape(-1, 2), self.theta)

    def dual_cluster_graph(self):
        """Planar dual of the region with the outer face as one vertex.

        Dual vertex ``k < F`` is the ``k``-th inner face of the region (a
        host face whose edges all belong to the region); vertex ``F`` is
        the outer face.  Dual edge ``k`` crosses region edge ``k`` and has
        angle ``pi - theta``.
        """
        es = set(int(e) for e in self.edges)
        faces = [f for f, face in enumerate(self.host.faces)
                 if all(self.host.edge_id(a, b) in es for a, b in zip(face, face[1:] + face[:1]))]
        fid = {f: k for k, f in enumerate(faces)}
        outer = len(faces)
        uv = []
        for e in self.edges:
            l, r = (int(x) for x in self.host.edge_faces[e])
            uv.append((fid.get(l, outer), fid.get(r, outer)))
        return ClusterGraph(outer + 1, np.array(uv), theta=np.pi - self.theta)


# ---------------------------------------------------------------------------
# Dobrushin domains


def _rot90(v):
    return np.array([-v[1], v[0]])


def _turn(d1, d2):
    """Signed angle from direction ``d1`` to ``d2`` in (-pi, pi]."""
    return float(np.arctan2(d1[0] * d2[1] - d1[1] * d2[0], d1[0] * d2[0] + d1[1] * d2[1]))


def _face_edges_at(host, f, v):
    face = host.faces[f]
    k = face.index(v)
    return host.edge_id(face[k - 1], v), host.edge_id(v, face[(k + 1) % len(face)])


class DobrushinDomain:
    """Region with boundary polygon split into a free arc and a wired arc.

    Parameters
    ----------
    host : IsoradialGraph
        Must contain every face around the region's vertices (a margin).
    polygon : list of int
        Boundary vertices in counterclockwise order.  A two-vertex polygon
        describes a single-edge domain.
    a, b : int
        Positions in ``polygon``.  The free arc runs counterclockwise from
        ``a`` to ``b`` and the wired arc from ``b`` back to ``a``; ``a == b``
        gives the degenerate domain, equivalent to free boundary conditions.
    edges : iterable of int
        Host edges of the region.  Edges of the wired arc are held open and
        are not part of the configuration.

    Diamond edges ("sides") are pairs ``(vertex, host face)``.  Each side
    is crossed in the direction that keeps the primal vertex on the left.
    """

    def __init__(self, host, polygon, a=0, b=0, edges=None, label=""):
        self.host = host
        self.label = label
        poly = [int(v) for v in polygon]
        P = len(poly)
        if P < 2 or len(set(poly)) != P:
            raise InvalidDomain("boundary polygon must be a simple cycle of vertices")
        if not (0 <= a < P and 0 <= b < P):
            raise InvalidDomain("a and b must index the boundary polygon")
        if P == 2 and a != b:
            raise InvalidDomain("a single-edge domain only admits a == b")
        self.polygon, self.a, self.b = poly, int(a), int(b)
        pedges = []
        for k in range(P):
            u, v = poly[k], poly[(k + 1) % P]
            if (min(u, v), max(u, v)) not in host.edge_index:
                raise InvalidDomain("polygon step %d -> %d is not a host edge" % (u, v))
            pedges.append((u, v))
        self.polygon_edges = pedges
        if edges is None:
            edges = {host.edge_id(u, v) for u, v in pedges}
        edges = sorted(set(int(e) for e in edges))
        # wired arc: polygon steps from b to a (counterclockwise)
        wired = []
        if a != b:
            k = self.b
            while k != self.a:
                wired.append(host.edge_id(*pedges[k]))
                k = (k + 1) % P
        self.wired_edges = sorted(set(wired))
        self.var_edges = np.array([e for e in edges if e not in set(self.wired_edges)], dtype=np.int64)
        self.region = Region(host, set(v for e in edges for v in host.edges[e]), edges)
        self.var_index = {int(e): k for k, e in enumerate(self.var_edges)}
        self.edge_set = set(edges)
        self.theta = host.theta[self.var_edges]
        if a == b:
            self.free_arc = poly[self.a:] + poly[:self.a] + [poly[self.a]]
            self.wired_arc = [poly[self.a]]
        else:
            self.free_arc = _arc(poly, self.a, self.b)
            self.wired_arc = _arc(poly, self.b, self.a)
        self._build_sides()
        self._build_terminals()
        self._build_glue()
        self._cache = {}

    # -- construction ------------------------------------------------------------

    @classmethod
    def from_faces(cls, host, faces, a=0, b=0, label=""):
        """Domain formed by a union of host faces with a simple boundary."""
        faces = sorted(set(int(f) for f in faces))
        fset = set(faces)
        es, steps = set(), {}
        for f in faces:
            face = host.faces[f]
            for u, v in zip(face, face[1:] + face[:1]):
                e = host.edge_id(u, v)
                es.add(e)
                l, r = host.edge_faces[e]
                other = r if host.edges[e][0] == u else l
                if other not in fset:
                    if u in steps:
                        raise InvalidDomain("boundary of the face union is not a simple polygon")
                    steps[u] = v
        if not steps:
            raise InvalidDomain("face union has no boundary")
        start = min(steps)
        poly, v = [start], steps[start]
        while v != start:
            poly.append(v)
            if len(poly) > len(steps):
                raise InvalidDomain("boundary of the face union is not a simple polygon")
            v = steps[v]
        if len(poly) != len(steps):
            raise InvalidDomain("face union boundary has several components")
        vs = set(v for f in faces for v in host.faces[f])
        induced = {e for e, (i, j) in enumerate(host.edges) if int(i) in vs and int(j) in vs}
        if induced != es:
            raise InvalidDomain("region has host chords that are not face edges")
        return cls(host, poly, a, b, es, label=label)

    def with_marks(self, a, b):
        return DobrushinDomain(self.host, self.polygon, a, b, self.edge_set, label=self.label)

    def degenerate(self):
        return self.with_marks(0, 0)

    def _build_sides(self):
        host = self.host
        self.side_id = {}
        keys = []
        rh = []
        for e in self.var_edges:
            x, y = (int(v) for v in host.edges[e])
            fl, fr = (int(f) for f in host.edge_faces[e])
            if fl < 0 or fr < 0:
                raise InvalidDomain("host lacks a face next to edge %d; add a margin" % e)
            corners = []
            for key in ((x, fl), (y, fl), (x, fr), (y, fr)):
                if key not in self.side_id:
                    self.side_id[key] = len(keys)
                    keys.append(key)
                corners.append(self.side_id[key])
            rh.append(corners)
        self.side_keys = keys
        S = len(keys)
        self.n_sides = S
        self.rhombus_sides = np.array(rh, dtype=np.int64).reshape(-1, 4)  # xL, yL, xR, yR
        self.side_mid = np.zeros((S, 2))
        self.side_dir = np.zeros((S, 2))
        for s, (v, f) in enumerate(keys):
            c = host.centers[f]
            p = host.vertices[v]
            self.side_mid[s] = 0.5 * (p + c)
            self.side_dir[s] = _rot90(c - p)
        self.enter_rh = -np.ones(S, dtype=np.int64)
        self.exit_rh = -np.ones(S, dtype=np.int64)
        m = len(self.var_edges)
        self.nxt = -np.ones((2, S), dtype=np.int64)     # [closed, open]
        self.turn = np.zeros((2, S))
        self.rhombus_center = np.zeros((m, 2))
        for k, e in enumerate(self.var_edges):
            x, y = host.edges[e]
            cen = 0.5 * (host.vertices[x] + host.vertices[y])
            self.rhombus_center[k] = cen
            sides = self.rhombus_sides[k]
            entering = []
            for s in sides:
                if np.dot(self.side_dir[s], cen - self.side_mid[s]) > 0:
                    if self.enter_rh[s] != -1:
                        raise InvalidDomain("side entered twice")
                    self.enter_rh[s] = k
                    entering.append(s)
                else:
                    if self.exit_rh[s] != -1:
                        raise InvalidDomain("side exited twice")
                    self.exit_rh[s] = k
            if len(entering) != 2:
                raise InvalidDomain("rhombus %d does not have two entering sides" % k)
            xl, yl, xr, yr = sides
            # open edge: arcs turn around the centers; closed: around x and y
            for state, pairs in ((1, ((xl, yl), (xr, yr))), (0, ((xl, xr), (yl, yr)))):
                for s1, s2 in pairs:
                    src, dst = (s1, s2) if s1 in entering else (s2, s1)
                    if dst in entering:
                        raise InvalidDomain("inconsistent pairing in rhombus %d" % k)
                    self.nxt[state, src] = dst
                    self.turn[state, src] = _turn(self.side_dir[src], self.side_dir[dst])
        cnt = np.zeros(S, dtype=np.int64)
        for row in self.rhombus_sides:
            cnt[row] += 1
        self.side_count = cnt
        self.interior = cnt == 2

    def _side_key_index(self, key):
        return self.side_id.get(key, -1)

    def _build_terminals(self):
        host = self.host
        poly = self.polygon
        P = len(poly)

        def outer(u, v):
            e = host.edge_id(u, v)
            l, r = host.edge_faces[e]
            return int(r) if host.edges[e][0] == u else int(l)

        ua, va = poly[self.a], poly[(self.a + 1) % P]
        ub, vb = poly[(self.b - 1) % P], poly[self.b]
        self.e_a = self._side_key_index((ua, outer(ua, va)))
        self.e_b = self._side_key_index((vb, outer(ub, vb)))
        if self.e_a < 0 or self.e_b < 0:
            raise InvalidDomain("marked points are not adjacent to free boundary edges")
        if self.enter_rh[self.e_a] < 0 or self.exit_rh[self.e_b] < 0:
            raise InvalidDomain("terminal sides have the wrong orientation")

    def _chain(self, s):
        """Follow the virtual exterior from exiting side ``s`` to the next entering side."""
        host = self.host
        x, f = self.side_keys[s]
        e_prev = int(self.var_edges[self.exit_rh[s]])
        d = self.side_dir[s]
        total = 0.0
        steps = 0
        while True:
            e1, e2 = _face_edges_at(host, f, x)
            ep = e2 if e1 == e_prev else e1
            if ep in self.var_index:
                t = self._side_key_index((x, f))
                if t < 0 or self.enter_rh[t] < 0:
                    raise InvalidDomain("glue chain ended on a non-entering side")
                return t, total
            i, j = (int(v) for v in host.edges[ep])
            if ep in self.edge_set:          # wired edge, open
                x = j if i == x else i
            else:                            # exterior edge, closed
                l, r = (int(g) for g in host.edge_faces[ep])
                g = r if l == f else l
                if g < 0:
                    raise InvalidDomain("host lacks faces around vertex %d; add a margin" % x)
                f = g
            c = host.centers[f]
            d2 = _rot90(c - host.vertices[x])
            total += _turn(d, d2)
            d = d2
            e_prev = ep
            steps += 1
            if steps > 10 * host.n_edges:
                raise InvalidDomain("glue chain does not terminate")

    def _build_glue(self):
        S = self.n_sides
        exits = [s for s in range(S) if not self.interior[s] and self.exit_rh[s] >= 0]
        entries = [s for s in range(S) if not self.interior[s] and self.enter_rh[s] >= 0]
        self.boundary_sides = np.array(sorted(exits + entries), dtype=np.int64)
        targets = {}
        for s in exits:
            if s == self.e_b:
                continue
            t, w = self._chain(s)
            if t in targets or t == self.e_a:
                raise InvalidDomain("boundary gluing is not a bijection")
            targets[t] = s
            self.nxt[:, s] = t
            self.turn[:, s] = w
        if set(targets) != set(entries) - {self.e_a}:
            raise InvalidDomain("boundary gluing is not a bijection")
        t, w = self._chain(self.e_b)
        if t != self.e_a:
            raise InvalidDomain("exterior path from e_b does not return to e_a")
        self.closing_turn = w

    # -- public views ------------------------------------------------------------

    @property
    def n_edges(self):
        return len(self.var_edges)

    def cluster_graph(self):
        """Variable edges plus the wired arc held open."""
        reg = self.region
        fixed = [(reg.local[int(i)], reg.local[int(j)]) for i, j in self.host.edges[self.wired_edges]]
        uv = np.array([(reg.local[int(i)], reg.local[int(j)]) for i, j in self.host.edges[self.var_edges]],
                      dtype=np.int64).reshape(-1, 2)
        return ClusterGraph(len(reg.vertices), uv, np.array(fixed, dtype=np.int64).reshape(-1, 2), self.theta)

    def wired_local(self):
        return [self.region.local[v] for v in self.wired_arc]

    def x_weights(self, q):
        return np.asarray(x_crit(self.theta, q), dtype=float).reshape(-1)

    def theta_min(self):
        """Smallest ``min(theta, pi - theta)`` over the variable edges."""
        return float(np.min(np.minimum(self.theta, np.pi - self.theta)))

    def free_arc_sides(self):
        """Boundary sides ``(u, g)`` with ``g`` the outer face of a free-arc edge."""
        host = self.host
        out = []
        for k in range(len(self.free_arc) - 1):
            u, v = self.free_arc[k], self.free_arc[k + 1]
            e = host.edge_id(u, v)
            if e not in self.var_index:
                continue
            l, r = host.edge_faces[e]
            g = int(r) if host.edges[e][0] == u else int(l)
            for w in (u, v):
                s = self.side_id[(w, g)]
                if s not in out:
                    out.append(s)
        return out

    def entering_rhombus_sides(self, k):
        """``(entering, exiting)`` side pairs of rhombus ``k``, both counterclockwise."""
        sides = self.rhombus_sides[k]
        cen = self.rhombus_center[k]
        ang = [np.arctan2(*(self.side_mid[s] - cen)[::-1]) for s in sides]
        ordered = [s for _, s in sorted(zip(ang, sides))]
        ent = [s for s in ordered if self.enter_rh[s] == k]
        ext = [s for s in ordered if self.exit_rh[s] == k]
        return ent, ext

    def diamond_graph(self):
        from .geometry import DiamondGraph
        host = self.host
        pts = [tuple(p) for p in host.vertices]
        cid = {}
        rhombi = []
        for k, e in enumerate(self.var_edges):
            x, y = (int(v) for v in host.edges[e])
            fl, fr = (int(f) for f in host.edge_faces[e])
            for f in (fl, fr):
                if f not in cid:
                    cid[f] = len(pts)
                    pts.append(tuple(host.centers[f]))
            rhombi.append((x, cid[fr], y, cid[fl]))
        edges = [(v, cid[f]) for v, f in self.side_keys]
        return DiamondGraph(np.array(pts), host.n_vertices, rhombi, edges, self.side_count.copy())

    # -- loops -------------------------------------------------------------------

    def successor(self, omega):
        """Successor and turn of each side for configuration ``omega``."""
        om = np.asarray(omega, dtype=bool)
        S = self.n_sides
        state = np.ones(S, dtype=np.int64)
        mask = self.enter_rh >= 0
        state[mask] = om[self.enter_rh[mask]].astype(np.int64)
        idx = np.arange(S)
        return self.nxt[state, idx], self.turn[state, idx]

    def config_from_int(self, k):
        return np.array([(k >> i) & 1 for i in range(self.n_edges)], dtype=bool)


def _arc(poly, i, j):
    P = len(poly)
    out = [poly[i]]
    k = i
    while k != j:
        k = (k + 1) % P
        out.append(poly[k])
    return out


@dataclass
class LoopDecomposition:
    """Loops and exploration path of one configuration.

    ``path`` lists the sides crossed by the exploration path from ``e_a``
    to ``e_b``; ``path_winding[i]`` is the winding from ``path[i]`` to
    ``e_b``.  ``loops`` are cyclic side lists.
    """

    domain: DobrushinDomain
    omega: np.ndarray
    path: list
    path_turns: list
    loops: list

    @property
    def path_winding(self):
        return _tail_sums(self.path_turns)

    @property
    def n_loops(self):
        return len(self.loops)

    def winding(self, side):
        """Winding of the exploration path from ``side`` to ``e_b``."""
        try:
            i = self.path.index(side)
        except ValueError:
            raise NotOnPath("side %r is not on the exploration path" % (side,)) from None
        return self.path_winding[i]

    def crossings(self):
        """Every side crossed, with multiplicity."""
        out = list(self.path)
        for lp in self.loops:
            out.extend(lp)
        return out

    def to_json(self):
        mid = self.domain.side_mid
        return json.dumps({
            "path": [mid[s].tolist() for s in self.path],
            "loops": [[mid[s].tolist() for s in lp] for lp in self.loops],
        })


def _tail_sums(turns):
    # W[i] = sum(turns[i:]) where turns[i] is the turn from path[i] to path[i+1]
    w = [0.0] * (len(turns) + 1)
    for i in range(len(turns) - 1, -1, -1):
        w[i] = w[i + 1] + turns[i]
    return w


def loop_decomposition(domain, omega):
    """Trace the exploration path and the loops of ``omega``."""
    nxt, turn = domain.successor(omega)
    S = domain.n_sides
    seen = np.zeros(S, dtype=bool)
    path, turns = [domain.e_a], []
    s = domain.e_a
    seen[s] = True
    while s != domain.e_b:
        t = int(nxt[s])
        turns.append(float(turn[s]))
        if seen[t]:
            raise InvalidDomain("exploration path revisits a side")
        seen[t] = True
        path.append(t)
        s = t
    loops = []
    for s0 in range(S):
        if seen[s0]:
            continue
        lp = [s0]
        seen[s0] = True
        s = int(nxt[s0])
        while s != s0:
            if seen[s]:
                raise InvalidDomain("loop revisits a side")
            seen[s] = True
            lp.append(s)
            s = int(nxt[s])
        loops.append(lp)
    return LoopDecomposition(domain, np.asarray(omega, dtype=bool), path, turns, loops)


def winding(decomposition, side):
    return decomposition.winding(side)


def boundary_winding_range(domain):
    """``(W_min, W_max)`` of the winding to ``e_b`` along the boundary walk.

    Uses the degenerate domain with every edge open, whose exploration path
    follows the whole boundary from ``e_a`` to ``e_b``.
    """
    dom = domain if domain.a == domain.b else domain.degenerate()
    ld = loop_decomposition(dom, np.ones(dom.n_edges, dtype=bool))
    wind = ld.path_winding
    bset = set(int(s) for s in dom.boundary_sides)
    vals = [w for s, w in zip(ld.path, wind) if s in bset]
    return float(min(vals)), float(max(vals))


def boundary_windings(domain):
    """Deterministic winding to ``e_b`` of every boundary side, from the all-open path."""
    ld = loop_decomposition(domain, np.ones(domain.n_edges, dtype=bool))
    return dict(zip(ld.path, ld.path_winding))
