import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isofk.errors import InvalidEmbedding, InvalidParameter
from isofk.geometry import (IsoradialGraph, build_hexagonal, build_square, build_triangular, check_bap,
                            circumcenter, compact, diamond, dual)


def chord_ok(g):
    # rhombus angle at the primal corners theta, unit sides: |xy| = 2 cos(theta / 2)
    return np.max(np.abs(g.edge_lengths() - 2 * np.cos(g.theta / 2)))


def test_square_2x2_isotropic():
    g = build_square(2, 2, np.pi / 2)
    assert g.n_vertices == 9 and g.n_edges == 12
    assert np.allclose(g.theta, np.pi / 2, atol=1e-12)
    assert np.allclose(g.edge_lengths(), np.sqrt(2), atol=1e-12)


def test_square_anisotropic_angles():
    g = build_square(2, 2, np.pi / 3)
    v = g.vertices[g.edges]
    horizontal = np.abs(v[:, 0, 1] - v[:, 1, 1]) < 1e-12
    assert np.allclose(g.theta[horizontal], np.pi / 3, atol=1e-9)
    assert np.allclose(g.theta[~horizontal], 2 * np.pi / 3, atol=1e-9)


def test_square_4x4_diamond_sides_unit():
    g = build_square(4, 4, np.pi / 3)
    dg = diamond(g)
    assert np.max(np.abs(dg.side_lengths() - 1)) < 1e-9


@pytest.mark.parametrize("alpha", [0.0, np.pi, -1.0, 4.0])
def test_square_rejects_bad_angle(alpha):
    with pytest.raises(InvalidParameter):
        build_square(2, 2, alpha)


def test_triangular_equilateral():
    g = build_triangular(3, (np.pi / 3,) * 3)
    assert np.allclose(g.theta, np.pi / 3, atol=1e-9)
    # unit circumradius equilateral triangle: side sqrt(3)
    assert np.allclose(g.edge_lengths(), np.sqrt(3), atol=1e-9)
    assert chord_ok(g) < 1e-9


def test_triangular_right_angle_validates():
    g = build_triangular(3, (np.pi / 2, np.pi / 4, np.pi / 4))
    assert g.violations() == []
    assert np.max(np.abs(diamond(g).side_lengths() - 1)) < 1e-9


def test_triangular_rejects_angle_sum():
    with pytest.raises(InvalidParameter):
        build_triangular(2, (1.0, 1.0, 1.0))


def test_hexagonal_from_equilateral():
    g = build_hexagonal(2)
    assert np.allclose(g.theta, 2 * np.pi / 3, atol=1e-9)
    assert all(len(f) == 6 for f in g.faces)
    assert chord_ok(g) < 1e-9


@pytest.mark.parametrize("g", [build_square(3, 3, 1.1), build_triangular(3, (1.2, 0.9, np.pi - 2.1)),
                               build_hexagonal(2, (1.2, 0.9, np.pi - 2.1))])
def test_chord_formula(g):
    assert chord_ok(g) < 1e-9


def test_dual_of_triangular_is_hexagonal():
    d = dual(build_triangular(3))
    h = d.graph
    assert np.allclose(h.theta, 2 * np.pi / 3, atol=1e-9)
    assert h.violations() == []


@pytest.mark.parametrize("g", [build_square(3, 3, np.pi / 2), build_square(3, 2, 1.0),
                               build_triangular(3, (1.0, 1.3, np.pi - 2.3))])
def test_dual_angles_complementary(g):
    d = dual(g)
    for ke, e in enumerate(d.primal_edge):
        assert abs(g.theta[e] + d.graph.theta[ke] - np.pi) < 1e-9


def test_dual_of_square_is_square():
    g = build_square(3, 3, np.pi / 2)
    d = dual(g)
    assert d.graph.n_vertices == 9 and d.graph.n_edges == 12
    assert np.allclose(d.graph.edge_lengths(), np.sqrt(2), atol=1e-12)
    # the shift is by half a lattice step in both directions
    step = np.sqrt(2)
    assert np.allclose(d.graph.vertices.min(axis=0) - g.vertices.min(axis=0), step / 2)


def test_dual_reports_boundary():
    g = build_square(2, 2, np.pi / 2)
    d = dual(g)
    rep = d.boundary_report()
    skipped = set(rep["skipped_primal_edges"])
    assert set(int(e) for e in g.boundary_edges()) <= skipped
    # every primal edge is either dualised or reported
    assert skipped | set(int(e) for e in d.primal_edge) == set(range(g.n_edges))
    assert not skipped & set(int(e) for e in d.primal_edge)


def test_double_dual_matches_interior():
    g = build_square(4, 4, np.pi / 2)
    dd = dual(dual(g).graph).graph
    inner = g.vertices[[v for v in range(g.n_vertices)
                        if not set(g.vertex_edges[v]) & set(int(e) for e in g.boundary_edges())]]
    for p in dd.vertices:
        assert np.min(np.hypot(*(inner - p).T)) < 1e-9
    assert dd.n_vertices == len(inner)


def test_diamond_counts_2x2():
    g = build_square(2, 2, np.pi / 2)
    dg = diamond(g)
    assert len(dg.rhombi) == g.n_edges == 12
    # the four face centers each meet four sides shared by two rhombi; the
    # remaining sides belong to reflected centers and border one rhombus
    assert dg.interior.sum() == 16
    assert dg.boundary.sum() == len(dg.edges) - 16 == 16
    assert set(dg.n_rhombi.tolist()) == {1, 2}


def test_diamond_rhombus_angle_is_theta():
    g = build_triangular(2, (1.1, 0.8, np.pi - 1.9))
    dg = diamond(g)
    assert np.allclose(dg.primal_angles(), g.theta, atol=1e-9)
    assert np.allclose(dg.dual_angles(), np.pi - g.theta, atol=1e-9)


def test_diamond_single_edge():
    g = build_square(1, 1, np.pi / 2)
    dg = diamond(g)
    assert len(dg.rhombi) == 4
    x, cr, y, cl = dg.rhombi[0]
    assert len({x, cr, y, cl}) == 4
    # one rhombus contributes four diamond edges
    sides = {(x, cr), (y, cr), (y, cl), (x, cl)}
    assert sides <= set(dg.edges)


def test_bap_cases():
    assert check_bap(build_square(2, 2, np.pi / 2), np.pi / 4).passed
    g = build_square(2, 2, np.pi / 12)
    rep = check_bap(g, np.pi / 6)
    assert not rep.passed
    v = g.vertices[g.edges]
    horizontal = set(np.nonzero(np.abs(v[:, 0, 1] - v[:, 1, 1]) < 1e-12)[0].tolist())
    assert horizontal <= set(rep.violators)
    # vertical edges carry 11 pi / 12 > pi - pi / 6, so they are listed as well
    assert set(rep.violators) == set(range(g.n_edges))
    assert check_bap(build_triangular(2, (np.pi / 2, np.pi / 4, np.pi / 4)), np.pi / 4).passed


def test_json_round_trip_lossless():
    g = build_triangular(4, (1.1, 0.8, np.pi - 1.9))
    text = g.to_json()
    h = IsoradialGraph.from_json(text)
    assert h.to_json() == text
    assert np.array_equal(h.vertices, g.vertices)
    assert json.loads(text).keys() == {"vertices", "edges", "faces"}


def test_loader_rejects_non_isoradial():
    d = build_square(2, 2, np.pi / 2).to_dict()
    d["vertices"][4] = [d["vertices"][4][0] + 0.1, d["vertices"][4][1]]
    with pytest.raises(InvalidEmbedding) as exc:
        IsoradialGraph.from_dict(d)
    assert exc.value.violations


def test_circumcenter():
    c = circumcenter(np.array([0.0, 0.0]), np.array([2.0, 0.0]), np.array([0.0, 2.0]))
    assert np.allclose(c, [1.0, 1.0])


def test_compact_drops_isolated():
    g = build_square(1, 1, np.pi / 2)
    h = IsoradialGraph(np.vstack([g.vertices, [[10.0, 10.0]]]), g.edges, g.faces, validate=False)
    assert compact(h).n_vertices == 4


@settings(max_examples=25, deadline=None)
@given(st.floats(0.15, np.pi - 0.15))
def test_square_property(alpha):
    g = build_square(2, 3, alpha)
    assert g.violations() == []
    assert chord_ok(g) < 1e-9
    assert np.max(np.abs(diamond(g).side_lengths() - 1)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 1.4), st.floats(0.2, 1.4))
def test_triangular_property(t1, t2):
    t3 = np.pi - t1 - t2
    g = build_triangular(2, (t1, t2, t3))
    assert g.violations() == []
    assert np.allclose(np.sort(np.unique(np.round(g.theta, 9))), np.sort(np.unique(np.round([t1, t2, t3], 9))))
    h = build_hexagonal(2, (t1, t2, t3))
    assert h.violations() == []
    assert np.all(np.min(np.abs(h.theta[:, None] - (np.pi - np.array([t1, t2, t3]))), axis=1) < 1e-9)
