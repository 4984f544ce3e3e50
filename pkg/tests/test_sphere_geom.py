"""Icosahedron, geodesic predicates, and the four triangle split rules."""

import math

import numpy as np
import pytest

from uhwt import (
    arc_length,
    assign_faces,
    fan_split,
    geodesic_midpoint,
    icosahedron,
    project_to_edge,
    spherical_area,
    split_triangle,
    sphere_dataset,
    triangle_contains,
    uh_coefficient,
)
from uhwt.core import triangle_cell
from uhwt.errors import AntipodalPointsError, DegenerateTriangleError
from uhwt.sphere_geom import _ENDPOINT_EPS


BASE = icosahedron()


def normalize(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def face_cell(points, face=0, depth=0):
    verts = BASE.face_vertices(face)
    inside = [i for i, p in enumerate(points) if triangle_contains(verts, p)]
    return triangle_cell(verts, np.asarray(inside, dtype=np.intp), depth)


def points_in_face(rng, n, face=0):
    """Uniform points inside one face by rejection."""
    verts = BASE.face_vertices(face)
    out = []
    while len(out) < n:
        cand = rng.standard_normal((4 * n, 3))
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        for p in cand:
            if triangle_contains(verts, p):
                out.append(p)
                if len(out) == n:
                    break
    return np.asarray(out)


class TestIcosahedron:
    def test_counts(self):
        assert BASE.vertices.shape == (12, 3)
        assert BASE.faces.shape == (20, 3)

    def test_unit_vertices(self):
        norms = np.linalg.norm(BASE.vertices, axis=1)
        assert np.abs(norms - 1.0).max() < 1e-12

    def test_equal_edge_arcs(self):
        arcs = []
        for j in range(20):
            v = BASE.face_vertices(j)
            arcs.extend(arc_length(v[e], v[(e + 1) % 3]) for e in range(3))
        assert np.ptp(arcs) < 1e-9
        assert arcs[0] == pytest.approx(1.1071487177940904, abs=1e-9)

    def test_faces_cover_the_sphere(self):
        total = sum(spherical_area(BASE.face_vertices(j)) for j in range(20))
        assert total == pytest.approx(4 * math.pi, abs=1e-9)

    def test_outward_ccw_orientation(self):
        for j in range(20):
            a, b, c = BASE.face_vertices(j)
            assert np.dot(np.cross(a, b), c) > 0


class TestContains:
    def test_centroid_inside(self):
        for j in range(20):
            verts = BASE.face_vertices(j)
            assert triangle_contains(verts, normalize(verts.sum(axis=0)))

    def test_antipode_outside(self):
        verts = BASE.face_vertices(0)
        assert not triangle_contains(verts, -normalize(verts.sum(axis=0)))

    def test_edge_points_assigned_to_exactly_one_face(self):
        verts = BASE.face_vertices(0)
        ts = np.linspace(0.01, 0.99, 100)
        edge_pts = np.array([
            normalize((1 - t) * verts[0] + t * verts[1]) for t in ts
        ])
        idx = assign_faces(BASE, edge_pts)
        containing = [
            {j for j in range(20) if triangle_contains(BASE.face_vertices(j), p)}
            for p in edge_pts
        ]
        for chosen, faces in zip(idx, containing):
            assert chosen in faces
            assert chosen == min(faces)  # boundary tie-break: smallest id
            assert len(faces) <= 2


class TestGeodesicMidpoint:
    def test_symmetry(self):
        mid = geodesic_midpoint([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
        np.testing.assert_allclose(mid, [1 / math.sqrt(2), 1 / math.sqrt(2), 0.0], atol=1e-15)

    def test_identity(self):
        a = normalize([0.3, -0.2, 0.93])
        np.testing.assert_allclose(geodesic_midpoint(a, a), a, atol=1e-15)

    def test_equidistant(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a, b = rng.standard_normal((2, 3))
            a, b = normalize(a), normalize(b)
            m = geodesic_midpoint(a, b)
            assert abs(arc_length(a, m) - arc_length(m, b)) < 1e-12

    def test_antipodal_error(self):
        with pytest.raises(AntipodalPointsError):
            geodesic_midpoint([0.0, 0.0, 1.0], [0.0, 0.0, -1.0])


class TestProjectToEdge:
    def test_point_on_arc_is_fixed(self):
        va, vb = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
        p = normalize([0.6, 0.4, 0.0])
        np.testing.assert_allclose(project_to_edge(p, va, vb), p, atol=1e-12)

    def test_pole_is_undefined(self):
        va, vb = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
        assert project_to_edge(np.array([0.0, 0.0, 1.0]), va, vb) is None

    def test_outside_arc_returns_none(self):
        va, vb = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
        assert project_to_edge(normalize([0.7, -0.5, 0.2]), va, vb) is None

    def test_minimizes_geodesic_distance(self):
        rng = np.random.default_rng(1)
        va, vb = BASE.face_vertices(0)[0], BASE.face_vertices(0)[1]
        ts = np.linspace(0.0, 1.0, 4001)
        arc = np.array([normalize((1 - t) * va + t * vb) for t in ts])
        for p in points_in_face(rng, 10):
            q = project_to_edge(p, va, vb)
            if q is None:
                continue
            best = arc[np.argmax(arc @ p)]
            assert arc_length(p, q) <= arc_length(p, best) + 1e-6


class TestSphericalArea:
    def test_octant(self):
        verts = np.eye(3)
        assert spherical_area(verts) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_icosahedron_face(self):
        assert spherical_area(BASE.face_vertices(3)) == pytest.approx(4 * math.pi / 20, abs=1e-12)

    def test_degenerate(self):
        v = normalize([1.0, 0.4, 0.1])
        with pytest.raises(DegenerateTriangleError):
            spherical_area(np.stack([v, v, normalize([0, 1.0, 0])]))

    def test_additivity_over_splits(self):
        rng = np.random.default_rng(2)
        pts = points_in_face(rng, 30)
        ds = sphere_dataset(pts, rng.normal(size=30))
        cell = face_cell(pts)
        parent_area = spherical_area(cell.triangles[0])
        for rule in ("balance", "adapt", "adapt_vertex", "balance4"):
            split = split_triangle(cell, rule, ds, ds.responses)
            got = sum(spherical_area(c.triangles[0]) for c in split.children)
            assert got == pytest.approx(parent_area, abs=1e-9)


class TestSplitTriangle:
    def test_balance_cuts_longest_edge(self):
        rng = np.random.default_rng(3)
        pts = points_in_face(rng, 20)
        ds = sphere_dataset(pts, rng.normal(size=20))
        cell = face_cell(pts)
        # sub-split once to get unequal edges
        first = split_triangle(cell, "balance", ds, ds.responses)
        child = first.children[0] if first.children[0].mass >= 2 else first.children[1]
        lengths = [
            arc_length(child.triangles[0][e], child.triangles[0][(e + 1) % 3])
            for e in range(3)
        ]
        second = split_triangle(child, "balance", ds, ds.responses)
        if second is not None:
            assert second.edge == int(np.argmax(lengths))

    def test_adapt_scores_all_three_midpoints(self):
        rng = np.random.default_rng(4)
        pts = points_in_face(rng, 40)
        ds = sphere_dataset(pts, rng.normal(size=40))
        cell = face_cell(pts)
        chosen = split_triangle(cell, "adapt", ds, ds.responses)
        w_chosen = abs(uh_coefficient(chosen, cell, ds.responses))
        from uhwt.core import make_edge_split

        best = 0.0
        for e in range(3):
            xi = geodesic_midpoint(cell.triangles[0][e], cell.triangles[0][(e + 1) % 3])
            split = make_edge_split(cell, ds.locations, e, xi)
            if min(c.mass for c in split.children) >= 1:
                best = max(best, abs(uh_coefficient(split, cell, ds.responses)))
        assert w_chosen == pytest.approx(best, rel=1e-12)

    def test_adapt_separates_shifted_half(self):
        # responses +1 on one side of edge 0's midpoint cut, 0 elsewhere
        rng = np.random.default_rng(5)
        pts = points_in_face(rng, 60)
        cell0 = face_cell(pts)
        verts = cell0.triangles[0]
        xi = geodesic_midpoint(verts[0], verts[1])
        normal = np.cross(verts[2], xi)
        responses = (pts @ normal >= 0).astype(np.float64)
        ds = sphere_dataset(pts, responses)
        split = split_triangle(cell0, "adapt", ds, ds.responses)
        assert split.edge == 0

    def test_adapt_vertex_is_candidate_maximum(self):
        rng = np.random.default_rng(6)
        pts = points_in_face(rng, 25)
        ds = sphere_dataset(pts, rng.normal(size=25))
        cell = face_cell(pts)
        chosen = split_triangle(cell, "adapt_vertex", ds, ds.responses)
        w_chosen = abs(uh_coefficient(chosen, cell, ds.responses))
        from uhwt.core import make_edge_split

        verts = cell.triangles[0]
        best = 0.0
        for e in range(3):
            va, vb = verts[e], verts[(e + 1) % 3]
            for i in cell.members:
                xi = project_to_edge(ds.locations[i], va, vb)
                if xi is None:
                    continue
                if arc_length(xi, va) < _ENDPOINT_EPS or arc_length(xi, vb) < _ENDPOINT_EPS:
                    continue
                split = make_edge_split(cell, ds.locations, e, xi)
                if min(c.mass for c in split.children) >= 1:
                    best = max(best, abs(uh_coefficient(split, cell, ds.responses)))
        assert w_chosen == pytest.approx(best, rel=1e-12)

    def test_balance4_grouping_and_partition(self):
        rng = np.random.default_rng(7)
        pts = points_in_face(rng, 120)
        ds = sphere_dataset(pts, rng.normal(size=120))
        cell = face_cell(pts)
        split = split_triangle(cell, "balance4", ds, ds.responses)
        assert split.kind == "quad"
        assert split.plus_group == (0, 2) and split.minus_group == (1, 3)
        merged = np.sort(np.concatenate([c.members for c in split.children]))
        np.testing.assert_array_equal(merged, cell.members)
        # corner 0 touches vertex 0, child 2 is the central triangle
        assert any(np.allclose(row, cell.triangles[0][0]) for row in split.children[0].triangles[0])
        for row in split.children[2].triangles[0]:
            assert not any(np.allclose(row, v) for v in cell.triangles[0])

    def test_min_leaf_rejects(self):
        rng = np.random.default_rng(8)
        pts = points_in_face(rng, 3)
        ds = sphere_dataset(pts, rng.normal(size=3))
        cell = face_cell(pts)
        assert split_triangle(cell, "balance4", ds, ds.responses, n_min=1) is None

    def test_determinism(self):
        rng = np.random.default_rng(9)
        pts = points_in_face(rng, 30)
        ds = sphere_dataset(pts, rng.normal(size=30))
        cell = face_cell(pts)
        for rule in ("balance", "adapt", "adapt_vertex", "balance4"):
            one = split_triangle(cell, rule, ds, ds.responses)
            two = split_triangle(cell, rule, ds, ds.responses)
            for a, b in zip(one.children, two.children):
                np.testing.assert_array_equal(a.members, b.members)

    def test_membership_determinant_rule(self):
        rng = np.random.default_rng(10)
        pts = points_in_face(rng, 50)
        ds = sphere_dataset(pts, rng.normal(size=50))
        cell = face_cell(pts)
        split = split_triangle(cell, "adapt", ds, ds.responses)
        vopp = cell.triangles[0][(split.edge + 2) % 3]
        dets = ds.locations[cell.members] @ np.cross(vopp, split.xi)
        np.testing.assert_array_equal(cell.members[dets >= 0], split.children[0].members)
        np.testing.assert_array_equal(cell.members[dets < 0], split.children[1].members)

    def test_balance_shape_guard(self):
        rng = np.random.default_rng(11)
        pts = points_in_face(rng, 200)
        ds = sphere_dataset(pts, rng.normal(size=200))
        cell = face_cell(pts)
        for _ in range(8):
            split = split_triangle(cell, "balance", ds, ds.responses)
            if split is None:
                break
            parent_area = spherical_area(cell.triangles[0])
            for child in split.children:
                assert spherical_area(child.triangles[0]) >= 1e-6 * parent_area
            cell = max(split.children, key=lambda c: c.mass)


class TestFanSplit:
    def test_separates_close_pairs(self):
        # two nearby points that no mid-edge cut separates
        rng = np.random.default_rng(12)
        verts = BASE.face_vertices(0)
        center = normalize(verts.sum(axis=0))
        jitter = 1e-3 * rng.standard_normal((2, 3))
        pts = np.array([normalize(center + jitter[0]), normalize(center + jitter[1])])
        ds = sphere_dataset(pts, np.array([0.0, 1.0]))
        cell = face_cell(pts)
        assert cell.mass == 2
        split = fan_split(cell, ds, ds.responses)
        assert split is not None
        assert min(c.mass for c in split.children) == 1
