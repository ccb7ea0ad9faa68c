import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ciarlet.cells import AffineMap, ReferenceCell, lattice_points
from ciarlet.elements import MAP_KINDS, make_family, tabulate
from ciarlet.errors import DomainError
from ciarlet.mapping import GeometricMap, align_convention, is_affine, map_functional, pull_back, push_forward
from ciarlet.polyset import natural_space
from ciarlet.span import spans_same_space

TRI = ReferenceCell("triangle")
WIDTH = {
    "identity": 1,
    "l2_piola": 1,
    "covariant": 2,
    "contravariant": 2,
    "double_covariant": 4,
    "double_contravariant": 4,
    "covariant_contravariant": 4,
}


def _random_affine(rng, d=2):
    while True:
        jac = rng.normal(size=(d, d))
        if abs(np.linalg.det(jac)) > 0.2:
            return AffineMap(rng.normal(size=d), jac)


def test_is_affine_examples():
    assert is_affine(GeometricMap(TRI, [[1, 1], [3, 1], [1, 4]]))
    quad = ReferenceCell("quadrilateral")
    assert not is_affine(GeometricMap(quad, [[0, 0], [1, 0], [0, 1], [2, 2]]))
    assert is_affine(GeometricMap(quad, [[0, 0], [2, 0], [1, 1], [3, 1]]))
    for kind in ("interval", "quadrilateral", "hexahedron", "prism", "pyramid"):
        assert is_affine(GeometricMap.identity(ReferenceCell(kind)))


def test_geometric_map_interpolates_vertices():
    quad = ReferenceCell("quadrilateral")
    verts = np.array([[0, 0], [1, 0], [0, 1], [2, 2]], dtype=float)
    g = GeometricMap(quad, verts)
    assert np.allclose(g(quad.vertices), verts)
    jac = g.jacobian([[0.0, 0.0], [1.0, 1.0]])
    assert not np.allclose(jac[0], jac[1])
    pyr = ReferenceCell("pyramid")
    assert np.allclose(GeometricMap.identity(pyr)(lattice_points(pyr, 4)), lattice_points(pyr, 4))


def test_push_forward_examples():
    g = AffineMap(np.zeros(1), np.array([[2.0]]))
    vals = np.array([[3.0], [5.0]])
    assert np.array_equal(push_forward("identity", g, vals), vals)
    assert np.allclose(push_forward("l2_piola", g, vals), vals / 2)
    rot = AffineMap(np.zeros(2), np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert np.allclose(push_forward("contravariant", rot, [[1.0, 0.0]]), [[0.0, 1.0]])


def test_pull_back_examples():
    g = AffineMap(np.zeros(1), np.array([[2.0]]))
    assert np.allclose(pull_back("l2_piola", g, push_forward("l2_piola", g, [[1.0]])), [[1.0]])
    rng = np.random.default_rng(3)
    h = _random_affine(rng)
    table = rng.normal(size=(5, 4, 2))
    assert np.allclose(pull_back("covariant", h, push_forward("covariant", h, table)), table, atol=1e-12)
    eye = np.tile(np.eye(2).ravel(), (3, 1))
    assert np.allclose(pull_back("double_covariant", h, push_forward("double_covariant", h, eye)), eye)


def test_push_forward_errors():
    g = AffineMap(np.zeros(2), np.eye(2))
    with pytest.raises(DomainError):
        push_forward("contravariant", g, [[1.0, 2.0, 3.0]])
    with pytest.raises(DomainError):
        push_forward("not_a_map", g, [[1.0]])
    with pytest.raises(DomainError):
        push_forward("covariant", AffineMap(np.zeros(2), np.zeros((2, 2))), [[1.0, 0.0]])


@pytest.mark.parametrize("kind", MAP_KINDS)
def test_identity_and_composition(kind):
    rng = np.random.default_rng(11)
    w = WIDTH[kind]
    for _ in range(5):
        g1, g2 = _random_affine(rng), _random_affine(rng)
        table = rng.normal(size=(4, 3, w))
        ident = AffineMap.identity(2)
        assert np.allclose(push_forward(kind, ident, table), table, atol=1e-14)
        lhs = push_forward(kind, g2.compose(g1), table)
        rhs = push_forward(kind, g2, push_forward(kind, g1, table))
        assert np.allclose(lhs, rhs, atol=1e-10)
        assert np.allclose(pull_back(kind, g1, push_forward(kind, g1, table)), table, atol=1e-12)


def test_geometric_map_push_matches_affine():
    rng = np.random.default_rng(5)
    a = _random_affine(rng)
    g = GeometricMap.from_affine(TRI, a)
    table = rng.normal(size=(3, 2, 2))
    for kind in ("covariant", "contravariant"):
        assert np.allclose(push_forward(kind, g, table), push_forward(kind, a, table))


def test_nonaffine_push_needs_points():
    quad = ReferenceCell("quadrilateral")
    g = GeometricMap(quad, [[0, 0], [1, 0], [0, 1], [2, 2]])
    pts = np.array([[0.2, 0.3], [0.8, 0.9]])
    with pytest.raises(DomainError):
        push_forward("contravariant", g, np.ones((2, 2)))
    out = push_forward("contravariant", g, np.ones((2, 2)), pts)
    back = pull_back("contravariant", g, out, pts)
    assert np.allclose(back, 1.0)


def test_contravariant_preserves_normal_moments():
    rng = np.random.default_rng(7)
    el = make_family("raviart_thomas", "triangle", 1)
    for _ in range(3):
        g = _random_affine(rng)
        target = TRI.with_vertices(g(TRI.vertices)) if np.linalg.det(g.jacobian) > 0 else None
        if target is None:
            g = AffineMap(g.origin, g.jacobian[:, ::-1])
            target = TRI.with_vertices(g(TRI.vertices))
        mat = np.zeros((el.dim, el.dim))
        for i, l in enumerate(el.functionals):
            lt = map_functional(l, g, "contravariant", target)
            mapped = push_forward("contravariant", g, tabulate(el, l.points))
            mat[i] = np.einsum("pnc,pc->n", mapped, lt.weights)
            assert np.allclose(lt.points, g(l.points))
        assert np.allclose(mat, np.eye(el.dim), atol=1e-10)


def test_covariant_preserves_tangent_moments():
    rng = np.random.default_rng(8)
    el = make_family("nedelec_first_kind", "triangle", 1)
    g = _random_affine(rng)
    mat = np.zeros((el.dim, el.dim))
    for i, l in enumerate(el.functionals):
        lt = map_functional(l, g, "covariant", TRI)
        mapped = push_forward("covariant", g, tabulate(el, l.points))
        mat[i] = np.einsum("pnc,pc->n", mapped, lt.weights)
    assert np.allclose(mat, np.eye(el.dim), atol=1e-10)


def test_align_examples():
    el = make_family("lagrange", "triangle", 2)
    assert align_convention(el) is el
    placed = make_family("lagrange", ReferenceCell("interval", ((-1,), (1,))), 1)
    aligned = align_convention(placed)
    assert aligned.cell.is_canonical
    assert spans_same_space(aligned, natural_space(ReferenceCell("interval"), 1), ReferenceCell("interval"))
    assert sorted(l.point[0] for l in aligned.functionals) == [0.0, 1.0]
    assert aligned.kronecker_error() < 1e-12


def test_align_flipped_rt():
    flipped = TRI.with_vertices(((0, 0), (0, 1), (1, 0)))
    el = make_family("raviart_thomas", flipped, 1)
    aligned = align_convention(el)
    assert spans_same_space(aligned, make_family("raviart_thomas", "triangle", 1), TRI)
    assert aligned.kronecker_error() < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(MAP_KINDS), st.integers(0, 2**31 - 1))
def test_round_trip_property(kind, seed):
    rng = np.random.default_rng(seed)
    g = _random_affine(rng)
    table = rng.normal(size=(6, WIDTH[kind]))
    assert np.allclose(pull_back(kind, g, push_forward(kind, g, table)), table, atol=1e-10)
