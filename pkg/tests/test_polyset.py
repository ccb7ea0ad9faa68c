import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ciarlet.cells import ReferenceCell, entity_map, lattice_points
from ciarlet.errors import CapabilityError, DomainError, SingularityError
from ciarlet.polyset import (
    PolySet,
    complete_space,
    curl2d,
    curl3d,
    differentiate,
    div,
    evaluate,
    grad,
    natural_space,
    orthonormal_basis,
    orthonormal_set,
    polyfunction,
    pyramid_lagrange_space,
    restrict,
)
from ciarlet.quadrature import cell_rule
from ciarlet.span import contained_in, spans_same_space

DIMS = {
    "interval": lambda k: k + 1,
    "triangle": lambda k: (k + 1) * (k + 2) // 2,
    "quadrilateral": lambda k: (k + 1) ** 2,
    "tetrahedron": lambda k: (k + 1) * (k + 2) * (k + 3) // 6,
    "hexahedron": lambda k: (k + 1) ** 3,
    "prism": lambda k: (k + 1) ** 2 * (k + 2) // 2,
    "pyramid": lambda k: (k + 1) ** 3,
}
SIMPLEX = {1: "interval", 2: "triangle", 3: "tetrahedron"}


def _interior_points(cell, n, seed):
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        p = rng.uniform(0.05, 0.95, cell.tdim)
        if cell.contains(p[None], tol=0)[0] and (cell.kind != "pyramid" or p[2] < 0.9):
            if cell.kind in ("triangle", "tetrahedron") and p.sum() > 0.95:
                continue
            if cell.kind == "prism" and p[0] + p[1] > 0.95:
                continue
            if cell.kind == "pyramid" and max(p[0], p[1]) + p[2] > 0.95:
                continue
            pts.append(p)
    return np.array(pts)


@pytest.mark.parametrize("kind", list(DIMS))
@pytest.mark.parametrize("k", range(5))
def test_natural_space_dimension(kind, k):
    assert len(natural_space(ReferenceCell(kind), k)) == DIMS[kind](k)


def test_natural_space_examples():
    assert len(natural_space(ReferenceCell("triangle"), 2)) == 6
    pyr = natural_space(ReferenceCell("pyramid"), 1)
    assert len(pyr) == 8
    # denominator power is p0 + p1, so xy carries (1-z)^2 here
    assert "1 * x y / (1-z)^2" in pyr.to_text()
    assert any(t.exponents == (1, 1, 0) and t.denom_power == 2 for t in pyr.terms)
    # the Lagrange subspace uses min(p0, p1) and holds xy/(1-z)
    assert "1 * x y / (1-z)" in pyramid_lagrange_space(1).to_text()
    assert natural_space(ReferenceCell("interval"), 0).to_text() == ["1"]


def test_complete_space_examples():
    assert complete_space(2, 1).to_text() == ["1", "1 * y", "1 * x"]
    assert len(complete_space(3, 2)) == 10
    for k in range(5):
        assert len(complete_space(1, k)) == k + 1
    with pytest.raises(DomainError):
        complete_space(4, 1)


@pytest.mark.parametrize("k", range(5))
def test_pyramid_lagrange_dimension(k):
    assert len(pyramid_lagrange_space(k)) == sum(j * j for j in range(1, k + 2))


def test_pyramid_lagrange_strictly_inside_natural():
    cell = ReferenceCell("pyramid")
    for k in range(1, 4):
        small, big = pyramid_lagrange_space(k), natural_space(cell, k)
        assert contained_in(small, big, cell)
        assert len(small) < len(big)
    assert pyramid_lagrange_space(0).to_text() == ["1"]


@pytest.mark.parametrize("kind", ["interval", "triangle", "quadrilateral", "tetrahedron", "hexahedron", "prism", "pyramid"])
def test_complete_inside_natural(kind):
    cell = ReferenceCell(kind)
    for k in range(4):
        assert contained_in(complete_space(cell.tdim, k), natural_space(cell, k), cell)


def test_evaluate_examples():
    fs = PolySet.from_functions([polyfunction((), {(0,): 1, (1,): -1}), polyfunction((), {(1,): 1})])
    assert np.allclose(evaluate(fs, [[0.0], [1.0]])[:, :, 0], [[1, 0], [0, 1]])
    f = polyfunction((), {((1, 1, 0), 1): 1.0})
    assert f.evaluate([[0.5, 0.5, 0.5]])[0, 0] == pytest.approx(0.5)
    assert polyfunction((), {(2,): 1}).evaluate([[0.5]])[0, 0] == 0.25


def test_singularity_at_apex():
    f = polyfunction((), {((1, 1, 0), 1): 1.0})
    with pytest.raises(SingularityError):
        f.evaluate([[0.0, 0.0, 1.0]])


def test_derivative_examples():
    f = polyfunction((), {(2, 1): 1.0}, ReferenceCell("triangle"))
    assert differentiate(f, 0).to_text() == "2 * x y"
    v = polyfunction((2,), [{(0, 1): -1.0}, {(1, 0): 1.0}], ReferenceCell("triangle"))
    assert curl2d(v).to_text() == "2"
    g = polyfunction((), {((0, 0, 1), 1): 1.0}, ReferenceCell("pyramid"))
    dg = differentiate(g, 2)
    assert dg.to_text() == "1 / (1-z) + 1 * z / (1-z)^2"
    z = 0.3
    h = 1e-6
    fd = (g.evaluate([[0.1, 0.1, z + h]]) - g.evaluate([[0.1, 0.1, z - h]])) / (2 * h)
    assert dg.evaluate([[0.1, 0.1, z]])[0, 0] == pytest.approx(fd[0, 0], rel=1e-6)


def test_shape_errors():
    s = polyfunction((), {(1, 0): 1.0}, ReferenceCell("triangle"))
    with pytest.raises(DomainError):
        curl2d(s)
    with pytest.raises(DomainError):
        div(s)
    with pytest.raises(DomainError):
        differentiate(s, 2)
    with pytest.raises(DomainError):
        grad(polyfunction((2,), [{(1, 0): 1}, {}], ReferenceCell("triangle")))


def test_grad_div_curl_shapes():
    tri = ReferenceCell("triangle")
    f = polyfunction((), {(2, 1): 1.0}, tri)
    g = grad(f)
    assert g.value_shape == (2,)
    assert div(g).to_text() == "2 * y"
    tet = ReferenceCell("tetrahedron")
    v = polyfunction((3,), [{(0, 1, 0): -1.0}, {(1, 0, 0): 1.0}, {}], tet)
    assert curl3d(v).to_text() == ["0", "0", "2"]
    assert curl3d(grad(polyfunction((), {(1, 2, 1): 1.0}, tet))).to_text() == ["0", "0", "0"]


@pytest.mark.parametrize("kind", list(DIMS))
def test_derivatives_match_finite_differences(kind):
    cell = ReferenceCell(kind)
    pts = _interior_points(cell, 20, 1)
    h = 1e-6
    for k in range(5):
        ps = natural_space(cell, k)
        for axis in range(cell.tdim):
            d = differentiate(ps, axis).evaluate(pts)[:, :, 0]
            step = np.zeros(cell.tdim)
            step[axis] = h
            fd = (ps.evaluate(pts + step)[:, :, 0] - ps.evaluate(pts - step)[:, :, 0]) / (2 * h)
            assert np.allclose(d, fd, rtol=1e-6, atol=1e-6 * max(1.0, np.abs(d).max()))


def test_restrict_examples():
    tri = ReferenceCell("triangle")
    f = polyfunction((), {(2, 0): 1.0}, tri)
    assert restrict(f, entity_map(tri, (1, 1))).to_text() == "0"
    v = polyfunction((2,), [{(2, 0): 1.0}, {(1, 1): 1.0}], tri)
    assert restrict(v, entity_map(tri, (1, 2))).to_text() == ["1 * x^2", "0"]
    one = polyfunction((), {(0, 0, 0): 1.0}, ReferenceCell("tetrahedron"))
    assert restrict(one, entity_map(ReferenceCell("tetrahedron"), (2, 0)), ReferenceCell("triangle")).to_text() == "1"


@pytest.mark.parametrize("kind", ["triangle", "quadrilateral", "tetrahedron", "hexahedron", "prism", "pyramid"])
def test_restrict_commutes_with_evaluate(kind):
    cell = ReferenceCell(kind)
    ps = natural_space(cell, 3)
    for e in cell.all_entities():
        if e.dim == 0:
            continue
        m = entity_map(cell, e)
        ref = cell.entity_reference(e)
        if kind == "pyramid" and np.any(m.jacobian[2] != 0):
            with pytest.raises(CapabilityError):
                restrict(ps, m, ref)
            continue
        t = lattice_points(ref, 4)
        r = restrict(ps, m, ref)
        assert np.allclose(r.evaluate(t), ps.evaluate(m(t)), atol=1e-12)


def test_orthonormal_interval_examples():
    ps = orthonormal_basis(ReferenceCell("interval"), 1)
    x = np.linspace(0, 1, 7)[:, None]
    vals = ps.evaluate(x)[:, :, 0]
    assert np.allclose(vals[0], 1.0)
    assert np.allclose(np.abs(vals[1]), np.abs(np.sqrt(3) * (2 * x[:, 0] - 1)))


@pytest.mark.parametrize("kind", ["interval", "triangle", "quadrilateral", "tetrahedron", "hexahedron", "prism"])
@pytest.mark.parametrize("k", [0, 1, 2, 4])
def test_orthonormal_gram_identity(kind, k):
    cell = ReferenceCell(kind)
    ps = orthonormal_set(cell, k)
    rule = cell_rule(cell, 2 * k)
    v = ps.evaluate(rule.points)[:, :, 0]
    gram = (v * rule.weights) @ v.T
    assert np.allclose(gram, np.eye(len(v)), atol=1e-12)
    # raw monomials of hex degree 4 are too ill-conditioned for a two-sided rank test
    assert contained_in(natural_space(cell, k), ps, cell)
    assert len(v) == len(natural_space(cell, k))
    if k <= 2:
        # expanded monomial form loses digits as the degree grows
        w = orthonormal_basis(cell, k).evaluate(rule.points)[:, :, 0]
        assert np.allclose((w * rule.weights) @ w.T, np.eye(len(w)), atol=1e-10)


def test_orthonormal_pyramid_unsupported():
    with pytest.raises(CapabilityError):
        orthonormal_basis(ReferenceCell("pyramid"), 1)


def test_orthonormal_on_placed_cell():
    cell = ReferenceCell("triangle", ((1, 1), (3, 1), (1, 2)))
    ps = orthonormal_basis(cell, 2)
    rule = cell_rule(cell, 4)
    v = ps.evaluate(rule.points)[:, :, 0]
    assert np.allclose((v * rule.weights) @ v.T, np.eye(6), atol=1e-10)


def test_text_and_json_forms():
    f = polyfunction((), {(0, 0): 2.0, (1, 2): -0.5}, ReferenceCell("triangle"))
    assert f.to_text() == "2 - 0.5 * x y^2"
    data = f.to_json()
    assert data["value_shape"] == []
    assert data["terms"] == [[0, 0, 0, 0], [1, 2, 0, 0]]
    assert data["coefficients"] == [[2.0, -0.5]]


def test_term_order_is_graded():
    terms = natural_space(ReferenceCell("quadrilateral"), 2).terms
    keys = [t.sort_key for t in terms]
    assert keys == sorted(keys)
    assert keys[0][0] == 0 and keys[-1][0] == 4


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(["interval", "triangle", "quadrilateral", "tetrahedron"]),
    st.integers(0, 4),
    st.integers(0, 2**31 - 1),
)
def test_combination_matches_evaluation(kind, k, seed):
    cell = ReferenceCell(kind)
    ps = natural_space(cell, k)
    mat = np.random.default_rng(seed).normal(size=(3, len(ps)))
    pts = lattice_points(cell, 4)
    assert np.allclose(ps.combine(mat).evaluate(pts)[:, :, 0], mat @ ps.evaluate(pts)[:, :, 0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 5), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_restrict_to_segment_property(k, a, b):
    from ciarlet.cells import AffineMap

    tri = ReferenceCell("triangle")
    ps = natural_space(tri, k)
    m = AffineMap(np.array([a * 0.5, b * 0.5]), np.array([[0.5 - a * 0.5], [0.1]]))
    t = np.linspace(0, 1, 6)[:, None]
    assert np.allclose(restrict(ps, m).evaluate(t), ps.evaluate(m(t)), atol=1e-12)


def test_dimension_formula_matches_math():
    # (k+1)(k+2)(k+3)/6 is C(k+3, 3)
    for k in range(6):
        assert DIMS["tetrahedron"](k) == math.comb(k + 3, 3)
