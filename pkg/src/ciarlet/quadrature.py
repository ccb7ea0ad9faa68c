"""Quadrature rules on reference cells and sub-entity inner products."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cells import EntityRef, ReferenceCell, entity_map
from .errors import DomainError


@dataclass(frozen=True, eq=False)
class QuadRule:
    points: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def integrate(self, values) -> float:
        return float(np.asarray(values) @ self.weights)


@lru_cache(maxsize=None)
def _gauss_legendre_nodes(n: int):
    """Nodes and weights on [-1, 1] by Newton iteration on P_n."""
    if n == 1:
        return np.zeros(1), np.full(1, 2.0)
    x = np.cos(np.pi * (np.arange(n) + 0.75) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(1, n):
            p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
        # p1 = P_n, p0 = P_{n-1}
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(1, n):
        p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


def gauss_legendre(n: int) -> QuadRule:
    """n-point Gauss-Legendre rule on [0, 1]."""
    if n < 1:
        raise DomainError("need at least one point")
    x, w = _gauss_legendre_nodes(n)
    return QuadRule(((x + 1.0) / 2.0).reshape(-1, 1), w / 2.0, 2 * n - 1)


def _tensor(*rules):
    pts = np.array(np.meshgrid(*[r[0] for r in rules], indexing="ij")).reshape(len(rules), -1).T
    wts = np.prod(np.array(np.meshgrid(*[r[1] for r in rules], indexing="ij")).reshape(len(rules), -1), axis=0)
    return pts, wts


@lru_cache(maxsize=None)
def _canonical_rule(kind: str, degree: int) -> QuadRule:
    if kind == "point":
        return QuadRule(np.zeros((1, 0)), np.ones(1), 10**9)
    tdim = ReferenceCell(kind).tdim
    n = max(1, (degree + tdim) // 2 + 1)
    x, w = _gauss_legendre_nodes(n)
    g = ((x + 1) / 2, w / 2)
    if kind == "interval":
        pts, wts = g[0].reshape(-1, 1), g[1]
    elif kind == "quadrilateral":
        pts, wts = _tensor(g, g)
    elif kind == "hexahedron":
        pts, wts = _tensor(g, g, g)
    elif kind == "triangle":
        pts, wts = _triangle(g)
    elif kind == "prism":
        tp, tw = _triangle(g)
        pts = np.column_stack([np.repeat(tp, len(g[0]), axis=0), np.tile(g[0], len(tp))])
        wts = np.repeat(tw, len(g[0])) * np.tile(g[1], len(tp))
    elif kind == "tetrahedron":
        u, v, s = _tensor(g, g, g)[0].T
        wts = _tensor(g, g, g)[1] * (1 - v) * (1 - s) ** 2
        pts = np.column_stack([u * (1 - v) * (1 - s), v * (1 - s), s])
    elif kind == "pyramid":
        u, v, s = _tensor(g, g, g)[0].T
        wts = _tensor(g, g, g)[1] * (1 - s) ** 2
        pts = np.column_stack([u * (1 - s), v * (1 - s), s])
    else:  # pragma: no cover - guarded by ReferenceCell
        raise DomainError(kind)
    return QuadRule(pts, wts, 2 * n - 1 - tdim + 1 if kind in ("triangle", "tetrahedron", "pyramid") else 2 * n - 1)


def _triangle(g):
    (u, v), w = _tensor(g, g)[0].T, _tensor(g, g)[1]
    return np.column_stack([u * (1 - v), v]), w * (1 - v)


def cell_rule(cell: ReferenceCell, required_degree: int) -> QuadRule:
    """Rule exact for polynomials of degree required_degree on the cell.

    Simplices and the pyramid use collapsed (Duffy) tensor rules."""
    if required_degree < 0:
        raise DomainError("required degree must be non-negative")
    rule = _canonical_rule(cell.kind, int(required_degree))
    if cell.is_canonical:
        return rule
    m = cell.reference_map
    return QuadRule(m(rule.points), rule.weights * abs(np.linalg.det(m.jacobian)), rule.exact_degree)


def entity_rule(cell: ReferenceCell, e, required_degree: int):
    """(reference points on the entity's cell, physical points, weights) for
    integrating over a sub-entity; weights include the metric factor."""
    e = cell.check_entity(e)
    if e.dim == 0:
        return np.zeros((1, 0)), cell.vertices[[cell.entities[0][e.index][0]]], np.ones(1)
    ref = cell.entity_reference(e)
    rule = _canonical_rule(ref.kind, int(required_degree))
    m = entity_map(cell, e)
    return rule.points, m(rule.points), rule.weights * m.metric


def _degree_of(f) -> int:
    return max([t.degree + t.denom_power for t in f.terms], default=0)


def inner_product(f, g, e, cell: ReferenceCell) -> float:
    """Integral over entity e of f . g, where f and g live on e's reference cell.

    At a vertex this is the Euclidean dot product of the values."""
    if f.value_shape != g.value_shape:
        raise DomainError("inner product needs equal value shapes")
    e = cell.check_entity(e)
    if e.dim == 0:
        return float(f.evaluate(np.zeros((1, 0)))[0] @ g.evaluate(np.zeros((1, 0)))[0])
    ref_pts, _, w = entity_rule(cell, e, _degree_of(f) + _degree_of(g))
    fv = f.evaluate(ref_pts)
    gv = g.evaluate(ref_pts)
    return float(np.einsum("pc,pc,p->", fv, gv, w))


def monomial_integral(kind: str, exponents) -> float:
    """Closed-form integral of x^a y^b z^c over a canonical cell."""
    a, b, c = (tuple(exponents) + (0, 0, 0))[:3]
    f = math.factorial
    if kind == "interval":
        return 1.0 / (a + 1)
    if kind == "quadrilateral":
        return 1.0 / ((a + 1) * (b + 1))
    if kind == "hexahedron":
        return 1.0 / ((a + 1) * (b + 1) * (c + 1))
    if kind == "triangle":
        return f(a) * f(b) / f(a + b + 2)
    if kind == "tetrahedron":
        return f(a) * f(b) * f(c) / f(a + b + c + 3)
    if kind == "prism":
        return f(a) * f(b) / f(a + b + 2) / (c + 1)
    if kind == "pyramid":
        # int_0^1 z^c (1-z)^(a+b+2) dz / ((a+1)(b+1))
        return f(c) * f(a + b + 2) / f(a + b + c + 3) / ((a + 1) * (b + 1))
    raise DomainError(kind)
