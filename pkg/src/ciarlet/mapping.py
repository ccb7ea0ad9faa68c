"""Geometric maps, push-forwards and pull-backs, and alignment of elements
defined on differently placed reference cells."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cells import AffineMap, ReferenceCell, lattice_points
from .elements import (
    MAP_KINDS,
    CiarletElement,
    Functional,
    _component_matrix,
    build_element,
    push_space,
)
from .errors import DomainError
from .polyset import PolySet, differentiate, natural_space, polyfunction

MapKind = str


@dataclass(frozen=True, eq=False)
class GeometricMap:
    """g(X) = sum_v phi_v(X) x_v with phi_v the degree-1 vertex basis of the
    source cell (P1, Q1, prism or pyramid Lagrange)."""

    source_cell: ReferenceCell
    target_vertices: np.ndarray

    def __post_init__(self):
        verts = np.asarray(self.target_vertices, dtype=float)
        verts = verts.reshape(len(self.source_cell.vertices), -1)
        if verts.shape[1] < self.source_cell.tdim:
            raise DomainError("geometric dimension is below the topological dimension")
        object.__setattr__(self, "target_vertices", verts)

    @property
    def tdim(self) -> int:
        return self.source_cell.tdim

    @property
    def gdim(self) -> int:
        return self.target_vertices.shape[1]

    @cached_property
    def basis(self) -> PolySet:
        cell = self.source_cell
        if cell.kind == "pyramid":
            # the xy/(1-z) term cannot be evaluated at the apex, so write the
            # vertex basis out directly
            r = ((1, 1, 0), 1)
            return PolySet.from_functions([
                polyfunction((), {(0, 0, 0): 1, (1, 0, 0): -1, (0, 1, 0): -1, (0, 0, 1): -1, r: 1}, cell),
                polyfunction((), {(1, 0, 0): 1, r: -1}, cell),
                polyfunction((), {(0, 1, 0): 1, r: -1}, cell),
                polyfunction((), {r: 1}, cell),
                polyfunction((), {(0, 0, 1): 1}, cell),
            ])
        space = natural_space(cell, 1)
        vals = space.evaluate(cell.vertices)[:, :, 0]  # (function, vertex)
        return space.combine(np.linalg.inv(vals))

    @cached_property
    def _basis_derivatives(self) -> list[PolySet]:
        return [differentiate(self.basis, a) for a in range(self.tdim)]

    def __call__(self, points) -> np.ndarray:
        phi = self.basis.evaluate(np.asarray(points, dtype=float).reshape(-1, self.tdim))[:, :, 0]
        return phi.T @ self.target_vertices

    def jacobian(self, points) -> np.ndarray:
        """Shape (point, gdim, tdim)."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.tdim)
        cols = [d.evaluate(pts)[:, :, 0].T @ self.target_vertices for d in self._basis_derivatives]
        return np.stack(cols, axis=2)

    @classmethod
    def from_affine(cls, cell: ReferenceCell, amap: AffineMap) -> "GeometricMap":
        return cls(cell, amap(cell.vertices))

    @classmethod
    def identity(cls, cell: ReferenceCell) -> "GeometricMap":
        return cls(cell, cell.vertices)

    def compose(self, inner: "GeometricMap") -> "GeometricMap":
        """self o inner, valid when inner is affine and lands on self's source."""
        return GeometricMap(inner.source_cell, self(inner.target_vertices))

    def sample_points(self) -> np.ndarray:
        pts = lattice_points(self.source_cell, 4) if self.tdim else self.source_cell.vertices
        idx = np.linspace(0, len(pts) - 1, min(10, len(pts))).round().astype(int)
        return pts[idx]


def is_affine(g: GeometricMap) -> bool:
    if g.source_cell.is_simplex:
        return True
    jac = g.jacobian(g.sample_points())
    scale = max(1.0, float(np.abs(jac).max()))
    return bool(np.all(np.abs(jac - jac[0]) <= 1e-12 * scale))


def _as_table(values, kind: str, gdim: int, tdim: int):
    v = np.asarray(values, dtype=float)
    if v.ndim == 2:
        v = v[:, None, :]
    if v.ndim != 3:
        raise DomainError("tables are (point, component) or (point, function, component)")
    size = v.shape[2]
    expected = {
        "identity": (1, 1),
        "l2_piola": (1, 1),
        "contravariant": (tdim, gdim),
        "covariant": (tdim, gdim),
        "double_contravariant": (tdim * tdim, gdim * gdim),
        "double_covariant": (tdim * tdim, gdim * gdim),
        "covariant_contravariant": (tdim * tdim, gdim * gdim),
    }
    if kind not in expected:
        raise DomainError(f"unknown map kind {kind!r}; expected one of {', '.join(MAP_KINDS)}")
    return v, size, expected[kind]


def _jacobians(g, npts: int, points):
    if isinstance(g, AffineMap):
        return np.broadcast_to(g.jacobian, (npts,) + g.jacobian.shape)
    if points is None:
        if not is_affine(g):
            raise DomainError("a non-affine map needs the reference points")
        points = g.source_cell.vertices[:1]
        jac = g.jacobian(points)
        return np.broadcast_to(jac[0], (npts,) + jac.shape[1:])
    jac = g.jacobian(points)
    if len(jac) != npts:
        raise DomainError("one reference point per table row is needed")
    return jac


def _square(jac):
    if jac.shape[1] != jac.shape[2]:
        raise DomainError("this map kind needs a square Jacobian")
    det = np.linalg.det(jac)
    if np.any(np.abs(det) < 1e-14 * np.maximum(1.0, np.abs(jac).max(axis=(1, 2)) ** jac.shape[1])):
        raise DomainError("singular Jacobian")
    return det, np.linalg.inv(jac)


def _apply(kind: str, g, values, points, inverse: bool):
    squeeze = np.asarray(values).ndim == 2
    jac0 = g.jacobian if isinstance(g, AffineMap) else None
    gdim = jac0.shape[0] if jac0 is not None else g.gdim
    tdim = jac0.shape[1] if jac0 is not None else g.tdim
    v, size, (src, dst) = _as_table(values, kind, gdim, tdim)
    if size != (dst if inverse else src):
        raise DomainError(f"{kind} expects {dst if inverse else src} components, got {size}")
    if kind == "identity":
        out = v.copy()
        return out[:, 0] if squeeze else out
    jac = _jacobians(g, v.shape[0], points)
    det, jinv = _square(jac)
    d = det[:, None, None]
    t = tdim
    if kind == "l2_piola":
        out = v * d if inverse else v / d
    elif kind == "contravariant":
        out = np.einsum("pij,pnj->pni", jinv, v) * d if inverse else np.einsum("pij,pnj->pni", jac, v) / d
    elif kind == "covariant":
        out = np.einsum("pji,pnj->pni", jac, v) if inverse else np.einsum("pji,pnj->pni", jinv, v)
    else:
        m = v.reshape(v.shape[0], v.shape[1], t, t)
        if kind == "double_contravariant":
            out = (
                np.einsum("pia,pnab,pjb->pnij", jinv, m, jinv) * d[..., None] ** 2
                if inverse
                else np.einsum("pia,pnab,pjb->pnij", jac, m, jac) / d[..., None] ** 2
            )
        elif kind == "double_covariant":
            out = (
                np.einsum("pai,pnab,pbj->pnij", jac, m, jac)
                if inverse
                else np.einsum("pai,pnab,pbj->pnij", jinv, m, jinv)
            )
        else:  # covariant_contravariant
            out = (
                np.einsum("pai,pnab,pjb->pnij", jac, m, jinv) * d[..., None]
                if inverse
                else np.einsum("pai,pnab,pjb->pnij", jinv, m, jac) / d[..., None]
            )
        out = out.reshape(v.shape)
    return out[:, 0] if squeeze else out


def push_forward(kind: MapKind, g, values, points=None) -> np.ndarray:
    """Map a reference table to the physical cell, pointwise.

    values has shape (point, component) or (point, function, component), the
    rows being at reference points X; points are those X (only needed when g
    is not affine). Matrix values are flattened row-major."""
    return _apply(kind, g, values, points, inverse=False)


def pull_back(kind: MapKind, g, values, points=None) -> np.ndarray:
    """Inverse of push_forward."""
    return _apply(kind, g, values, points, inverse=True)


def map_functional(l: Functional, g: AffineMap, map_kind: str, target: ReferenceCell) -> Functional:
    """The functional f -> l(pull back of f), carried to the image cell."""
    mat = _component_matrix(map_kind, g.jacobian)
    weights = l.weights @ np.linalg.inv(mat)
    return Functional(
        l.kind, l.entity, g(l.points), weights,
        point=None if l.point is None else tuple(g(np.array(l.point))[0]),
        direction=l.direction, weight=l.weight, selector=l.selector,
    )


def push_element(el: CiarletElement, g: AffineMap, target: ReferenceCell) -> CiarletElement:
    """The element F(el) on target = g(el.cell), vertex i going to vertex i."""
    space = push_space(el.space, g, el.map_kind, target)
    ls = [map_functional(l, g, el.map_kind, target) for l in el.functionals]
    return build_element(
        target, space, ls, el.map_kind,
        superdegree=el.superdegree, degree_hint=el.degree_hint, family=el.family, variant=el.variant,
    )


def align_convention(el: CiarletElement, target_cell_vertices=None) -> CiarletElement:
    """Push an element onto the cell with the given vertices (the canonical
    cell by default), matching vertices by index."""
    cell = el.cell
    target = ReferenceCell(cell.kind) if target_cell_vertices is None else cell.with_vertices(target_cell_vertices)
    if np.array_equal(target.vertices, cell.vertices):
        return el
    g = target.reference_map.compose(cell.reference_map.inverse())
    return push_element(el, g, target)
