"""Reference cells: geometry, sub-entity numbering, closures, lattices and
affine entity maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CapabilityError, DomainError

CELL_KINDS = (
    "point",
    "interval",
    "triangle",
    "quadrilateral",
    "tetrahedron",
    "hexahedron",
    "prism",
    "pyramid",
)
SIMPLICES = ("point", "interval", "triangle", "tetrahedron")

_VERTICES = {
    "point": [()],
    "interval": [(0,), (1,)],
    "triangle": [(0, 0), (1, 0), (0, 1)],
    "quadrilateral": [(0, 0), (1, 0), (0, 1), (1, 1)],
    "tetrahedron": [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)],
    "hexahedron": [
        (0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0),
        (0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1),
    ],
    "prism": [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (0, 1, 1)],
    "pyramid": [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1)],
}

# Sub-entities of dimension 1 and 2; vertices and the cell itself are implied.
_EDGES = {
    "interval": [],
    "triangle": [(1, 2), (0, 2), (0, 1)],
    "quadrilateral": [(0, 1), (0, 2), (1, 3), (2, 3)],
    "tetrahedron": [(2, 3), (1, 3), (1, 2), (0, 3), (0, 2), (0, 1)],
    "hexahedron": [
        (0, 1), (0, 2), (0, 4), (1, 3), (1, 5), (2, 3),
        (2, 6), (3, 7), (4, 5), (4, 6), (5, 7), (6, 7),
    ],
    "prism": [(0, 1), (0, 2), (0, 3), (1, 2), (1, 4), (2, 5), (3, 4), (3, 5), (4, 5)],
    "pyramid": [(0, 1), (0, 2), (0, 4), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
}
_FACES = {
    "tetrahedron": [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)],
    "hexahedron": [
        (0, 1, 2, 3), (0, 1, 4, 5), (0, 2, 4, 6),
        (1, 3, 5, 7), (2, 3, 6, 7), (4, 5, 6, 7),
    ],
    "prism": [(0, 1, 2), (0, 1, 3, 4), (0, 2, 3, 5), (1, 2, 4, 5), (3, 4, 5)],
    "pyramid": [(0, 1, 2, 3), (0, 1, 4), (0, 2, 4), (1, 3, 4), (2, 3, 4)],
}

_MEASURE = {
    "point": Fraction(1),
    "interval": Fraction(1),
    "triangle": Fraction(1, 2),
    "quadrilateral": Fraction(1),
    "tetrahedron": Fraction(1, 6),
    "hexahedron": Fraction(1),
    "prism": Fraction(1, 2),
    "pyramid": Fraction(1, 3),
}


class EntityRef(NamedTuple):
    dim: int
    index: int


def _canonical_topology(kind: str) -> tuple[tuple[tuple[int, ...], ...], ...]:
    nv = len(_VERTICES[kind])
    tdim = len(_VERTICES[kind][0])
    topo = [tuple((i,) for i in range(nv))]
    if tdim >= 2:
        topo.append(tuple(_EDGES[kind]))
    if tdim >= 3:
        topo.append(tuple(_FACES[kind]))
    if tdim >= 1:
        topo.append((tuple(range(nv)),))
    return tuple(topo)


def _sub_kind(dim: int, nverts: int) -> str:
    if dim == 0:
        return "point"
    if dim == 1:
        return "interval"
    if dim == 2:
        return "triangle" if nverts == 3 else "quadrilateral"
    return {4: "tetrahedron", 5: "pyramid", 6: "prism", 8: "hexahedron"}[nverts]


@dataclass(frozen=True)
class AffineMap:
    """x = origin + jacobian @ t, taking edim reference coordinates to gdim
    coordinates."""

    origin: np.ndarray
    jacobian: np.ndarray

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.jacobian.shape[1])
        return self.origin[None, :] + pts @ self.jacobian.T

    @property
    def source_dim(self) -> int:
        return self.jacobian.shape[1]

    @property
    def target_dim(self) -> int:
        return self.jacobian.shape[0]

    @property
    def metric(self) -> float:
        """Volume scaling sqrt(det(J^T J)); 1 for a point."""
        if self.source_dim == 0:
            return 1.0
        return float(np.sqrt(abs(np.linalg.det(self.jacobian.T @ self.jacobian))))

    def inverse(self) -> "AffineMap":
        if self.source_dim != self.target_dim:
            raise DomainError("only square affine maps can be inverted")
        jinv = np.linalg.inv(self.jacobian)
        return AffineMap(-jinv @ self.origin, jinv)

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """self o inner."""
        return AffineMap(self.origin + self.jacobian @ inner.origin, self.jacobian @ inner.jacobian)

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(np.zeros(dim), np.eye(dim))


@dataclass(frozen=True)
class ReferenceCell:
    """One of the reference cells, optionally placed at other vertex
    coordinates (an affine image used for alternative conventions)."""

    kind: str
    custom_vertices: tuple[tuple[float, ...], ...] | None = field(default=None)

    def __post_init__(self):
        if self.kind not in CELL_KINDS:
            raise CapabilityError(
                f"unknown cell kind {self.kind!r}; expected one of {', '.join(CELL_KINDS[1:])}"
            )
        if self.custom_vertices is not None:
            verts = tuple(tuple(float(c) for c in v) for v in self.custom_vertices)
            if len(verts) != len(_VERTICES[self.kind]) or any(
                len(v) != self.tdim for v in verts
            ):
                raise DomainError(
                    f"{self.kind} needs {len(_VERTICES[self.kind])} vertices of dimension {self.tdim}"
                )
            canonical = tuple(tuple(float(c) for c in v) for v in _VERTICES[self.kind])
            object.__setattr__(self, "custom_vertices", None if verts == canonical else verts)
            if self.custom_vertices is not None:
                self.reference_map  # raises if the placement is not affine

    @property
    def tdim(self) -> int:
        return len(_VERTICES[self.kind][0])

    @property
    def is_canonical(self) -> bool:
        return self.custom_vertices is None

    @property
    def is_simplex(self) -> bool:
        return self.kind in SIMPLICES

    @property
    def vertices(self) -> np.ndarray:
        if self.custom_vertices is not None:
            return np.array(self.custom_vertices, dtype=float).reshape(-1, self.tdim)
        return np.array(_VERTICES[self.kind], dtype=float).reshape(len(_VERTICES[self.kind]), self.tdim)

    @property
    def entities(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        return _canonical_topology(self.kind)

    @property
    def volume(self) -> float:
        return float(_MEASURE[self.kind]) * abs(np.linalg.det(self.reference_map.jacobian)) if self.tdim else 1.0

    def canonical(self) -> "ReferenceCell":
        return ReferenceCell(self.kind)

    def with_vertices(self, vertices) -> "ReferenceCell":
        return ReferenceCell(self.kind, tuple(tuple(v) for v in np.asarray(vertices, dtype=float).reshape(-1, self.tdim)))

    def num_entities(self, dim: int) -> int:
        return len(self.entities[dim])

    def entity_kind(self, e: EntityRef) -> str:
        return _sub_kind(e.dim, len(self.entities[e.dim][e.index]))

    def entity_reference(self, e: EntityRef) -> "ReferenceCell":
        return ReferenceCell(self.entity_kind(e))

    def all_entities(self) -> list[EntityRef]:
        return [EntityRef(d, i) for d in range(self.tdim + 1) for i in range(self.num_entities(d))]

    def check_entity(self, e) -> EntityRef:
        e = EntityRef(*e)
        if not (0 <= e.dim <= self.tdim and 0 <= e.index < self.num_entities(e.dim)):
            raise DomainError(f"{self.kind} has no entity {tuple(e)}")
        return e

    @cached_property
    def reference_map(self) -> AffineMap:
        """Affine map from the canonical cell of this kind onto this cell."""
        return _vertex_affine_map(
            np.array(_VERTICES[self.kind], dtype=float).reshape(len(_VERTICES[self.kind]), self.tdim), self.vertices
        )

    def to_reference(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.tdim)
        if self.is_canonical:
            return pts
        return self.reference_map.inverse()(pts)

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        """Whether each point lies in the closed cell."""
        p = self.to_reference(points)
        return _inside_canonical(self.kind, p, tol)

    def __str__(self) -> str:
        return self.kind if self.is_canonical else f"{self.kind}{list(map(list, self.custom_vertices))}"


def _inside_canonical(kind: str, p, tol):
    p = np.asarray(p)
    if kind == "point":
        return np.ones(len(p), dtype=bool)
    x = p[:, 0]
    ok = x >= -tol
    if kind in ("interval", "quadrilateral", "hexahedron"):
        ok &= (p <= 1 + tol).all(axis=1) & (p >= -tol).all(axis=1)
        return ok
    y = p[:, 1]
    ok &= y >= -tol
    if kind == "triangle":
        return ok & (x + y <= 1 + tol)
    z = p[:, 2]
    ok &= z >= -tol
    if kind == "tetrahedron":
        return ok & (x + y + z <= 1 + tol)
    if kind == "prism":
        return ok & (x + y <= 1 + tol) & (z <= 1 + tol)
    return ok & (z <= 1 + tol) & (x + z <= 1 + tol) & (y + z <= 1 + tol)


def _vertex_affine_map(ref_vertices: np.ndarray, vertices: np.ndarray) -> AffineMap:
    """The affine map sending ref_vertices[i] to vertices[i]; raises if none exists."""
    edim = ref_vertices.shape[1]
    if edim == 0:
        return AffineMap(vertices[0].copy(), np.zeros((vertices.shape[1], 0)))
    origin_idx = int(np.argmin(np.abs(ref_vertices).sum(axis=1)))
    cols = []
    for axis in range(edim):
        unit = np.zeros(edim)
        unit[axis] = 1.0
        idx = int(np.argmin(np.abs(ref_vertices - ref_vertices[origin_idx] - unit).sum(axis=1)))
        cols.append(vertices[idx] - vertices[origin_idx])
    jac = np.array(cols).T
    amap = AffineMap(vertices[origin_idx] - jac @ ref_vertices[origin_idx], jac)
    scale = max(1.0, float(np.abs(vertices).max()))
    if not np.allclose(amap(ref_vertices), vertices, rtol=0, atol=1e-12 * scale):
        raise CapabilityError("vertex correspondence is not affine")
    return amap


def topology(cell: ReferenceCell) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Per-dimension vertex-index tuples of all sub-entities."""
    return cell.entities


_DIM_NAMES = ("vertex", "edge", "face", "volume")
_CODIM_NAMES = ("the cell", "facet", "ridge", "peak")


def entity_name(tdim: int, codim: int) -> tuple[str, str]:
    """(codimension name, dimension name) for a sub-entity."""
    if not (0 <= codim <= tdim <= 3):
        raise DomainError(f"no entity of codimension {codim} in a {tdim}-dimensional cell")
    return _CODIM_NAMES[codim], _DIM_NAMES[tdim - codim]


def entity_closure(cell: ReferenceCell, e) -> frozenset[EntityRef]:
    e = cell.check_entity(e)
    verts = set(cell.entities[e.dim][e.index])
    return frozenset(
        EntityRef(d, i)
        for d in range(e.dim + 1)
        for i, ent in enumerate(cell.entities[d])
        if set(ent) <= verts
    )


def entity_map(cell: ReferenceCell, e) -> AffineMap:
    """Affine map from the reference cell of e's kind onto e."""
    e = cell.check_entity(e)
    if e.dim == 0:
        raise DomainError("vertices have no reference map; use the vertex coordinates directly")
    return _entity_affine_map(cell, e)


def _entity_affine_map(cell: ReferenceCell, e: EntityRef) -> AffineMap:
    verts = cell.vertices[list(cell.entities[e.dim][e.index])]
    ref = cell.entity_reference(e).vertices
    return _vertex_affine_map(ref, verts)


def facet_normal(cell: ReferenceCell, facet: int) -> np.ndarray:
    """Unit normal of a facet, pointing out of the cell."""
    e = EntityRef(cell.tdim - 1, facet)
    amap = _entity_affine_map(cell, e)
    jac = amap.jacobian
    if cell.tdim == 1:
        n = np.array([1.0])
    elif cell.tdim == 2:
        t = jac[:, 0]
        n = np.array([-t[1], t[0]])
    else:
        n = np.cross(jac[:, 0], jac[:, 1])
    n = n / np.linalg.norm(n)
    centroid = cell.vertices.mean(axis=0)
    if np.dot(n, amap.origin - centroid) < 0:
        n = -n
    return n


def edge_tangent(cell: ReferenceCell, edge: int) -> np.ndarray:
    """Unit tangent from the lower- to the higher-numbered vertex."""
    a, b = cell.entities[1][edge]
    t = cell.vertices[b] - cell.vertices[a]
    return t / np.linalg.norm(t)


def _rational_grid(n: int, tdim: int):
    steps = [Fraction(i, n - 1) for i in range(n)]
    if tdim == 1:
        return [(x,) for x in steps]
    if tdim == 2:
        return [(x, y) for y in steps for x in steps]
    return [(x, y, z) for z in steps for y in steps for x in steps]


def _inside_exact(kind: str, p, strict: bool) -> bool:
    def le(a, b):
        return a < b if strict else a <= b

    if kind in ("interval", "quadrilateral", "hexahedron"):
        return all(le(0, c) and le(c, 1) for c in p)
    x, y = p[0], p[1]
    if kind == "triangle":
        return le(0, x) and le(0, y) and le(x + y, 1)
    z = p[2]
    if kind == "tetrahedron":
        return le(0, x) and le(0, y) and le(0, z) and le(x + y + z, 1)
    if kind == "prism":
        return le(0, x) and le(0, y) and le(x + y, 1) and le(0, z) and le(z, 1)
    return le(0, x) and le(0, y) and le(0, z) and le(x + z, 1) and le(y + z, 1)


def lattice_points(cell: ReferenceCell, n_per_dir: int, include_boundary: bool = True) -> np.ndarray:
    """Regular grid over the bounding box, filtered to the cell.

    Pyramid points within half a grid step of the apex plane z = 1 are dropped
    so that rationomial denominators stay bounded."""
    if n_per_dir < 2:
        raise DomainError("n_per_dir must be at least 2")
    if cell.tdim == 0:
        return cell.vertices.copy()
    pts = [
        p for p in _rational_grid(n_per_dir, cell.tdim)
        if _inside_exact(cell.kind, p, strict=not include_boundary)
    ]
    if cell.kind == "pyramid":
        guard = Fraction(1, n_per_dir - 1) / 2
        pts = [p for p in pts if 1 - p[2] >= guard]
    out = np.array([[float(c) for c in p] for p in pts], dtype=float).reshape(-1, cell.tdim)
    if not cell.is_canonical:
        out = cell.reference_map(out)
    return out
