"""Functionals, dual matrices, element assembly, tabulation and the built-in
element families."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .cells import (
    EntityRef,
    ReferenceCell,
    edge_tangent,
    entity_map,
    facet_normal,
    lattice_points,
)
from .errors import CapabilityError, DegenerateElementError, DomainError
from .polyset import (
    PolyFunction,
    PolySet,
    natural_space,
    orthonormal_basis,
    orthonormal_set,
    restrict_set,
)
from .quadrature import cell_rule, entity_rule

MAP_KINDS = (
    "identity",
    "l2_piola",
    "covariant",
    "contravariant",
    "double_covariant",
    "double_contravariant",
    "covariant_contravariant",
)


# ---------------------------------------------------------------------------
# Functionals


@dataclass(frozen=True, eq=False)
class Functional:
    """A degree of freedom stored as a discrete rule: l(f) = sum(weights * f(points)).

    The remaining fields describe the functional for reports."""

    kind: str
    entity: EntityRef
    points: np.ndarray
    weights: np.ndarray
    point: tuple | None = None
    direction: tuple | None = None
    weight: PolyFunction | None = None
    selector: str | None = None

    def __call__(self, f) -> np.ndarray:
        """Action on every function of an evaluable set (or one PolyFunction)."""
        if isinstance(f, PolyFunction):
            vals = f.evaluate(self.points)
            if vals.shape[1] != self.weights.shape[1]:
                raise DomainError("functional and function have different value sizes")
            return np.array(float(np.sum(vals * self.weights)))
        vals = f.evaluate(self.points)
        if vals.shape[2] != self.weights.shape[1]:
            raise DomainError("functional and function have different value sizes")
        return np.einsum("npc,pc->n", vals, self.weights)

    def describe(self) -> dict:
        out = {"kind": self.kind, "entity": [self.entity.dim, self.entity.index]}
        if self.point is not None:
            out["point"] = list(self.point)
        if self.direction is not None:
            out["direction"] = list(self.direction)
        if self.selector is not None:
            out["selector"] = self.selector
        if self.weight is not None:
            out["weight"] = self.weight.to_text()
        return out


def point_eval(cell: ReferenceCell, entity, point, value_size: int = 1) -> Functional:
    """Evaluation of a scalar function at a point (all components summed for
    value_size > 1 is never wanted, so value_size must be 1)."""
    point = np.asarray(point, dtype=float).reshape(1, cell.tdim)
    if not cell.contains(point, tol=1e-12).all():
        raise DomainError(f"point {point[0].tolist()} is outside the {cell.kind}")
    if value_size != 1:
        raise DomainError("point_eval needs a scalar element; use dot_point_eval")
    return Functional("point_eval", cell.check_entity(entity), point, np.ones((1, 1)), point=tuple(point[0]))


def dot_point_eval(cell: ReferenceCell, entity, point, direction) -> Functional:
    point = np.asarray(point, dtype=float).reshape(1, cell.tdim)
    if not cell.contains(point, tol=1e-12).all():
        raise DomainError(f"point {point[0].tolist()} is outside the {cell.kind}")
    direction = np.asarray(direction, dtype=float).ravel()
    return Functional(
        "dot_point_eval", cell.check_entity(entity), point, direction[None, :].copy(),
        point=tuple(point[0]), direction=tuple(direction),
    )


def integral_moment(
    cell: ReferenceCell,
    entity,
    weight: PolyFunction,
    selector: str = "full",
    value_size: int = 1,
    direction=None,
    degree: int = 0,
) -> Functional:
    """Integral over an entity of (selected component of f) * weight.

    selector is "full" (weight has the element's value size), "normal"
    (weight scalar, against f . n with n the outward unit facet normal) or
    "tangent" (weight scalar, against f . t for a given unit tangent t; edges
    default to their own tangent). degree is the element degree, used to
    pick the quadrature."""
    entity = cell.check_entity(entity)
    qdeg = degree + max([t.degree for t in weight.terms], default=0) + 2
    ref_pts, pts, w = entity_rule(cell, entity, qdeg)
    wv = weight.evaluate(ref_pts)
    if selector == "full":
        if wv.shape[1] != value_size:
            raise DomainError("weight value size differs from the element's")
        weights = wv * w[:, None]
    elif selector in ("normal", "tangent"):
        if wv.shape[1] != 1:
            raise DomainError(f"{selector} moments need a scalar weight")
        if selector == "normal":
            if entity.dim != cell.tdim - 1:
                raise DomainError("normal moments live on facets")
            direction = facet_normal(cell, entity.index)
        elif direction is None:
            if entity.dim != 1:
                raise DomainError("tangent moments away from edges need an explicit direction")
            direction = edge_tangent(cell, entity.index)
        direction = np.asarray(direction, dtype=float)
        if direction.size != value_size:
            raise DomainError("direction length differs from the element's value size")
        weights = (wv[:, 0] * w)[:, None] * direction[None, :]
    else:
        raise DomainError(f"unknown selector {selector!r}")
    return Functional(
        "integral_moment", entity, pts, weights,
        direction=None if direction is None else tuple(np.asarray(direction, dtype=float)),
        weight=weight, selector=selector,
    )


def apply_functional(l: Functional, f, cell: ReferenceCell | None = None) -> float:
    return float(l(f))


# ---------------------------------------------------------------------------
# Dual matrix and assembly


@dataclass(frozen=True, eq=False)
class DualMatrix:
    entries: np.ndarray
    condition_estimate: float


def _check_dual(d: np.ndarray) -> float:
    if d.shape[0] != d.shape[1]:
        raise DomainError(f"need as many functionals as space functions, got {d.shape[1]} and {d.shape[0]}")
    u, s, vt = np.linalg.svd(d)
    if s.size == 0:
        return 1.0
    if s[-1] <= 1e-10 * s[0]:
        raise DegenerateElementError(
            f"functionals are not unisolvent (smallest singular value {s[-1]:.3g}, largest {s[0]:.3g})",
            null_combination=vt[-1].copy(),
        )
    return float(s[0] / s[-1])


def dual_matrix(space, ls: Sequence[Functional]) -> DualMatrix:
    """D[i, j] = l_j(p_i)."""
    if len(ls) != len(space):
        raise DomainError(f"need as many functionals as space functions, got {len(ls)} and {len(space)}")
    d = np.column_stack([l(space) for l in ls]) if ls else np.zeros((0, 0))
    return DualMatrix(d, _check_dual(d))


class _VectorBasis:
    """The scalar orthonormal basis q_j repeated per component: function
    index c * m + j is q_j in component c."""

    def __init__(self, scalar, value_size: int):
        self.scalar = scalar
        self.value_size = value_size
        self.value_shape = () if value_size == 1 else (value_size,)

    def __len__(self):
        return len(self.scalar) * self.value_size

    def evaluate(self, points) -> np.ndarray:
        q = self.scalar.evaluate(points)[:, :, 0]
        m, npts = q.shape
        s = self.value_size
        out = np.zeros((s, m, npts, s))
        for c in range(s):
            out[c, :, :, c] = q
        return out.reshape(s * m, npts, s)


@dataclass(frozen=True, eq=False)
class CiarletElement:
    """A Ciarlet element; basis functions are coeffs @ (generating basis)."""

    cell: ReferenceCell
    space: PolySet
    functionals: tuple[Functional, ...]
    coeffs: np.ndarray
    value_shape: tuple[int, ...]
    degree_hint: int
    map_kind: str
    superdegree: int
    dual: DualMatrix
    family: str = "custom"
    variant: str | None = None
    generating: object = field(default=None, repr=False)

    @property
    def value_size(self) -> int:
        return int(np.prod(self.value_shape, dtype=int))

    @property
    def dim(self) -> int:
        return len(self.functionals)

    def __len__(self) -> int:
        return self.dim

    @property
    def name(self) -> str:
        s = f"{self.family}:{self.cell.kind}:{self.degree_hint}"
        return s + (f":{self.variant}" if self.variant else "")

    @cached_property
    def entity_dofs(self) -> dict[EntityRef, list[int]]:
        out = {e: [] for e in self.cell.all_entities()}
        for i, l in enumerate(self.functionals):
            out[l.entity].append(i)
        return out

    def entity_dof_counts(self) -> dict[EntityRef, int]:
        return {e: len(v) for e, v in self.entity_dofs.items()}

    def evaluate(self, points) -> np.ndarray:
        """Basis values with shape (function, point, component)."""
        q = self.generating.scalar.evaluate(points)[:, :, 0]
        s = self.value_size
        c = self.coeffs.reshape(self.dim, s, q.shape[0])
        return np.einsum("nsm,mp->nps", c, q)

    @cached_property
    def basis(self) -> PolySet:
        """Basis functions in term form."""
        return self.space.combine(np.linalg.inv(self.dual.entries))

    def kronecker_error(self) -> float:
        k = np.column_stack([l(self) for l in self.functionals])
        return float(np.abs(k.T - np.eye(self.dim)).max()) if self.dim else 0.0


def build_element(
    cell: ReferenceCell,
    space: PolySet,
    ls: Sequence[Functional],
    map_kind: str,
    *,
    superdegree: int | None = None,
    degree_hint: int | None = None,
    family: str = "custom",
    variant: str | None = None,
) -> CiarletElement:
    """Assemble basis coefficients D^{-1} C over an orthonormal generating
    basis of the natural space of degree superdegree."""
    if map_kind not in MAP_KINDS:
        raise DomainError(f"unknown map kind {map_kind!r}")
    if cell.kind == "pyramid":
        raise CapabilityError("elements on the pyramid are not supported")
    ls = tuple(ls)
    if superdegree is None:
        superdegree = space.degree
    s = space.value_size
    gen = _VectorBasis(orthonormal_set(cell, superdegree), s)
    m = len(gen.scalar)
    rule = cell_rule(cell, 2 * superdegree)
    pv = space.evaluate(rule.points)  # (n, p, s)
    qv = gen.scalar.evaluate(rule.points)[:, :, 0]  # (m, p)
    c = np.einsum("npc,mp,p->ncm", pv, qv, rule.weights).reshape(len(space), s * m)
    norms = np.einsum("npc,npc,p->n", pv, pv, rule.weights)
    if np.any(np.abs(norms - (c * c).sum(axis=1)) > 1e-8 * np.maximum(norms, 1.0)):
        raise DomainError(f"space is not contained in the degree-{superdegree} generating space")
    if len(ls) != len(space):
        raise DomainError(f"need as many functionals as space functions, got {len(ls)} and {len(space)}")
    a = np.stack([l(gen) for l in ls]) if ls else np.zeros((0, s * m))
    d = c @ a.T
    # The basis D^{-1} C does not depend on the basis of the space, so solve
    # with an orthonormal one: a monomial space basis would spoil the
    # conditioning at high degree.
    _, sv, c_orth = np.linalg.svd(c, full_matrices=False)
    if sv.size and sv[-1] <= 1e-12 * sv[0]:
        raise DomainError("the space functions are linearly dependent")
    d_orth = c_orth @ a.T
    cond = _check_dual(d_orth)
    coeffs = np.linalg.solve(d_orth, c_orth)
    return CiarletElement(
        cell=cell,
        space=space,
        functionals=ls,
        coeffs=coeffs,
        value_shape=space.value_shape,
        degree_hint=superdegree if degree_hint is None else degree_hint,
        map_kind=map_kind,
        superdegree=superdegree,
        dual=DualMatrix(d, cond),
        family=family,
        variant=variant,
        generating=gen,
    )


def tabulate(el: CiarletElement, points) -> np.ndarray:
    """Basis values with shape (point, dof, component)."""
    pts = np.asarray(points, dtype=float).reshape(-1, el.cell.tdim)
    return np.transpose(el.evaluate(pts), (1, 0, 2))


# ---------------------------------------------------------------------------
# Point sets


@lru_cache(maxsize=None)
def _gll_cached(n: int) -> tuple:
    if n == 2:
        return (0.0, 1.0)
    big = n - 1
    # Newton on (1 - x^2) P'_N via the Legendre recurrence, Chebyshev-Lobatto start
    x = np.cos(np.pi * np.arange(n) / big)
    for _ in range(100):
        p = np.zeros((n, n))
        p[:, 0] = 1.0
        p[:, 1] = x
        for k in range(1, big):
            p[:, k + 1] = ((2 * k + 1) * x * p[:, k] - k * p[:, k - 1]) / (k + 1)
        dx = (x * p[:, big] - p[:, big - 1]) / (n * p[:, big])
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -1.0, 1.0
    return tuple((x + 1.0) / 2.0)


def gll_points(n: int) -> np.ndarray:
    """Gauss-Lobatto-Legendre points on [0, 1], endpoints included."""
    if n < 2:
        raise DomainError("need at least two GLL points")
    return np.array(_gll_cached(n))


@lru_cache(maxsize=None)
def _warp_coefficients(k: int) -> np.ndarray:
    eq = np.linspace(0.0, 1.0, k + 1)
    return np.linalg.solve(np.vander(eq, increasing=True), gll_points(k + 1) - eq)


def _wbar(k: int, t):
    t = np.asarray(t, dtype=float)
    warp = np.polynomial.polynomial.polyval(t, _warp_coefficients(k))
    denom = t * (1.0 - t)
    return np.where(np.abs(denom) > 1e-14, warp / np.where(denom == 0, 1.0, denom), 0.0)


def _warp_simplex(bary: np.ndarray, k: int) -> np.ndarray:
    """Pairwise warp of barycentric coordinates so that every sub-simplex
    carries GLL-spaced points."""
    out = bary.copy()
    nb = bary.shape[1]
    for a in range(nb):
        for b in range(nb):
            if a != b:
                la, lb = bary[:, a], bary[:, b]
                out[:, a] += la * lb * _wbar(k, 0.5 + (la - lb) / 2.0)
    return out


def _interior_points(kind: str, k: int, variant: str) -> np.ndarray:
    """Interior points of the degree-k point set on a canonical entity."""
    if kind == "point":
        return np.zeros((1, 0))
    if k < 1:
        return np.zeros((0, ReferenceCell(kind).tdim))
    eq = lattice_points(ReferenceCell(kind), k + 1, include_boundary=False)
    if variant == "equispaced" or len(eq) == 0:
        return eq
    g = gll_points(k + 1)
    idx = np.rint(eq * k).astype(int)
    if kind in ("interval", "quadrilateral", "hexahedron"):
        return g[idx]
    if kind in ("triangle", "tetrahedron"):
        bary = np.column_stack([1.0 - eq.sum(axis=1), eq])
        return _warp_simplex(bary, k)[:, 1:]
    if kind == "prism":
        bary = np.column_stack([1.0 - eq[:, :2].sum(axis=1), eq[:, :2]])
        tri = _warp_simplex(bary, k)[:, 1:]
        return np.column_stack([tri, g[idx[:, 2]]])
    raise CapabilityError(f"no GLL points on {kind}")


def lagrange_points(cell: ReferenceCell, k: int, variant: str = "equispaced"):
    """[(entity, points on that entity's interior)] in DOF order."""
    out = []
    for e in cell.all_entities():
        if e.dim == 0:
            out.append((e, cell.vertices[[e.index]]))
            continue
        local = _interior_points(cell.entity_kind(e), k, variant)
        out.append((e, entity_map(cell, e)(local) if len(local) else np.zeros((0, cell.tdim))))
    return out


# ---------------------------------------------------------------------------
# Spaces for vector families


def _vector_functions(terms_coeffs: list[list[dict]], d: int, cell) -> PolySet:
    from .polyset import polyfunction

    return PolySet.from_functions([polyfunction((d,), comps) for comps in terms_coeffs], cell=cell)


def _homogeneous(d: int, k: int):
    return [e for e in itertools.product(range(k + 1), repeat=d) if sum(e) == k]


def _independent_subset(ps: PolySet, tol: float = 1e-10) -> PolySet:
    """Greedy maximal linearly independent subset of a set, in order."""
    flat = ps.coeffs.reshape(len(ps), -1)
    keep: list[int] = []
    for i in range(len(ps)):
        trial = flat[keep + [i]]
        if np.linalg.matrix_rank(trial, tol=tol * max(1.0, np.abs(flat).max())) == len(keep) + 1:
            keep.append(i)
    return PolySet(ps.terms, ps.coeffs[keep], ps.value_shape, ps.cell)


def _full_vector_space(d: int, k: int) -> list[list[dict]]:
    scal = [e for e in itertools.product(range(k + 1), repeat=d) if sum(e) <= k]
    scal.sort(key=lambda e: (sum(e),) + tuple(e))
    out = []
    for c in range(d):
        for e in scal:
            comps = [{} for _ in range(d)]
            comps[c][e] = 1.0
            out.append(comps)
    return out


def rt_space(cell: ReferenceCell, k: int) -> PolySet:
    """(P_k)^d + x P~_k on the canonical simplex."""
    d = cell.tdim
    fns = _full_vector_space(d, k)
    for e in sorted(_homogeneous(d, k), key=lambda e: tuple(-v for v in e)):
        comps = []
        for c in range(d):
            ex = list(e)
            ex[c] += 1
            comps.append({tuple(ex): 1.0})
        fns.append(comps)
    return _vector_functions(fns, d, cell.canonical())


def n1_space(cell: ReferenceCell, k: int) -> PolySet:
    """(P_k)^2 + (-y, x) P~_k on triangles; (P_k)^3 + x cross (P~_k)^3 on tetrahedra."""
    d = cell.tdim
    fns = _full_vector_space(d, k)
    homog = sorted(_homogeneous(d, k), key=lambda e: tuple(-v for v in e))
    if d == 2:
        for e in homog:
            fns.append([{(e[0], e[1] + 1): -1.0}, {(e[0] + 1, e[1]): 1.0}])
    else:
        for c in range(3):
            for e in homog:
                # x cross (m e_c)
                comps = [{}, {}, {}]
                for i in range(3):
                    for j in range(3):
                        if j != c:
                            continue
                        for out_c in range(3):
                            sign = _levi(out_c, i, j)
                            if sign:
                                ex = list(e)
                                ex[i] += 1
                                comps[out_c][tuple(ex)] = comps[out_c].get(tuple(ex), 0.0) + sign
                fns.append(comps)
    return _independent_subset(_vector_functions(fns, d, cell.canonical()))


def _levi(a, b, c) -> int:
    return int(np.sign((b - a) * (c - a) * (c - b)))


# ---------------------------------------------------------------------------
# Placement on non-canonical cells


def _component_matrix(map_kind: str, jac: np.ndarray) -> np.ndarray:
    """Matrix M with (push-forward of v)(g(x)) = M v(x) for affine g, acting on
    flattened values."""
    det = np.linalg.det(jac)
    jinv_t = np.linalg.inv(jac).T
    if map_kind == "identity":
        return np.eye(1)
    if map_kind == "l2_piola":
        return np.eye(1) / det
    if map_kind == "contravariant":
        return jac / det
    if map_kind == "covariant":
        return jinv_t
    if map_kind == "double_contravariant":
        return np.kron(jac, jac) / det**2
    if map_kind == "double_covariant":
        return np.kron(jinv_t, jinv_t)
    if map_kind == "covariant_contravariant":
        return np.kron(jinv_t, jac) / det
    raise DomainError(f"unknown map kind {map_kind!r}")


def push_space(space: PolySet, g, map_kind: str, target_cell: ReferenceCell) -> PolySet:
    """Push a set forward through an affine map g in term form: compose with
    g^{-1}, then mix value components."""
    composed = restrict_set(space, g.inverse(), target_cell)
    mat = _component_matrix(map_kind, g.jacobian)
    if mat.shape[0] != space.value_size:
        raise DomainError(f"map {map_kind} does not fit value shape {space.value_shape}")
    coeffs = np.einsum("ij,njt->nit", mat, composed.coeffs)
    return PolySet(composed.terms, coeffs, space.value_shape, target_cell)


def _place(space: PolySet, cell: ReferenceCell, map_kind: str) -> PolySet:
    if cell.is_canonical:
        return PolySet(space.terms, space.coeffs, space.value_shape, cell)
    return push_space(space, cell.reference_map, map_kind, cell)


# ---------------------------------------------------------------------------
# Families

FAMILIES = (
    "lagrange",
    "discontinuous_lagrange",
    "crouzeix_raviart",
    "raviart_thomas",
    "nedelec_first_kind",
)
_ALIASES = {
    "p": "lagrange",
    "cg": "lagrange",
    "dg": "discontinuous_lagrange",
    "dp": "discontinuous_lagrange",
    "cr": "crouzeix_raviart",
    "rt": "raviart_thomas",
    "n1curl": "nedelec_first_kind",
    "n1": "nedelec_first_kind",
    "nedelec": "nedelec_first_kind",
}
VARIANTS = {
    "lagrange": ("equispaced", "gll"),
    "discontinuous_lagrange": ("equispaced", "gll"),
    "crouzeix_raviart": ("default",),
    "raviart_thomas": ("default",),
    "nedelec_first_kind": ("default",),
}
_CELLS = {
    "lagrange": ("interval", "triangle", "quadrilateral", "tetrahedron", "hexahedron", "prism"),
    "discontinuous_lagrange": ("interval", "triangle", "quadrilateral", "tetrahedron", "hexahedron", "prism"),
    "crouzeix_raviart": ("triangle", "tetrahedron"),
    "raviart_thomas": ("triangle", "tetrahedron"),
    "nedelec_first_kind": ("triangle", "tetrahedron"),
}
_MIN_DEGREE = {
    "lagrange": 1,
    "discontinuous_lagrange": 0,
    "crouzeix_raviart": 1,
    "raviart_thomas": 0,
    "nedelec_first_kind": 0,
}


def normalize_family(name: str) -> str:
    key = name.strip().lower().replace(" ", "_").replace("-", "_").replace("é", "e")
    return _ALIASES.get(key, key)


def supported() -> list[str]:
    rows = []
    for fam in FAMILIES:
        deg = "1" if fam == "crouzeix_raviart" else f">={_MIN_DEGREE[fam]}"
        rows.append(f"{fam} on {', '.join(_CELLS[fam])}, degree {deg}, variants {', '.join(VARIANTS[fam])}")
    return rows


def _unsupported(msg: str):
    return CapabilityError(msg + "; supported: " + "; ".join(supported()))


def _moment_weights(kind: str, k: int, basis: str) -> list[PolyFunction]:
    """Scalar weight functions spanning P_k on a canonical cell."""
    if k < 0:
        return []
    cell = ReferenceCell(kind)
    if basis == "orthonormal":
        ps = orthonormal_basis(cell, k)
    elif basis == "monomial":
        ps = natural_space(ReferenceCell(_SIMPLEX[cell.tdim]), k) if cell.is_simplex else natural_space(cell, k)
    else:
        raise DomainError(f"unknown moment basis {basis!r}")
    return list(ps)


_SIMPLEX = {0: "point", 1: "interval", 2: "triangle", 3: "tetrahedron"}


def _vectorize(w: PolyFunction, c: int, d: int) -> PolyFunction:
    coeffs = np.zeros((d, len(w.terms)))
    coeffs[c] = w.coeffs[0]
    return PolyFunction(w.terms, coeffs, (d,), w.cell)


def _interior_vector_moments(cell, k, basis, degree) -> list[Functional]:
    d = cell.tdim
    out = []
    interior = EntityRef(d, 0)
    weights = _moment_weights(cell.kind, k, basis)
    for c in range(d):
        for w in weights:
            out.append(integral_moment(cell, interior, _vectorize(w, c, d), "full", d, degree=degree))
    return out


def _make_lagrange(cell, k, variant, discontinuous):
    if k == 0:
        if not discontinuous:
            raise _unsupported("lagrange needs degree >= 1 (use discontinuous_lagrange for degree 0)")
        centroid = cell.vertices.mean(axis=0)
        ls = [point_eval(cell, (cell.tdim, 0), centroid)]
    else:
        ls = []
        for e, pts in lagrange_points(cell, k, variant):
            owner = (cell.tdim, 0) if discontinuous else e
            ls.extend(point_eval(cell, owner, p) for p in pts)
    space = _place(natural_space(cell.canonical(), k), cell, "identity")
    return space, ls, "identity", k


def _make_cr(cell, k):
    if k != 1:
        raise _unsupported("crouzeix_raviart is only defined for degree 1")
    f = cell.tdim - 1
    ls = [
        point_eval(cell, (f, i), cell.vertices[list(verts)].mean(axis=0))
        for i, verts in enumerate(cell.entities[f])
    ]
    space = _place(natural_space(cell.canonical(), 1), cell, "identity")
    return space, ls, "identity", 1


def _make_rt(cell, k, basis):
    d = cell.tdim
    K = k + 1
    ls = []
    facet_kind = _SIMPLEX[d - 1]
    for i in range(cell.num_entities(d - 1)):
        for w in _moment_weights(facet_kind, k, basis):
            ls.append(integral_moment(cell, (d - 1, i), w, "normal", d, degree=K))
    ls.extend(_interior_vector_moments(cell, k - 1, basis, K))
    space = _place(rt_space(cell, k), cell, "contravariant")
    return space, ls, "contravariant", K


def _face_tangents(cell, face: int) -> list[np.ndarray]:
    jac = entity_map(cell, (2, face)).jacobian
    return [jac[:, a] / np.linalg.norm(jac[:, a]) for a in range(2)]


def _make_n1(cell, k, basis):
    d = cell.tdim
    K = k + 1
    ls = []
    for i in range(cell.num_entities(1)):
        for w in _moment_weights("interval", k, basis):
            ls.append(integral_moment(cell, (1, i), w, "tangent", d, degree=K))
    if d == 3:
        for i in range(cell.num_entities(2)):
            tangents = _face_tangents(cell, i)
            for w in _moment_weights("triangle", k - 1, basis):
                for t in tangents:
                    ls.append(integral_moment(cell, (2, i), w, "tangent", d, direction=t, degree=K))
        ls.extend(_interior_vector_moments(cell, k - 2, basis, K))
    else:
        ls.extend(_interior_vector_moments(cell, k - 1, basis, K))
    space = _place(n1_space(cell, k), cell, "covariant")
    return space, ls, "covariant", K


def make_family(
    family: str,
    cell,
    k: int,
    variant: str | None = None,
    *,
    moment_basis: str = "orthonormal",
) -> CiarletElement:
    """Build a built-in element. k is the family's usual (subdegree) index."""
    fam = normalize_family(family)
    if isinstance(cell, str):
        cell = ReferenceCell(cell)
    if fam not in FAMILIES:
        raise _unsupported(f"unknown family {family!r}")
    if cell.kind not in _CELLS[fam]:
        raise _unsupported(f"{fam} is not available on {cell.kind}")
    k = int(k)
    if k < _MIN_DEGREE[fam]:
        raise _unsupported(f"{fam} needs degree >= {_MIN_DEGREE[fam]}")
    variants = VARIANTS[fam]
    variant = variants[0] if variant in (None, "", "default") else variant.lower()
    if variant not in variants:
        raise _unsupported(f"{fam} has no variant {variant!r}")
    if fam in ("lagrange", "discontinuous_lagrange"):
        space, ls, mk, K = _make_lagrange(cell, k, variant, fam == "discontinuous_lagrange")
    elif fam == "crouzeix_raviart":
        space, ls, mk, K = _make_cr(cell, k)
    elif fam == "raviart_thomas":
        space, ls, mk, K = _make_rt(cell, k, moment_basis)
    else:
        space, ls, mk, K = _make_n1(cell, k, moment_basis)
    shown_variant = variant if fam in ("lagrange", "discontinuous_lagrange") else None
    return build_element(
        cell, space, ls, mk, superdegree=K, degree_hint=k, family=fam, variant=shown_variant
    )


_CELL_ALIASES = {"quad": "quadrilateral", "tet": "tetrahedron", "hex": "hexahedron"}


@dataclass(frozen=True)
class ElementSpec:
    family: str
    cell: str
    degree: int
    variant: str | None = None

    @classmethod
    def parse(cls, text: str) -> "ElementSpec":
        parts = [p.strip() for p in text.split(":")]
        if len(parts) not in (3, 4) or not all(parts):
            raise DomainError(f"element spec {text!r} is not 'family:cell:degree[:variant]'")
        try:
            degree = int(parts[2])
        except ValueError:
            raise DomainError(f"degree {parts[2]!r} is not an integer") from None
        cell = _CELL_ALIASES.get(parts[1].lower(), parts[1].lower())
        return cls(normalize_family(parts[0]), cell, degree, parts[3] if len(parts) == 4 else None)

    def build(self, cell_vertices=None) -> CiarletElement:
        cell = ReferenceCell(self.cell)
        if cell_vertices is not None:
            cell = cell.with_vertices(cell_vertices)
        return make_family(self.family, cell, self.degree, self.variant)

    def __str__(self) -> str:
        s = f"{self.family}:{self.cell}:{self.degree}"
        return s + (f":{self.variant}" if self.variant else "")


def parse_element(text: str, cell_vertices=None) -> CiarletElement:
    return ElementSpec.parse(text).build(cell_vertices)
