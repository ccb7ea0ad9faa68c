"""Degree classification, controlled and uncontrolled trace spaces,
equivalence of functional sets and de Rham containment checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cells import EntityRef, ReferenceCell, entity_closure, entity_map
from .elements import CiarletElement, _VectorBasis, make_family
from .errors import CapabilityError, DomainError
from .polyset import (
    PolySet,
    Term,
    complete_space,
    curl2d,
    grad,
    legendre_products,
    natural_exponents,
    restrict_set,
)
from .quadrature import cell_rule
from .span import (
    DEFAULT,
    SpanTestConfig,
    contained_in,
    domain_lattice,
    matrix_rank,
    singular_values,
    spans_same_space,
)

UNDEFINED = "undefined"


# ---------------------------------------------------------------------------
# Degrees


class _LegendreSpan:
    """Products of shifted Legendre polynomials over a downward-closed
    exponent set: a well-conditioned basis of the matching monomial space."""

    value_size = 1
    value_shape = ()

    def __init__(self, cell: ReferenceCell, terms: list[Term], degree: int):
        self.cell = cell
        self.exponents = np.array([t.exponents for t in terms], dtype=int).reshape(-1, 3)[:, : cell.tdim]
        self.degree = degree

    def __len__(self):
        return len(self.exponents)

    def evaluate(self, points) -> np.ndarray:
        ref = self.cell.to_reference(points)
        return legendre_products(self.exponents, ref)[:, :, None]


def polynomial_span(cell: ReferenceCell, k: int, value_size: int = 1, natural: bool = False):
    """(P_k)^s (or the natural space to the power s) as an evaluable set."""
    kind = cell.kind if natural else {1: "interval", 2: "triangle", 3: "tetrahedron"}[cell.tdim]
    if kind == "pyramid":
        raise CapabilityError("degrees are not classified on the pyramid")
    scalar = _LegendreSpan(cell, natural_exponents(kind, k), k)
    if value_size == 1:
        return scalar
    vec = _VectorBasis(scalar, value_size)
    vec.degree = k
    return vec


@dataclass(frozen=True)
class DegreeReport:
    polynomial_subdegree: int | str
    polynomial_superdegree: int | str
    lagrange_subdegree: int | str
    lagrange_superdegree: int | str

    def to_json(self) -> dict:
        return {
            "poly_sub": self.polynomial_subdegree,
            "poly_super": self.polynomial_superdegree,
            "lagrange_sub": self.lagrange_subdegree,
            "lagrange_super": self.lagrange_superdegree,
        }


def _contains(big, small, cell, degree, cfg) -> bool:
    pts = domain_lattice(cell, degree, _loose(cfg))
    return contained_in(small, big, cell, cfg, points=pts)


def _loose(cfg: SpanTestConfig) -> SpanTestConfig:
    # the lattice grows with the degree searched, so a fixed size is only a floor
    return SpanTestConfig(None, cfg.rank_rel_tolerance)


def degrees(el: CiarletElement, k_cap: int | None = None, cfg: SpanTestConfig = DEFAULT) -> DegreeReport:
    """The polynomial and Lagrange sub- and superdegrees, found by rank-based
    containment searches; "undefined" when no k (up to k_cap) qualifies."""
    cell = el.cell
    s = el.value_size
    n = el.dim
    if k_cap is None:
        k_cap = 2 * el.superdegree + 2

    def sub(natural: bool):
        best = UNDEFINED
        k = 0
        while True:
            ps = polynomial_span(cell, k, s, natural)
            if len(ps) > n:
                break
            if not _contains(el, ps, cell, max(k, el.superdegree), cfg):
                break
            best = k
            k += 1
        return best

    def sup(natural: bool):
        for k in range(0, k_cap + 1):
            if len(polynomial_span(cell, k, s, natural)) < n:
                continue
            if _contains(polynomial_span(cell, k, s, natural), el, cell, max(k, el.superdegree), cfg):
                return k
        return UNDEFINED

    return DegreeReport(sub(False), sup(False), sub(True), sup(True))


# ---------------------------------------------------------------------------
# Traces


@dataclass(frozen=True, eq=False)
class TraceSpaces:
    entity: EntityRef
    uncontrolled: PolySet
    controlled: PolySet
    restricted_dim: int

    def to_json(self) -> dict:
        return {
            "entity": [self.entity.dim, self.entity.index],
            "restricted_dim": self.restricted_dim,
            "uncontrolled": {"dim": len(self.uncontrolled), "basis": self.uncontrolled.to_text()},
            "controlled": {"dim": len(self.controlled), "basis": self.controlled.to_text()},
        }


def _term_basis(el: CiarletElement) -> PolySet:
    """Basis functions in term form, via the orthonormal generating basis."""
    q = el.generating.scalar.to_polyset()
    s = el.value_size
    c = el.coeffs.reshape(el.dim, s, len(q))
    coeffs = np.einsum("nsm,mt->nst", c, q.coeffs[:, 0, :])
    return PolySet(q.terms, coeffs, el.value_shape, el.cell)


class _Restricted:
    """Restrictions of basis functions to an entity with a sampling rule
    whose Euclidean products are the entity's L2 inner products."""

    def __init__(self, el: CiarletElement, e: EntityRef):
        cell = el.cell
        self.entity = e
        self.domain = cell.entity_reference(e)
        basis = _term_basis(el)
        if e.dim == 0:
            vals = el.evaluate(cell.vertices[[cell.entities[0][e.index][0]]])[:, 0, :]
            self.functions = PolySet(
                (Term((0, 0, 0)),), vals[:, :, None], el.value_shape, self.domain
            )
            self.sample_points = np.zeros((1, 0))
            self.root_weights = np.ones(1)
        else:
            m = entity_map(cell, e)
            self.functions = restrict_set(basis, m, self.domain)
            rule = cell_rule(self.domain, 2 * el.superdegree)
            self.sample_points = rule.points
            self.root_weights = np.sqrt(rule.weights * m.metric)

    def samples(self, ps: PolySet) -> np.ndarray:
        vals = ps.evaluate(self.sample_points) * self.root_weights[None, :, None]
        return vals.reshape(len(ps), len(self.root_weights) * ps.value_size)


def _subset(ps: PolySet, idx) -> PolySet:
    return PolySet(ps.terms, ps.coeffs[list(idx)], ps.value_shape, ps.cell)


def _orthonormal_combination(ps: PolySet, samples: np.ndarray, scale: float, tol: float) -> PolySet:
    """An orthonormal basis of span(ps), dropping directions whose singular
    value is below tol * scale."""
    if len(ps) == 0 or samples.size == 0:
        return _subset(ps, [])
    u, s, _ = np.linalg.svd(samples, full_matrices=False)
    r = int(np.sum(s > tol * scale)) if scale > 0 else 0
    comb = (u[:, :r] / s[:r]).T
    return ps.combine(comb)


def trace_spaces(el: CiarletElement, e, cfg: SpanTestConfig = DEFAULT) -> TraceSpaces:
    """Uncontrolled and controlled trace spaces on an entity, each returned
    as an L2-orthonormal basis on the entity's reference cell."""
    cell = el.cell
    e = cell.check_entity(e)
    if cell.kind == "pyramid":
        raise CapabilityError("trace spaces are not available on the pyramid")
    r = _Restricted(el, e)
    closure = entity_closure(cell, e)
    on_closure = [i for i, l in enumerate(el.functionals) if l.entity in closure]
    off_closure = [i for i, l in enumerate(el.functionals) if l.entity not in closure]
    all_samples = r.samples(r.functions)
    sv = singular_values(all_samples)
    scale = float(sv[0]) if sv.size else 0.0
    tol = cfg.rank_rel_tolerance
    restricted_dim = int(np.sum(sv > tol * scale)) if scale > 0 else 0

    unc = _orthonormal_combination(_subset(r.functions, off_closure), all_samples[off_closure], scale, tol)
    u_samples = r.samples(unc)
    ctrl_funcs = _subset(r.functions, on_closure)
    c_samples = all_samples[on_closure]
    proj = c_samples @ u_samples.T
    projected = PolySet(
        ctrl_funcs.terms,
        ctrl_funcs.coeffs - np.einsum("iu,uct->ict", proj, _align_terms(unc, ctrl_funcs)),
        ctrl_funcs.value_shape,
        ctrl_funcs.cell,
    ) if len(unc) else ctrl_funcs
    ctrl = _orthonormal_combination(projected, c_samples - proj @ u_samples, scale, tol)
    return TraceSpaces(e, unc, ctrl, restricted_dim)


def _align_terms(src: PolySet, like: PolySet) -> np.ndarray:
    """src's coefficients over like's term list (src terms are a subset)."""
    index = {t: j for j, t in enumerate(like.terms)}
    out = np.zeros(src.coeffs.shape[:2] + (len(like.terms),))
    for j, t in enumerate(src.terms):
        out[:, :, index[t]] = src.coeffs[:, :, j]
    return out


def uncontrolled_trace(el: CiarletElement, e, cfg: SpanTestConfig = DEFAULT) -> PolySet:
    """Restrictions to e of the basis functions whose DOFs are not on the
    closure of e, reduced to a basis."""
    return trace_spaces(el, e, cfg).uncontrolled


def controlled_trace(el: CiarletElement, e, cfg: SpanTestConfig = DEFAULT) -> PolySet:
    """Orthogonal complement of the uncontrolled trace within the restricted space."""
    return trace_spaces(el, e, cfg).controlled


def trace_gram(a: PolySet, b: PolySet, el: CiarletElement, e) -> np.ndarray:
    """Matrix of entity inner products between two sets on e's reference cell."""
    r = _Restricted(el, EntityRef(*e))
    return r.samples(a) @ r.samples(b).T


# ---------------------------------------------------------------------------
# Functionals


def action_matrix(ls, space) -> np.ndarray:
    """[l_i(p_j)]."""
    return np.stack([np.atleast_1d(l(space)) for l in ls]) if len(ls) else np.zeros((0, len(space)))


def functionals_equivalent(ls_a, ls_b, space, cfg: SpanTestConfig = DEFAULT):
    """(flag, A): whether the two sets span the same dual space on `space`,
    and then the matrix A with l_b = A l_a."""
    if len(ls_a) != len(ls_b):
        return False, None
    ma = action_matrix(ls_a, space)
    mb = action_matrix(ls_b, space)
    ra, rb = matrix_rank(ma, cfg), matrix_rank(mb, cfg)
    rs = matrix_rank(np.vstack([ma, mb]), cfg)
    if not (ra == rb == rs == len(ls_a)):
        return False, None
    a = np.linalg.lstsq(ma.T, mb.T, rcond=None)[0].T
    return True, a


# ---------------------------------------------------------------------------
# de Rham


@dataclass(frozen=True)
class DeRhamReport:
    k: int
    grad_in_nedelec: bool
    curl_spans_pk: bool
    curl_grad_max: float

    @property
    def ok(self) -> bool:
        return self.grad_in_nedelec and self.curl_spans_pk and self.curl_grad_max < 1e-10

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "grad_in_nedelec": self.grad_in_nedelec,
            "curl_spans_pk": self.curl_spans_pk,
            "curl_grad_max": self.curl_grad_max,
            "ok": self.ok,
        }


def derham_containment(cell, k: int, cfg: SpanTestConfig = DEFAULT) -> DeRhamReport:
    """grad(Lagrange k) inside N1 of subdegree k-1; curl(N1 k-1) equal to P_{k-1}."""
    if isinstance(cell, str):
        cell = ReferenceCell(cell)
    if cell.kind != "triangle":
        raise CapabilityError("de Rham checks are implemented on the triangle")
    if k < 1:
        raise DomainError("k must be at least 1")
    lag = make_family("lagrange", cell, k)
    ned = make_family("nedelec_first_kind", cell, k - 1)
    grads = grad(_term_basis(lag))
    grad_in = contained_in(grads, ned, cell, cfg)
    curls = curl2d(_term_basis(ned))
    curl_ok = spans_same_space(curls, complete_space(2, k - 1), cell, cfg)
    cg = curl2d(grads)
    cg_max = float(np.abs(cg.coeffs).max()) if cg.coeffs.size else 0.0
    return DeRhamReport(k, grad_in, curl_ok, cg_max)
