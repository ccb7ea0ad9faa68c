"""Polynomial and rationomial functions stored as coefficients over a term
list, plus the natural, complete and orthonormal spaces on reference cells.

A term is x^p0 y^p1 z^p2 / (1-z)^e; the denominator only appears on the
pyramid. Functions on a cell of topological dimension d use the first d
coordinates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .cells import AffineMap, ReferenceCell
from .errors import CapabilityError, DomainError, SingularityError


@dataclass(frozen=True)
class Term:
    exponents: tuple[int, int, int]
    denom_power: int = 0

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def sort_key(self):
        p0, p1, p2 = self.exponents
        return (p0 + p1 + p2 + self.denom_power, p0, p1, p2, self.denom_power)


def _sorted_terms(terms: Iterable[Term]) -> tuple[Term, ...]:
    return tuple(sorted(set(terms), key=lambda t: t.sort_key))


def _pad(exps: Sequence[int]) -> tuple[int, int, int]:
    e = tuple(int(v) for v in exps) + (0,) * (3 - len(exps))
    return e[:3]


def term_values(terms: Sequence[Term], points) -> np.ndarray:
    """Values of each term at each point, shape (npts, nterms)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if pts.size else pts.reshape(1, 0)
    npts, dim = pts.shape
    if not terms:
        return np.zeros((npts, 0))
    exps = np.array([t.exponents for t in terms], dtype=int)
    denoms = np.array([t.denom_power for t in terms], dtype=int)
    if exps[:, dim:].any():
        raise DomainError("term uses a coordinate the points do not have")
    out = np.ones((npts, len(terms)))
    for axis in range(dim):
        top = exps[:, axis].max()
        if top == 0:
            continue
        powers = pts[:, axis : axis + 1] ** np.arange(top + 1)[None, :]
        out *= powers[:, exps[:, axis]]
    if denoms.any():
        if dim < 3:
            raise DomainError("denominator terms need three coordinates")
        base = 1.0 - pts[:, 2]
        if np.any(np.abs(base) < 1e-14):
            raise SingularityError("rationomial evaluated at z = 1")
        out /= base[:, None] ** denoms[None, :]
    return out


@dataclass(frozen=True, eq=False)
class PolyFunction:
    """One (possibly vector- or matrix-valued) function; coeffs has shape
    (value size, number of terms)."""

    terms: tuple[Term, ...]
    coeffs: np.ndarray
    value_shape: tuple[int, ...] = ()
    cell: ReferenceCell | None = None

    @property
    def value_size(self) -> int:
        return int(np.prod(self.value_shape, dtype=int))

    def evaluate(self, points) -> np.ndarray:
        """Shape (npts, value size)."""
        return term_values(self.terms, points) @ self.coeffs.T

    def as_set(self) -> "PolySet":
        return PolySet(self.terms, self.coeffs[None], self.value_shape, self.cell)

    @property
    def degree(self) -> int:
        used = np.abs(self.coeffs).max(axis=0) > 0 if self.terms else []
        return max([t.degree for t, u in zip(self.terms, used) if u], default=0)

    def to_text(self):
        return to_text(self)

    def to_json(self) -> dict:
        return to_json(self)


@dataclass(frozen=True, eq=False)
class PolySet:
    """An ordered set of functions sharing a term list; coeffs has shape
    (number of functions, value size, number of terms)."""

    terms: tuple[Term, ...]
    coeffs: np.ndarray
    value_shape: tuple[int, ...] = ()
    cell: ReferenceCell | None = None

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def __getitem__(self, i) -> PolyFunction:
        return PolyFunction(self.terms, self.coeffs[i], self.value_shape, self.cell)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def value_size(self) -> int:
        return int(np.prod(self.value_shape, dtype=int))

    @property
    def degree(self) -> int:
        if not len(self):
            return 0
        used = np.abs(self.coeffs).reshape(-1, len(self.terms)).max(axis=0) > 0
        return max([t.degree for t, u in zip(self.terms, used) if u], default=0)

    def evaluate(self, points) -> np.ndarray:
        """Values with shape (function, point, component)."""
        tv = term_values(self.terms, points)
        return np.einsum("pt,nct->npc", tv, self.coeffs)

    def combine(self, matrix) -> "PolySet":
        """New set whose i-th function is sum_j matrix[i, j] * self[j]."""
        matrix = np.asarray(matrix, dtype=float).reshape(-1, len(self))
        return PolySet(self.terms, np.einsum("ij,jct->ict", matrix, self.coeffs), self.value_shape, self.cell)

    @classmethod
    def from_functions(cls, functions: Sequence[PolyFunction], cell=None, value_shape=None) -> "PolySet":
        functions = list(functions)
        if not functions:
            return cls((), np.zeros((0, int(np.prod(value_shape or ()), dtype=int), 0)), tuple(value_shape or ()), cell)
        shape = functions[0].value_shape
        if any(f.value_shape != shape for f in functions):
            raise DomainError("functions in a set must share a value shape")
        terms = _sorted_terms(t for f in functions for t in f.terms)
        index = {t: i for i, t in enumerate(terms)}
        coeffs = np.zeros((len(functions), int(np.prod(shape, dtype=int)), len(terms)))
        for n, f in enumerate(functions):
            for j, t in enumerate(f.terms):
                coeffs[n, :, index[t]] += f.coeffs[:, j]
        return cls(terms, coeffs, shape, cell if cell is not None else functions[0].cell)

    def to_text(self) -> list:
        return [to_text(f) for f in self]

    def to_json(self) -> dict:
        return {
            "value_shape": list(self.value_shape),
            "terms": [list(t.exponents) + [t.denom_power] for t in self.terms],
            "coefficients": self.coeffs.tolist(),
        }


def polyfunction(value_shape, components, cell=None) -> PolyFunction:
    """Build a function from per-component {exponents: coefficient} dicts.

    Exponent keys may be plain tuples or (exponents, denom_power) pairs."""
    comps = [components] if not value_shape else list(components)
    terms = set()
    parsed = []
    for comp in comps:
        d = {}
        for key, c in comp.items():
            if len(key) == 2 and isinstance(key[0], tuple):
                t = Term(_pad(key[0]), int(key[1]))
            else:
                t = Term(_pad(key))
            d[t] = d.get(t, 0.0) + float(c)
            terms.add(t)
        parsed.append(d)
    terms = _sorted_terms(terms)
    coeffs = np.array([[d.get(t, 0.0) for t in terms] for d in parsed]).reshape(len(parsed), len(terms))
    return PolyFunction(terms, coeffs, tuple(value_shape), cell)


# ---------------------------------------------------------------------------
# Spaces


def natural_exponents(kind: str, k: int) -> list[Term]:
    r = range(k + 1)
    if kind == "point":
        ts = [Term((0, 0, 0))]
    elif kind == "interval":
        ts = [Term((a, 0, 0)) for a in r]
    elif kind == "triangle":
        ts = [Term((a, b, 0)) for a in r for b in r if a + b <= k]
    elif kind == "quadrilateral":
        ts = [Term((a, b, 0)) for a in r for b in r]
    elif kind == "tetrahedron":
        ts = [Term((a, b, c)) for a in r for b in r for c in r if a + b + c <= k]
    elif kind == "hexahedron":
        ts = [Term((a, b, c)) for a in r for b in r for c in r]
    elif kind == "prism":
        ts = [Term((a, b, c)) for a in r for b in r for c in r if a + b <= k]
    elif kind == "pyramid":
        ts = [Term((a, b, c), a + b) for a in r for b in r for c in r]
    else:
        raise CapabilityError(f"no natural space on {kind}")
    return list(_sorted_terms(ts))


def _identity_set(terms, cell) -> PolySet:
    terms = _sorted_terms(terms)
    coeffs = np.eye(len(terms))[:, None, :]
    return PolySet(terms, coeffs, (), cell)


def _compose_to_cell(ps: PolySet, cell: ReferenceCell) -> PolySet:
    """Rewrite a set given in canonical coordinates in the coordinates of an
    affinely placed cell."""
    if cell.is_canonical:
        return ps
    out = restrict_set(ps, cell.reference_map.inverse(), cell)
    return out


def natural_space(cell: ReferenceCell, k: int) -> PolySet:
    """Monomial basis of the natural degree-k (rationomial on the pyramid) space."""
    if k < 0:
        raise DomainError("degree must be non-negative")
    ps = _identity_set(natural_exponents(cell.kind, k), cell.canonical())
    return _compose_to_cell(ps, cell)


_SIMPLEX_OF_DIM = {0: "point", 1: "interval", 2: "triangle", 3: "tetrahedron"}


def complete_space(tdim: int, k: int) -> PolySet:
    if not 1 <= tdim <= 3:
        raise DomainError("topological dimension must be 1, 2 or 3")
    return natural_space(ReferenceCell(_SIMPLEX_OF_DIM[tdim]), k)


def pyramid_lagrange_space(k: int) -> PolySet:
    if k < 0:
        raise DomainError("degree must be non-negative")
    r = range(k + 1)
    ts = [
        Term((a, b, c), min(a, b))
        for a in r for b in r for c in r
        if a + c <= k and b + c <= k
    ]
    return _identity_set(ts, ReferenceCell("pyramid"))


def evaluate(fs, points) -> np.ndarray:
    """Value table (function, point, component)."""
    if isinstance(fs, PolyFunction):
        fs = fs.as_set()
    return fs.evaluate(points)


# ---------------------------------------------------------------------------
# Differentiation


def _derivative_map(terms: Sequence[Term], axis: int):
    """(new terms, matrix M) with d/daxis of term i = sum_j M[i, j] newterm j."""
    pieces = []
    for t in terms:
        out = []
        p = list(t.exponents)
        if p[axis] > 0:
            q = list(p)
            q[axis] -= 1
            out.append((Term(tuple(q), t.denom_power), float(p[axis])))
        if axis == 2 and t.denom_power > 0:
            out.append((Term(t.exponents, t.denom_power + 1), float(t.denom_power)))
        pieces.append(out)
    new_terms = _sorted_terms(nt for out in pieces for nt, _ in out)
    index = {nt: j for j, nt in enumerate(new_terms)}
    mat = np.zeros((len(terms), len(new_terms)))
    for i, out in enumerate(pieces):
        for nt, c in out:
            mat[i, index[nt]] += c
    return new_terms, mat


def _tdim_of(f) -> int:
    if f.cell is not None:
        return f.cell.tdim
    return max([i + 1 for t in f.terms for i, e in enumerate(t.exponents) if e] + [1])


def differentiate(f, direction: int):
    """Partial derivative along one axis, componentwise."""
    if direction >= _tdim_of(f):
        raise DomainError(f"direction {direction} exceeds the topological dimension")
    new_terms, mat = _derivative_map(f.terms, direction)
    if isinstance(f, PolySet):
        return PolySet(new_terms, f.coeffs @ mat, f.value_shape, f.cell)
    return PolyFunction(new_terms, f.coeffs @ mat, f.value_shape, f.cell)


def _stack(parts: Sequence, value_shape):
    """Stack scalar-component derivatives into one function or set."""
    is_set = isinstance(parts[0], PolySet)
    terms = _sorted_terms(t for p in parts for t in p.terms)
    index = {t: i for i, t in enumerate(terms)}

    def widen(p):
        c = p.coeffs
        out = np.zeros(c.shape[:-1] + (len(terms),))
        for j, t in enumerate(p.terms):
            out[..., index[t]] += c[..., j]
        return out

    cs = [widen(p) for p in parts]
    if is_set:
        coeffs = np.concatenate(cs, axis=1)
        return PolySet(terms, coeffs, tuple(value_shape), parts[0].cell)
    return PolyFunction(terms, np.concatenate(cs, axis=0), tuple(value_shape), parts[0].cell)


def _component(f, c: int):
    if isinstance(f, PolySet):
        return PolySet(f.terms, f.coeffs[:, c : c + 1, :], (), f.cell)
    return PolyFunction(f.terms, f.coeffs[c : c + 1, :], (), f.cell)


def _combine_parts(parts, signs):
    terms = _sorted_terms(t for p in parts for t in p.terms)
    index = {t: i for i, t in enumerate(terms)}
    shape = parts[0].coeffs.shape[:-1] + (len(terms),)
    out = np.zeros(shape)
    for p, s in zip(parts, signs):
        for j, t in enumerate(p.terms):
            out[..., index[t]] += s * p.coeffs[..., j]
    cls = type(parts[0])
    return cls(terms, out, (), parts[0].cell)


def grad(f):
    if f.value_shape != ():
        raise DomainError("grad needs a scalar function")
    d = _tdim_of(f)
    return _stack([differentiate(f, i) for i in range(d)], (d,))


def div(f):
    d = _tdim_of(f)
    if f.value_shape != (d,):
        raise DomainError("div needs a vector function with one component per coordinate")
    return _combine_parts([differentiate(_component(f, i), i) for i in range(d)], [1.0] * d)


def curl2d(f):
    if f.value_shape != (2,):
        raise DomainError("curl2d needs a 2-vector function")
    return _combine_parts(
        [differentiate(_component(f, 1), 0), differentiate(_component(f, 0), 1)], [1.0, -1.0]
    )


def curl3d(f):
    if f.value_shape != (3,):
        raise DomainError("curl3d needs a 3-vector function")
    c = [_component(f, i) for i in range(3)]
    parts = [
        _combine_parts([differentiate(c[2], 1), differentiate(c[1], 2)], [1.0, -1.0]),
        _combine_parts([differentiate(c[0], 2), differentiate(c[2], 0)], [1.0, -1.0]),
        _combine_parts([differentiate(c[1], 0), differentiate(c[0], 1)], [1.0, -1.0]),
    ]
    return _stack(parts, (3,))


# ---------------------------------------------------------------------------
# Restriction / composition with affine maps


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = (ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2])
            out[e] = out.get(e, 0.0) + ca * cb
    return out


def _composition_map(terms: Sequence[Term], m: AffineMap):
    """(new terms, matrix M) with term_i o m = sum_j M[i, j] newterm_j."""
    gdim, edim = m.jacobian.shape
    linear = []
    for axis in range(gdim):
        d = {(0, 0, 0): float(m.origin[axis])}
        for j in range(edim):
            e = [0, 0, 0]
            e[j] = 1
            d[tuple(e)] = d.get(tuple(e), 0.0) + float(m.jacobian[axis, j])
        linear.append({k: v for k, v in d.items() if v != 0.0} or {(0, 0, 0): 0.0})
    power_cache: dict = {}

    def power(axis, p):
        key = (axis, p)
        if key not in power_cache:
            power_cache[key] = {(0, 0, 0): 1.0} if p == 0 else _poly_mul(power(axis, p - 1), linear[axis])
        return power_cache[key]

    expanded = []
    for t in terms:
        if any(t.exponents[a] for a in range(gdim, 3)):
            raise DomainError("term uses a coordinate the map does not produce")
        poly = {(0, 0, 0): 1.0}
        for axis in range(gdim):
            if t.exponents[axis]:
                poly = _poly_mul(poly, power(axis, t.exponents[axis]))
        if t.denom_power:
            if gdim < 3 or np.any(m.jacobian[2] != 0):
                raise CapabilityError("restriction of pyramid denominators needs z constant on the entity")
            base = 1.0 - float(m.origin[2])
            if abs(base) < 1e-14:
                raise SingularityError("restriction onto the pyramid apex plane")
            poly = {k: v / base**t.denom_power for k, v in poly.items()}
        expanded.append(poly)
    new_terms = _sorted_terms(Term(e) for poly in expanded for e in poly)
    index = {nt: j for j, nt in enumerate(new_terms)}
    mat = np.zeros((len(terms), len(new_terms)))
    for i, poly in enumerate(expanded):
        for e, c in poly.items():
            mat[i, index[Term(e)]] += c
    return new_terms, mat


def _domain_for(m: AffineMap, domain):
    if domain is not None:
        return domain
    return ReferenceCell({0: "point", 1: "interval"}.get(m.source_dim, "point")) if m.source_dim <= 1 else None


def restrict_set(fs: PolySet, m: AffineMap, domain: ReferenceCell | None = None) -> PolySet:
    """Compose every function with the affine map m."""
    new_terms, mat = _composition_map(fs.terms, m)
    return PolySet(new_terms, fs.coeffs @ mat, fs.value_shape, _domain_for(m, domain))


def restrict(f, m: AffineMap, domain: ReferenceCell | None = None):
    """f o m, expanded in the terms of m's source coordinates."""
    if isinstance(f, PolySet):
        return restrict_set(f, m, domain)
    new_terms, mat = _composition_map(f.terms, m)
    return PolyFunction(new_terms, f.coeffs @ mat, f.value_shape, _domain_for(m, domain))


# ---------------------------------------------------------------------------
# Orthonormal bases


def legendre_values(n: int, x) -> np.ndarray:
    """L2([0,1])-orthonormal shifted Legendre polynomials 0..n at x, shape (n+1, len(x))."""
    t = 2.0 * np.asarray(x, dtype=float) - 1.0
    out = np.empty((n + 1,) + t.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = t
    for j in range(1, n):
        out[j + 1] = ((2 * j + 1) * t * out[j] - j * out[j - 1]) / (j + 1)
    return out * np.sqrt(2 * np.arange(n + 1) + 1.0).reshape((-1,) + (1,) * t.ndim)


@lru_cache(maxsize=None)
def _legendre_monomials(n: int) -> np.ndarray:
    """Row j: monomial coefficients of the j-th orthonormal shifted Legendre polynomial."""
    out = np.zeros((n + 1, n + 1))
    for j in range(n + 1):
        c = np.polynomial.Legendre.basis(j, domain=[0, 1]).convert(kind=np.polynomial.Polynomial).coef
        out[j, : len(c)] = c * math.sqrt(2 * j + 1)
    return out


def legendre_products(exponents: np.ndarray, points) -> np.ndarray:
    """prod_axis L_{e_axis}(x_axis) for each exponent row; shape (m, npts)."""
    pts = np.asarray(points, dtype=float)
    npts, dim = pts.shape
    out = np.ones((len(exponents), npts))
    for axis in range(dim):
        top = int(exponents[:, axis].max()) if len(exponents) else 0
        if top == 0:
            continue
        vals = legendre_values(top, pts[:, axis])
        out *= vals[exponents[:, axis]]
    return out


class OrthonormalSet:
    """L2-orthonormal basis of a natural space, evaluated through Legendre
    recurrences rather than monomials.

    Functions are transform @ (products of shifted Legendre polynomials in
    canonical coordinates); on an affinely placed cell, points are pulled back
    first and values scaled to stay orthonormal."""

    def __init__(self, cell: ReferenceCell, degree: int, terms, transform):
        self.cell = cell
        self.degree = degree
        self.terms = tuple(terms)
        self.exponents = np.array([t.exponents for t in self.terms], dtype=int).reshape(-1, 3)[:, : max(cell.tdim, 0)]
        self.transform = transform
        self.scale = 1.0 if cell.is_canonical else 1.0 / math.sqrt(abs(np.linalg.det(cell.reference_map.jacobian)))
        self.value_shape = ()

    value_size = 1

    def __len__(self) -> int:
        return self.transform.shape[0]

    def evaluate(self, points) -> np.ndarray:
        """Shape (function, point, 1)."""
        ref = self.cell.to_reference(points)
        if self.cell.tdim == 0:
            return np.full((1, len(ref), 1), 1.0)
        vals = self.transform @ legendre_products(self.exponents, ref)
        return (self.scale * vals)[:, :, None]

    def to_polyset(self) -> PolySet:
        tdim = self.cell.tdim
        n = int(self.exponents.max()) if self.exponents.size else 0
        lm = _legendre_monomials(n)
        mono_terms = _sorted_terms(self.terms)
        index = {t.exponents: j for j, t in enumerate(mono_terms)}
        # expansion of each Legendre product in monomials
        expand = np.zeros((len(self.terms), len(mono_terms)))
        for i, row in enumerate(self.exponents):
            per_axis = [np.nonzero(lm[row[a]])[0] for a in range(tdim)]
            for combo in itertools.product(*per_axis):
                c = 1.0
                for a, p in enumerate(combo):
                    c *= lm[row[a], p]
                expand[i, index[_pad(combo)]] += c
        coeffs = (self.transform @ expand)[:, None, :]
        ps = PolySet(mono_terms, coeffs, (), self.cell.canonical())
        ps = _compose_to_cell(ps, self.cell)
        if self.scale != 1.0:
            ps = PolySet(ps.terms, ps.coeffs * self.scale, (), ps.cell)
        return ps


def _mgs(vectors: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt with one reorthogonalisation pass.

    Returns T (lower triangular) with T @ vectors orthonormal."""
    m = vectors.shape[0]
    q = np.zeros_like(vectors)
    t = np.zeros((m, m))
    for j in range(m):
        v = vectors[j].copy()
        c = np.zeros(m)
        c[j] = 1.0
        for _ in range(2):
            for i in range(j):
                r = q[i] @ v
                v -= r * q[i]
                c -= r * t[i]
        nrm = np.linalg.norm(v)
        if nrm < 1e-13:
            raise DomainError("starting functions are linearly dependent")
        q[j] = v / nrm
        t[j] = c / nrm
    return t


@lru_cache(maxsize=None)
def _canonical_transform(kind: str, k: int):
    from .quadrature import cell_rule

    terms = natural_exponents(kind, k)
    cell = ReferenceCell(kind)
    if kind == "point":
        return terms, np.ones((1, 1))
    rule = cell_rule(cell, 2 * k)
    exps = np.array([t.exponents for t in terms], dtype=int)[:, : cell.tdim]
    vals = legendre_products(exps, rule.points) * np.sqrt(rule.weights)[None, :]
    return terms, _mgs(vals)


def orthonormal_set(cell: ReferenceCell, k: int) -> OrthonormalSet:
    if cell.kind == "pyramid":
        raise CapabilityError("orthonormal bases are not available on the pyramid")
    if k < 0:
        raise DomainError("degree must be non-negative")
    terms, transform = _canonical_transform(cell.kind, k)
    return OrthonormalSet(cell, k, terms, transform)


def orthonormal_basis(cell: ReferenceCell, k: int) -> PolySet:
    """Orthonormal basis (cell L2 inner product) of the natural degree-k space."""
    return orthonormal_set(cell, k).to_polyset()


# ---------------------------------------------------------------------------
# Serialisation

_VARS = ("x", "y", "z")


def _fmt(c: float) -> str:
    s = f"{c:.15g}"
    return "0" if s == "-0" else s


def _term_text(t: Term) -> str:
    parts = []
    for v, p in zip(_VARS, t.exponents):
        if p == 1:
            parts.append(v)
        elif p > 1:
            parts.append(f"{v}^{p}")
    s = " ".join(parts)
    if t.denom_power:
        den = "(1-z)" if t.denom_power == 1 else f"(1-z)^{t.denom_power}"
        s = f"{s or '1'} / {den}"
    return s


def _component_text(terms, coeffs, cutoff) -> str:
    pieces = []
    for t, c in zip(terms, coeffs):
        if abs(c) <= cutoff:
            continue
        body = _term_text(t)
        if not body:
            pieces.append(_fmt(c))
        elif body.startswith("1 / "):
            pieces.append(f"{_fmt(c)}{body[1:]}")
        else:
            pieces.append(f"{_fmt(c)} * {body}")
    if not pieces:
        return "0"
    return " + ".join(pieces).replace("+ -", "- ")


def to_text(f: PolyFunction, rel_cutoff: float = 1e-12):
    """Text form 'c * x^a y^b z^c / (1-z)^e + ...'; a list for non-scalars.

    Coefficients below rel_cutoff times the largest are omitted."""
    scale = float(np.abs(f.coeffs).max()) if f.coeffs.size else 0.0
    cutoff = rel_cutoff * scale
    comps = [_component_text(f.terms, f.coeffs[c], cutoff) for c in range(f.coeffs.shape[0])]
    if f.value_shape == ():
        return comps[0]
    return comps


def to_json(f: PolyFunction) -> dict:
    return {
        "value_shape": list(f.value_shape),
        "terms": [list(t.exponents) + [t.denom_power] for t in f.terms],
        "coefficients": f.coeffs.tolist(),
    }
