"""Rank utilities and the lattice-based span equality test.

Function sets are anything with ``evaluate(points) -> (function, point,
component)`` and a ``value_size``: PolySet, OrthonormalSet, CiarletElement.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .cells import ReferenceCell, lattice_points
from .errors import ConfigurationError


@dataclass(frozen=True)
class SpanTestConfig:
    """points_per_direction=None picks 2 * (largest degree involved) + 3."""

    points_per_direction: int | None = None
    rank_rel_tolerance: float = 1e-8

    def __post_init__(self):
        if not (0 < self.rank_rel_tolerance <= 1e-4):
            raise ConfigurationError("rank_rel_tolerance must lie in (0, 1e-4]")
        if self.points_per_direction is not None and self.points_per_direction < 2:
            raise ConfigurationError("points_per_direction must be at least 2")

    def lattice_size(self, degree: int) -> int:
        need = 2 * degree + 3
        if self.points_per_direction is None:
            return need
        if self.points_per_direction < need:
            raise ConfigurationError(
                f"points_per_direction {self.points_per_direction} is below 2 * {degree} + 3"
            )
        return self.points_per_direction

    def to_json(self) -> dict:
        return asdict(self)


DEFAULT = SpanTestConfig()


def singular_values(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def matrix_rank(m, cfg: SpanTestConfig | float = DEFAULT) -> int:
    """Number of singular values above the relative tolerance times the largest."""
    tol = cfg if isinstance(cfg, float) else cfg.rank_rel_tolerance
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def degree_of(fs) -> int:
    for attr in ("superdegree", "degree"):
        d = getattr(fs, attr, None)
        if isinstance(d, (int, np.integer)):
            return int(d)
    raise ConfigurationError("cannot tell the degree of a function set; pass points_per_direction")


def value_size(fs) -> int:
    return int(fs.value_size)


def sample_matrix(fs, points) -> np.ndarray:
    """One row per function, point-major then component columns."""
    vals = np.asarray(fs.evaluate(points))
    return vals.reshape(vals.shape[0], len(points) * value_size(fs))


def domain_lattice(domain: ReferenceCell, degree: int, cfg: SpanTestConfig) -> np.ndarray:
    pts = lattice_points(domain, cfg.lattice_size(degree)) if domain.tdim else domain.vertices
    if len(pts) == 0:
        raise ConfigurationError("the point lattice is empty")
    return pts


@dataclass(frozen=True)
class SpanComparison:
    same: bool
    rank_a: int
    rank_b: int
    stacked_rank: int


def compare_spans(fs_a, fs_b, domain: ReferenceCell, cfg: SpanTestConfig = DEFAULT, points=None) -> SpanComparison:
    """Rank data of the lattice test; value-size mismatch gives same=False, ranks -1."""
    if value_size(fs_a) != value_size(fs_b):
        return SpanComparison(False, -1, -1, -1)
    if points is None:
        points = domain_lattice(domain, max(degree_of(fs_a), degree_of(fs_b)), cfg)
    if len(points) == 0:
        raise ConfigurationError("the point lattice is empty")
    ma = sample_matrix(fs_a, points)
    mb = sample_matrix(fs_b, points)
    ra = matrix_rank(ma, cfg)
    rb = matrix_rank(mb, cfg)
    rs = matrix_rank(np.vstack([ma, mb]), cfg)
    return SpanComparison(ra == rb == rs, ra, rb, rs)


def spans_same_space(fs_a, fs_b, domain: ReferenceCell, cfg: SpanTestConfig = DEFAULT, points=None) -> bool:
    """Whether two function sets span the same space on a domain cell,
    judged by ranks of their values on a regular lattice."""
    return compare_spans(fs_a, fs_b, domain, cfg, points).same


def contained_in(fs_small, fs_big, domain: ReferenceCell, cfg: SpanTestConfig = DEFAULT, points=None) -> bool:
    """Whether span(fs_small) is a subspace of span(fs_big)."""
    if value_size(fs_small) != value_size(fs_big):
        return False
    if points is None:
        points = domain_lattice(domain, max(degree_of(fs_small), degree_of(fs_big)), cfg)
    ms = sample_matrix(fs_small, points)
    mb = sample_matrix(fs_big, points)
    return matrix_rank(np.vstack([mb, ms]), cfg) == matrix_rank(mb, cfg)
