"""Ciarlet finite elements on reference cells: construction, tabulation,
degrees, trace spaces and variant verification."""

from .analysis import (
    DegreeReport,
    TraceSpaces,
    controlled_trace,
    degrees,
    derham_containment,
    functionals_equivalent,
    trace_spaces,
    uncontrolled_trace,
)
from .cells import EntityRef, ReferenceCell, entity_closure, entity_map, entity_name, lattice_points, topology
from .elements import (
    CiarletElement,
    ElementSpec,
    Functional,
    apply_functional,
    build_element,
    dual_matrix,
    gll_points,
    make_family,
    parse_element,
    tabulate,
)
from .errors import (
    CapabilityError,
    CiarletError,
    ConfigurationError,
    DegenerateElementError,
    DomainError,
    SingularityError,
)
from .mapping import GeometricMap, align_convention, is_affine, pull_back, push_forward
from .polyset import (
    PolyFunction,
    PolySet,
    Term,
    complete_space,
    natural_space,
    orthonormal_basis,
    pyramid_lagrange_space,
)
from .quadrature import QuadRule, cell_rule, gauss_legendre, inner_product
from .span import SpanTestConfig, matrix_rank, spans_same_space
from .verify import VerificationReport, verify_variants

__all__ = [name for name in dir() if not name.startswith("_")]
