import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ciarlet.analysis import functionals_equivalent
from ciarlet.cells import ReferenceCell
from ciarlet.elements import build_element, make_family, parse_element, point_eval
from ciarlet.errors import ConfigurationError
from ciarlet.mapping import align_convention
from ciarlet.polyset import PolySet, natural_space, polyfunction
from ciarlet.span import SpanTestConfig, matrix_rank, spans_same_space
from ciarlet.verify import verify_variants

INTERVAL = ReferenceCell("interval")


def test_matrix_rank_examples():
    assert matrix_rank([[1, 0], [0, 1]]) == 2
    assert matrix_rank([[1, 2], [2, 4]]) == 1
    assert matrix_rank([[1, 1], [1, 1 + 1e-14]], 1e-8) == 1
    assert matrix_rank(np.zeros((3, 3))) == 0
    assert matrix_rank(np.zeros((0, 4))) == 0


def test_spans_same_space_examples():
    a = PolySet.from_functions([polyfunction((), {(0,): 1}), polyfunction((), {(1,): 1})])
    b = PolySet.from_functions([polyfunction((), {(0,): 1, (1,): 1}), polyfunction((), {(0,): 1, (1,): -1})])
    c = PolySet.from_functions([polyfunction((), {(0,): 1}), polyfunction((), {(2,): 1})])
    v = PolySet.from_functions([polyfunction((2,), [{(0,): 1}, {}])])
    assert spans_same_space(a, b, INTERVAL)
    assert not spans_same_space(a, c, INTERVAL)
    assert not spans_same_space(a, v, INTERVAL)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SpanTestConfig(rank_rel_tolerance=1e-3)
    with pytest.raises(ConfigurationError):
        SpanTestConfig(rank_rel_tolerance=0.0)
    with pytest.raises(ConfigurationError):
        SpanTestConfig(points_per_direction=6).lattice_size(2)
    assert SpanTestConfig(points_per_direction=7).lattice_size(2) == 7


def test_verify_examples():
    a = parse_element("lagrange:interval:7:equispaced")
    b = parse_element("lagrange:interval:7:gll")
    rep = verify_variants(a, b)
    assert rep.result and rep.stage is None
    ok, mat = functionals_equivalent(a.functionals, b.functionals, a.space)
    assert ok and np.linalg.matrix_rank(mat) == a.dim
    rep = verify_variants(parse_element("lagrange:triangle:1"), parse_element("rt:triangle:1"))
    assert (rep.result, rep.stage) == (False, "space_mismatch")
    rep = verify_variants(parse_element("lagrange:triangle:2"), parse_element("dg:triangle:2"))
    assert (rep.result, rep.stage) == (False, "dof_count_mismatch")
    assert rep.failed_entity == (0, 0)


def test_trace_mismatch_stage():
    space = natural_space(INTERVAL, 2)
    good = make_family("lagrange", "interval", 2)
    # the DOF on vertex 0 samples the midpoint, so vertex 0 sees an uncontrolled value
    ls = [
        point_eval(INTERVAL, (0, 0), [0.5]),
        point_eval(INTERVAL, (0, 1), [1.0]),
        point_eval(INTERVAL, (1, 0), [0.0]),
    ]
    bad = build_element(INTERVAL, space, ls, "identity", superdegree=2)
    rep = verify_variants(good, bad)
    assert (rep.result, rep.stage, rep.failed_entity) == (False, "trace_mismatch", (0, 0))
    row = rep.entities[0]
    assert (row["unc_rank_a"], row["unc_rank_b"]) == (0, 1)


def test_map_kind_mismatch_stage():
    placed = ReferenceCell("triangle", ((0, 0), (2, 0), (0, 2)))
    rep = verify_variants(make_family("lagrange", "triangle", 1), make_family("rt", placed, 0))
    assert (rep.result, rep.stage) == (False, "map_kind_mismatch")


def test_alignment_before_comparison():
    a = make_family("lagrange", "interval", 3)
    b = make_family("lagrange", ReferenceCell("interval", ((-1,), (1,))), 3, "gll")
    rep = verify_variants(a, b)
    assert rep.result and rep.diagnostics["aligned"]
    flipped = ReferenceCell("triangle", ((0, 0), (0, 1), (1, 0)))
    rep = verify_variants(make_family("rt", "triangle", 1), make_family("rt", flipped, 1))
    assert rep.result


def test_report_json_schema():
    rep = verify_variants(parse_element("lagrange:triangle:2"), parse_element("lagrange:triangle:2:gll"))
    data = json.loads(rep.dumps())
    assert set(data) >= {"result", "stage", "entities", "config"}
    assert data["result"] is True and data["stage"] is None
    keys = {"dim", "index", "dofs_a", "dofs_b", "unc_rank_a", "unc_rank_b", "stacked_rank"}
    assert all(set(row) == keys for row in data["entities"])
    assert len(data["entities"]) == 7
    assert data["config"]["points_per_direction"] == 7


SPECS = [
    "lagrange:interval:3",
    "lagrange:triangle:2",
    "lagrange:triangle:2:gll",
    "lagrange:quadrilateral:2",
    "dg:triangle:2",
    "cr:triangle:1",
    "rt:triangle:1",
    "n1:triangle:1",
    "lagrange:tetrahedron:2",
    "rt:tetrahedron:1",
]


@pytest.mark.parametrize("spec", SPECS + ["lagrange:interval:4:gll", "n1:tetrahedron:2", "lagrange:hexahedron:2"])
def test_reflexive(spec):
    el = parse_element(spec)
    assert verify_variants(el, el).result


def test_symmetric():
    els = [parse_element(s) for s in SPECS]
    for i, a in enumerate(els):
        for b in els[i + 1:]:
            assert verify_variants(a, b).result == verify_variants(b, a).result


def test_moment_basis_change_is_a_variant():
    for fam in ("raviart_thomas", "nedelec_first_kind"):
        for cell in ("triangle", "tetrahedron"):
            a = make_family(fam, cell, 1)
            b = make_family(fam, cell, 1, moment_basis="monomial")
            assert verify_variants(a, b).result


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_lattice_robustness(k):
    a = make_family("lagrange", "triangle", k)
    for other, expected in ((make_family("lagrange", "triangle", k, "gll"), True), (make_family("dg", "triangle", k), False)):
        results = {
            verify_variants(a, other, SpanTestConfig(n, 1e-8)).result
            for n in (2 * k + 3, 2 * k + 5, 3 * k + 4)
        }
        assert results == {expected}


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["lagrange:triangle:2", "rt:triangle:1", "n1:tetrahedron:1"]), st.integers(0, 2**31 - 1))
def test_recombination_keeps_span(spec, seed):
    el = parse_element(spec)
    basis = el.basis
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(len(basis), len(basis))) + 3 * np.eye(len(basis))
    assert spans_same_space(basis, basis.combine(m), el.cell)


def test_aligned_element_is_idempotent():
    el = make_family("lagrange", ReferenceCell("quadrilateral", ((-1, -1), (1, -1), (-1, 1), (1, 1))), 2)
    once = align_convention(el)
    assert align_convention(once) is once
