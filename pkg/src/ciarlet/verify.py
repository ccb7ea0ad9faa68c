"""Verification that two elements are variants of one another."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .analysis import trace_spaces
from .elements import CiarletElement
from .mapping import align_convention
from .span import DEFAULT, SpanTestConfig, compare_spans, domain_lattice

STAGES = ("map_kind_mismatch", "space_mismatch", "dof_count_mismatch", "trace_mismatch")


@dataclass
class VerificationReport:
    result: bool
    stage: str | None
    entities: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    failed_entity: tuple[int, int] | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "result": self.result,
            "stage": self.stage,
            "entities": self.entities,
            "config": self.config,
        }
        if self.failed_entity is not None:
            out["failed_entity"] = list(self.failed_entity)
        out["diagnostics"] = self.diagnostics
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)


def _fail(stage, entities, config, diagnostics, entity=None) -> VerificationReport:
    return VerificationReport(False, stage, entities, config, entity, diagnostics)


def verify_variants(el_a: CiarletElement, el_b: CiarletElement, cfg: SpanTestConfig = DEFAULT) -> VerificationReport:
    """Check, in order: convention alignment, equal spaces, equal DOF counts
    per entity, equal uncontrolled traces per entity."""
    degree = max(el_a.superdegree, el_b.superdegree)
    n = cfg.lattice_size(degree)
    config = {
        "points_per_direction": n,
        "rank_rel_tolerance": cfg.rank_rel_tolerance,
        "include_boundary": True,
    }
    diagnostics = {
        "element_a": el_a.name,
        "element_b": el_b.name,
        "dual_condition_a": el_a.dual.condition_estimate,
        "dual_condition_b": el_b.dual.condition_estimate,
        "aligned": False,
    }
    local = SpanTestConfig(n, cfg.rank_rel_tolerance)

    if el_a.cell.kind != el_b.cell.kind:
        diagnostics["reason"] = f"cells differ: {el_a.cell.kind} and {el_b.cell.kind}"
        return _fail("space_mismatch", [], config, diagnostics)
    if not np.array_equal(el_a.cell.vertices, el_b.cell.vertices):
        if el_a.map_kind != el_b.map_kind:
            diagnostics["reason"] = f"map kinds differ: {el_a.map_kind} and {el_b.map_kind}"
            return _fail("map_kind_mismatch", [], config, diagnostics)
        el_b = align_convention(el_b, el_a.cell.vertices)
        diagnostics["aligned"] = True
    cell = el_a.cell

    # the spaces
    points = domain_lattice(cell, degree, local)
    cmp = compare_spans(el_a, el_b, cell, local, points)
    diagnostics["space"] = {
        "dim_a": el_a.dim,
        "dim_b": el_b.dim,
        "rank_a": cmp.rank_a,
        "rank_b": cmp.rank_b,
        "stacked_rank": cmp.stacked_rank,
        "value_size_a": el_a.value_size,
        "value_size_b": el_b.value_size,
    }
    if not cmp.same or el_a.dim != el_b.dim:
        return _fail("space_mismatch", [], config, diagnostics)

    # DOF counts
    counts_a = el_a.entity_dof_counts()
    counts_b = el_b.entity_dof_counts()
    entities = [
        {
            "dim": e.dim,
            "index": e.index,
            "dofs_a": counts_a[e],
            "dofs_b": counts_b[e],
            "unc_rank_a": None,
            "unc_rank_b": None,
            "stacked_rank": None,
        }
        for e in cell.all_entities()
    ]
    for row in entities:
        if row["dofs_a"] != row["dofs_b"]:
            return _fail("dof_count_mismatch", entities, config, diagnostics, (row["dim"], row["index"]))

    # uncontrolled traces
    failed = None
    for e, row in zip(cell.all_entities(), entities):
        unc_a = trace_spaces(el_a, e, cfg).uncontrolled
        unc_b = trace_spaces(el_b, e, cfg).uncontrolled
        domain = cell.entity_reference(e)
        pts = domain_lattice(domain, degree, local)
        c = compare_spans(unc_a, unc_b, domain, local, pts)
        row.update(unc_rank_a=c.rank_a, unc_rank_b=c.rank_b, stacked_rank=c.stacked_rank)
        if not c.same and failed is None:
            failed = (e.dim, e.index)
            break
    if failed is not None:
        return _fail("trace_mismatch", entities, config, diagnostics, failed)
    return VerificationReport(True, None, entities, config, None, diagnostics)
