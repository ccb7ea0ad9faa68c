"""Command-line front end.

Exit codes: 0 success (and, for verify/batch, all pairs are variants), 1 a
legitimate non-variant result, 2 any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import degrees, trace_spaces
from .cells import entity_name
from .elements import ElementSpec, tabulate
from .errors import CiarletError
from .span import SpanTestConfig
from .verify import verify_variants

EXIT_OK, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    s = "%.15g" % x
    return "0" if s == "-0" else s


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2)


def _config(args, overrides: dict | None = None) -> SpanTestConfig:
    kw = {"points_per_direction": args.lattice, "rank_rel_tolerance": args.tolerance}
    if overrides:
        kw.update({k: v for k, v in overrides.items() if k in kw})
    return SpanTestConfig(**kw)


def _vertices(text):
    if text is None:
        return None
    try:
        verts = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--cell-vertices is not valid JSON: {exc}") from None
    return verts


def _build(spec_text: str, vertices=None):
    return ElementSpec.parse(spec_text).build(vertices)


def _entity_counts(el) -> dict:
    tdim = el.cell.tdim
    out = {}
    for d in range(tdim + 1):
        name = "interior" if d == tdim else entity_name(tdim, tdim - d)[1]
        out[name] = sum(len(v) for e, v in el.entity_dofs.items() if e.dim == d)
    return out


# ---------------------------------------------------------------------------
# Commands


def cmd_info(args) -> int:
    el = _build(args.spec, _vertices(args.cell_vertices))
    spec = ElementSpec.parse(args.spec)
    info = {
        "family": el.family,
        "cell": el.cell.kind,
        "cell_vertices": el.cell.vertices.tolist(),
        "degree": spec.degree,
        "variant": el.variant,
        "dofs": el.dim,
        "dofs_by_dimension": _entity_counts(el),
        "entity_dofs": [
            {"dim": e.dim, "index": e.index, "dofs": v} for e, v in el.entity_dofs.items()
        ],
        "value_shape": list(el.value_shape),
        "map": el.map_kind,
        "superdegree": el.superdegree,
        "dual_condition": el.dual.condition_estimate,
    }
    print(_dumps(info))
    return EXIT_OK


def _read_points(args, el) -> np.ndarray:
    tdim = el.cell.tdim
    if args.points:
        text = Path(args.points).read_text()
        try:
            pts = np.array(json.loads(text), dtype=float)
        except json.JSONDecodeError:
            pts = np.loadtxt(args.points, delimiter=None if "," not in text else ",", ndmin=2)
        pts = pts.reshape(-1, tdim)
    elif args.point:
        pts = np.array([[float(c) for c in p.split(",")] for p in args.point])
        if pts.shape[1] != tdim:
            raise UsageError(f"points need {tdim} coordinates")
    else:
        from .cells import lattice_points

        n = args.lattice if args.lattice is not None else 2 * el.superdegree + 3
        pts = lattice_points(el.cell, n)
    if not el.cell.contains(pts, tol=1e-12).all():
        raise UsageError("a point lies outside the cell")
    return pts


def cmd_tabulate(args) -> int:
    el = _build(args.spec, _vertices(args.cell_vertices))
    pts = _read_points(args, el)
    table = tabulate(el, pts)
    s = el.value_size
    coords = ["x", "y", "z"][: el.cell.tdim]
    if args.json:
        print(_dumps({"points": pts.tolist(), "values": table.tolist(), "value_size": s}))
        return EXIT_OK
    header = coords + [f"dof{i}_c{c}" for i in range(el.dim) for c in range(s)]
    lines = [",".join(header)]
    for p, row in zip(pts, table):
        lines.append(",".join([fmt(v) for v in p] + [fmt(v) for v in row.ravel()]))
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    el_a = _build(args.spec_a)
    el_b = _build(args.spec_b, _vertices(args.cell_vertices))
    report = verify_variants(el_a, el_b, _config(args))
    print(_dumps(report.to_json()))
    return EXIT_OK if report.result else EXIT_FALSE


def cmd_degree(args) -> int:
    el = _build(args.spec, _vertices(args.cell_vertices))
    rep = degrees(el, args.k_cap, _config(args))
    print(_dumps(rep.to_json()))
    return EXIT_OK


def _parse_entity(text: str):
    try:
        d, i = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--entity needs 'dim,index', got {text!r}") from None
    return d, i


def cmd_trace(args) -> int:
    el = _build(args.spec, _vertices(args.cell_vertices))
    cfg = _config(args)
    ents = [el.cell.check_entity(_parse_entity(args.entity))] if args.entity else el.cell.all_entities()
    out = [trace_spaces(el, e, cfg).to_json() for e in ents]
    print(_dumps(out[0] if args.entity else out))
    return EXIT_OK


def _job_spec(side):
    if isinstance(side, str):
        return side, None
    if isinstance(side, dict):
        spec = ElementSpec(
            side["family"], side["cell"], int(side["degree"]), side.get("variant")
        )
        return str(spec), side.get("cell_vertices")
    raise UsageError("each job side is a spec string or an object")


def _run_job(job: dict, tolerance: float, lattice) -> dict:
    try:
        spec_a, verts_a = _job_spec(job["a"])
        spec_b, verts_b = _job_spec(job["b"])
        overrides = job.get("config", {}) or {}
        cfg = SpanTestConfig(
            overrides.get("points_per_direction", lattice),
            overrides.get("rank_rel_tolerance", tolerance),
        )
        report = verify_variants(_build(spec_a, verts_a), _build(spec_b, verts_b), cfg)
        out = report.to_json()
    except (CiarletError, UsageError, KeyError, TypeError, ValueError) as exc:
        out = {"result": None, "error": f"{type(exc).__name__}: {exc}"}
    out["a"] = job.get("a")
    out["b"] = job.get("b")
    return out


def cmd_batch(args) -> int:
    try:
        data = json.loads(Path(args.jobfile).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read job file: {exc}") from None
    jobs = data.get("jobs") if isinstance(data, dict) else data
    if not isinstance(jobs, list) or not jobs:
        raise UsageError("the job file has no jobs")
    workers = max(1, args.workers)
    call = [(job, args.tolerance, args.lattice) for job in jobs]
    if workers == 1:
        results = [_run_job(*c) for c in call]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, *zip(*call)))
    print(_dumps(results))
    if any(r.get("result") is None for r in results):
        return EXIT_ERROR
    return EXIT_OK if all(r["result"] for r in results) else EXIT_FALSE


# ---------------------------------------------------------------------------
# Plots


def _svg_interval(el, dof: int) -> str:
    xs = np.linspace(0.0, 1.0, 200)
    vals = tabulate(el, el.cell.reference_map(xs[:, None]) if not el.cell.is_canonical else xs[:, None])[:, dof, 0]
    lo = min(-1.0, float(vals.min()))
    hi = max(2.0, float(vals.max()))
    w, h, m = 480, 320, 40

    def px(x):
        return m + x * (w - 2 * m)

    def py(y):
        return h - m - (y - lo) / (hi - lo) * (h - 2 * m)

    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, vals))
    guides = "".join(
        f'<line x1="{m}" y1="{py(g):.2f}" x2="{w - m}" y2="{py(g):.2f}" stroke="#999" stroke-dasharray="4 3"/>'
        f'<text x="{m - 6}" y="{py(g) + 4:.2f}" text-anchor="end" font-size="11">{g:g}</text>'
        for g in (0.0, 1.0)
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">'
        f'<rect width="{w}" height="{h}" fill="white"/>'
        f'<line x1="{m}" y1="{h - m}" x2="{w - m}" y2="{h - m}" stroke="black"/>'
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{h - m}" stroke="black"/>'
        f"{guides}"
        f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>'
        f'<text x="{w / 2:.0f}" y="{h - 8}" text-anchor="middle" font-size="12">x</text>'
        f'<text x="12" y="{h / 2:.0f}" text-anchor="middle" font-size="12">phi{dof}</text>'
        f'<text x="{w / 2:.0f}" y="20" text-anchor="middle" font-size="12">{el.name} basis function {dof}</text>'
        "</svg>\n"
    )


def _colour(t: float) -> str:
    t = min(1.0, max(0.0, t))
    if t < 0.5:
        a = t / 0.5
        r, g, b = 59 + a * (255 - 59), 76 + a * (255 - 76), 192 + a * (255 - 192)
    else:
        a = (t - 0.5) / 0.5
        r, g, b = 255 - a * (255 - 180), 255 - a * (255 - 4), 255 - a * (255 - 38)
    return f"#{int(round(r)):02x}{int(round(g)):02x}{int(round(b)):02x}"


def _svg_triangle(el, dof: int, comp: int = 0) -> str:
    n = 40
    size = 320
    m = 40
    cell = 1.0 / n
    centres = [((i + 0.5) * cell, (j + 0.5) * cell) for j in range(n) for i in range(n)]
    inside = [c for c in centres if c[0] + c[1] <= 1.0]
    ref = np.array(inside)
    pts = el.cell.reference_map(ref) if not el.cell.is_canonical else ref
    vals = tabulate(el, pts)[:, dof, comp]
    lo, hi = float(vals.min()), float(vals.max())
    span = hi - lo if hi > lo else 1.0
    rects = "".join(
        f'<rect x="{m + (x - cell / 2) * size:.2f}" y="{m + (1 - y - cell / 2) * size:.2f}" '
        f'width="{cell * size:.2f}" height="{cell * size:.2f}" fill="{_colour((v - lo) / span)}"/>'
        for (x, y), v in zip(inside, vals)
    )
    w = h = size + 2 * m
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">'
        f'<rect width="{w}" height="{h}" fill="white"/>{rects}'
        f'<polygon points="{m},{m + size} {m + size},{m + size} {m},{m}" fill="none" stroke="black"/>'
        f'<text x="{m + size / 2:.0f}" y="{h - 10}" text-anchor="middle" font-size="12">x</text>'
        f'<text x="14" y="{m + size / 2:.0f}" text-anchor="middle" font-size="12">y</text>'
        f'<text x="{w / 2:.0f}" y="20" text-anchor="middle" font-size="12">'
        f"{el.name} basis function {dof}, range [{fmt(lo)}, {fmt(hi)}]</text>"
        "</svg>\n"
    )


def cmd_plot(args) -> int:
    el = _build(args.spec, _vertices(args.cell_vertices))
    if not 0 <= args.dof < el.dim:
        raise UsageError(f"dof must lie in [0, {el.dim - 1}]")
    if el.cell.kind == "interval":
        svg = _svg_interval(el, args.dof)
    elif el.cell.kind == "triangle":
        svg = _svg_triangle(el, args.dof)
    else:
        raise UsageError("plots are available on the interval and the triangle")
    Path(args.output).write_text(svg)
    if args.json:
        print(_dumps({"output": str(args.output), "bytes": len(svg.encode())}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_globals(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--tolerance", type=float, default=d(1e-8), help="relative rank tolerance")
    p.add_argument("--lattice", type=int, default=d(None), help="lattice points per direction")
    p.add_argument("--json", action="store_true", default=d(False), help="JSON output where CSV/SVG is the default")
    p.add_argument("--cell-vertices", default=d(None), help="JSON vertex list of an alternative cell placement")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ciarlet", description="Build, inspect and compare finite elements.")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _add_globals(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("info", cmd_info, "element summary")
    p.add_argument("spec", help="family:cell:degree[:variant]")
    p = add("tabulate", cmd_tabulate, "basis values as CSV")
    p.add_argument("spec")
    p.add_argument("--points", help="file of points (JSON array or rows of numbers)")
    p.add_argument("--point", action="append", help="one point as comma-separated coordinates")
    p = add("verify", cmd_verify, "check whether two elements are variants")
    p.add_argument("spec_a")
    p.add_argument("spec_b", help="--cell-vertices applies to this element")
    p = add("degree", cmd_degree, "polynomial and Lagrange sub/superdegrees")
    p.add_argument("spec")
    p.add_argument("--k-cap", type=int, default=None)
    p = add("trace", cmd_trace, "controlled and uncontrolled trace spaces")
    p.add_argument("spec")
    p.add_argument("--entity", help="dim,index (all entities when omitted)")
    p = add("batch", cmd_batch, "run a JSON file of verification jobs")
    p.add_argument("jobfile")
    p.add_argument("--workers", type=int, default=1)
    p = add("plot", cmd_plot, "SVG plot of one basis function")
    p.add_argument("spec")
    p.add_argument("--dof", type=int, required=True)
    p.add_argument("--output", "-o", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        SpanTestConfig(args.lattice, args.tolerance)
        return args.func(args)
    except (CiarletError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
