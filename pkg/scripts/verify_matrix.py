"""Run variant verification over every pair in a list of element specs and
print the verdict matrix (T = variants, otherwise the first failed stage).

    python3 scripts/verify_matrix.py lagrange:triangle:2 lagrange:triangle:2:gll dg:triangle:2
"""

import argparse
import json

from ciarlet.elements import parse_element
from ciarlet.span import SpanTestConfig
from ciarlet.verify import verify_variants

DEFAULT_SPECS = [
    "lagrange:interval:4:equispaced",
    "lagrange:interval:4:gll",
    "dg:interval:4",
    "lagrange:triangle:3:equispaced",
    "lagrange:triangle:3:gll",
    "dg:triangle:3",
    "rt:triangle:1",
    "n1:triangle:1",
]
SHORT = {"space_mismatch": "space", "dof_count_mismatch": "dofs", "trace_mismatch": "trace", "map_kind_mismatch": "map"}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("specs", nargs="*", default=DEFAULT_SPECS)
    parser.add_argument("--tolerance", type=float, default=1e-8)
    parser.add_argument("--json", action="store_true", help="print full reports instead of the matrix")
    args = parser.parse_args()
    cfg = SpanTestConfig(rank_rel_tolerance=args.tolerance)
    elements = [parse_element(s) for s in args.specs]
    reports = [[verify_variants(a, b, cfg) for b in elements] for a in elements]
    if args.json:
        print(json.dumps([[r.to_json() for r in row] for row in reports], indent=2))
        return
    width = max(len(s) for s in args.specs)
    print(" " * width + " " + " ".join(f"{i:>5}" for i in range(len(elements))))
    for i, (spec, row) in enumerate(zip(args.specs, reports)):
        cells = ["T" if r.result else SHORT.get(r.stage, "?") for r in row]
        print(f"{spec:>{width}} " + " ".join(f"{c:>5}" for c in cells) + f"  [{i}]")


if __name__ == "__main__":
    main()
