"""Peak basis-function size and Lebesgue constant for equispaced and GLL
Lagrange points on the interval, by degree.

    python3 scripts/runge.py --max-degree 12 --samples 1000
"""

import argparse

import numpy as np

from ciarlet.elements import make_family, tabulate


def measure(k: int, samples: int) -> dict:
    x = np.linspace(0.0, 1.0, samples)[:, None]
    row = {"k": k}
    for variant in ("equispaced", "gll"):
        vals = tabulate(make_family("lagrange", "interval", k, variant), x)[:, :, 0]
        row[f"{variant}_peak"] = float(np.abs(vals).max())
        row[f"{variant}_lebesgue"] = float(np.abs(vals).sum(axis=1).max())
    row["peak_ratio"] = row["equispaced_peak"] / row["gll_peak"]
    row["lebesgue_ratio"] = row["equispaced_lebesgue"] / row["gll_lebesgue"]
    return row


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-degree", type=int, default=12)
    parser.add_argument("--samples", type=int, default=1000)
    args = parser.parse_args()
    cols = ["k", "equispaced_peak", "gll_peak", "peak_ratio", "equispaced_lebesgue", "gll_lebesgue", "lebesgue_ratio"]
    print(",".join(cols))
    for k in range(1, args.max_degree + 1):
        row = measure(k, args.samples)
        print(",".join(str(row["k"]) if c == "k" else f"{row[c]:.6g}" for c in cols))


if __name__ == "__main__":
    main()
