"""Real-data-shaped pipeline: ingest a survey CSV and compare rankings.

Uses the bundled synthetic survey sample (every user compares all pairs of a
small item set), ingests it through the raw-CSV schema, and reports how far
the private rankings drift from their non-private counterparts as epsilon
shrinks. Run `python demos/real_data_pipeline.py` from the repository root.
"""

import math
import pathlib

import numpy as np

from dpranking.harness import ingest, real_data_eval

DATA = pathlib.Path(__file__).resolve().parent.parent / "data" / "cems_synthetic.csv"


def main():
    data = ingest(str(DATA), mode="individual")
    print(f"ingested {data.m} users x {data.L} comparisons over "
          f"{data.n} items: {', '.join(data.item_names())}")

    records = real_data_eval(data, [0.5, 1.0, 2.5, math.inf],
                             trials=100, seed=0)
    print(f"\n{'epsilon':>8} {'median rank drift (MLE)':>24} "
          f"{'median rank drift (counts)':>27}")
    for eps in (0.5, 1.0, 2.5, math.inf):
        row = []
        for algo in ("parametric", "nonparametric"):
            vals = [r.value for r in records
                    if r.algorithm == algo and r.epsilon == eps]
            row.append(np.median(vals))
        tag = "inf" if math.isinf(eps) else f"{eps:g}"
        print(f"{tag:>8} {row[0]:24.3f} {row[1]:27.3f}")

    print("\nAt eps=inf both algorithms reproduce their references exactly;")
    print("rank drift grows as the privacy budget tightens.")


if __name__ == "__main__":
    main()
