"""Rebuild fixtures/reference_counts.csv from the reference row-normalized matrix.

The reference rows are rounded to three decimals and do not all sum to one,
so counts are taken at a support of 10000 per class and the rounding residue
is spread one count at a time over the off-diagonal cells (largest first).
Each adjusted cell moves by fewer than 5 counts, so every normalized cell
still rounds to its reference value and the diagonal (recall) is untouched.
"""

import csv
import sys
from pathlib import Path

import numpy as np

from edgegrid.metrics import reference_matrix

SUPPORT = 10_000
OUT = Path(__file__).resolve().parents[1] / "src" / "edgegrid" / "fixtures" / "reference_counts.csv"


def integer_counts(rows, support=SUPPORT):
    counts = np.rint(rows * support).astype(np.int64)
    for r in range(len(counts)):
        residue = support - counts[r].sum()
        step = 1 if residue > 0 else -1
        off = [c for c in np.argsort(-rows[r], kind="stable") if c != r]
        k = 0
        while residue:
            counts[r, off[k % len(off)]] += step
            residue -= step
            k += 1
        assert np.all(np.abs(counts[r] - rows[r] * support) < support * 0.0005)
    return counts


def main(out=OUT):
    classes, rows = reference_matrix()
    counts = integer_counts(rows)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["true", "predicted", "count"])
        for i, t in enumerate(classes):
            for j, p in enumerate(classes):
                writer.writerow([t, p, int(counts[i, j])])
    print(f"wrote {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])
