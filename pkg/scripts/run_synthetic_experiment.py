"""Generate the synthetic corpus and run the file-based pipeline end to end.

    python3 scripts/run_synthetic_experiment.py --out runs/synthetic [--seed 0]

Writes corpus/, features.csv, subset.txt, model.txt, predictions.csv and
eval/{confusion.csv,metrics.txt} under --out, using the CLI's subcommands so
every intermediate artifact stays on disk.
"""

import argparse
import sys
from pathlib import Path

from edgegrid.cli import main as cli


def run_stage(*argv):
    code = cli([str(a) for a in argv])
    if code:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("runs/synthetic"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--search-c", type=float, nargs="*", default=None,
                        help="candidate C values for grouped CV (default: fixed C=0.4)")
    args = parser.parse_args()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    seed = ["--seed", args.seed]

    run_stage("synth", "--out", out / "corpus", *seed)
    run_stage("extract", "--corpus", out / "corpus", "--out", out / "features.csv", "--jobs", args.jobs)
    run_stage("select", "--features", out / "features.csv", "--out", out / "subset.txt", *seed)
    train = ["train", "--features", out / "features.csv", "--subset", out / "subset.txt",
             "--out", out / "model.txt", *seed]
    if args.search_c:
        train += ["--search-c", *args.search_c]
    run_stage(*train)
    run_stage("predict", "--model", out / "model.txt", "--features", out / "features.csv",
              "--out", out / "predictions.csv", "--split", "test", *seed)
    run_stage("evaluate", "--model", out / "model.txt", "--features", out / "features.csv",
              "--out-dir", out / "eval", *seed)
    n_selected = len((out / "subset.txt").read_text().split()) - 2
    print(f"selected features: {n_selected}")
    print((out / "eval" / "metrics.txt").read_text(), end="")


if __name__ == "__main__":
    main()
