"""Edge-threshold and grid-size sweeps on the synthetic corpus, with a summary table.

    python3 scripts/run_sweeps.py --out runs/sweeps [--seed 0] [--jobs 4]
"""

import argparse
from pathlib import Path

from edgegrid.config import RunConfig
from edgegrid.data import generate_synthetic
from edgegrid.pipeline import corpus_windows
from edgegrid.sweeps import sweep_edge_threshold, sweep_grid_size, write_sweep_csv


def summarize(result):
    print(f"{result.axis:>15}  accuracy  selected  edge px/frame  min recall")
    for p in result.points:
        print(f"{p.value:>15g}  {p.accuracy:8.3f}  {p.n_selected:8d}  {p.mean_edge_pixels:13.1f}"
              f"  {min(p.recall):10.3f}")
    best = result.best
    print(f"best {result.axis}: {best.value:g} (accuracy {best.accuracy:.3f})\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("runs/sweeps"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()
    corpus = args.out / "corpus"
    if not (corpus / "labels.csv").exists():
        generate_synthetic(corpus, seed=args.seed)
    config = RunConfig(seed=args.seed)
    windows = corpus_windows(corpus, config)

    edge = sweep_edge_threshold(windows, config, jobs=args.jobs)
    write_sweep_csv(args.out / "sweep_edge.csv", edge)
    summarize(edge)
    grid = sweep_grid_size(windows, config, jobs=args.jobs)
    write_sweep_csv(args.out / "sweep_grid.csv", grid)
    summarize(grid)


if __name__ == "__main__":
    main()
