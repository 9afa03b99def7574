"""Learn one random channel and write its rotation trace and bound overlay.

Usage: python3 scripts/trace_overlay.py [--n-t 4] [--eta 1e-4] [--sweeps 20] [--seed 0] [--out DIR]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from nslab.bounds import write_overlay_csv
from nslab.experiments import random_gram, trial_seed
from nslab.feedback import FeedbackOracle
from nslab.obnsla import Observer, run_obnsla


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-t", type=int, default=4)
    p.add_argument("--eta", type=float, default=1e-4)
    p.add_argument("--sweeps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("results/trace"))
    args = p.parse_args()

    rng = np.random.default_rng(trial_seed(args.seed, 0))
    n_r = args.n_t - 1
    G = random_gram(rng, args.n_t, n_r)
    state = run_obnsla(FeedbackOracle(G=G), args.n_t, args.eta, args.sweeps,
                       observer=Observer(G, n_r), stop_on_convergence=False)
    args.out.mkdir(parents=True, exist_ok=True)
    state.to_csv(args.out / "trace.csv")
    P = [state.sweep_P[0]] + [r.P for r in state.trace]
    write_overlay_csv(args.out / "overlay.csv", P, args.n_t, args.eta, 1.0, n_r)
    print(args.out)


if __name__ == "__main__":
    main()
