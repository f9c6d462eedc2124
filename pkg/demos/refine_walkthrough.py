"""Refine a random graph until its partition irregularity drops below eps n^2.

Prints, per step, the number of parts, the mean square density q and the
exact irregularity, next to the increment that each step is guaranteed.
"""

import numpy as np

from regtower import WeightedGraph, regularize
from regtower.refine import step_budget


def planted_graph(n=24, seed=0):
    """Two dense communities with sparse links between them, plus noise."""
    rng = np.random.default_rng(seed)
    side = np.arange(n) < n // 2
    p = np.where(side[:, None] == side[None, :], 0.85, 0.1)
    w = (rng.random((n, n)) < p).astype(float)
    w = np.triu(w, 1)
    return WeightedGraph(w + w.T)


def main():
    g = planted_graph()
    n = g.n
    eps = 0.05
    run = regularize(g, eps, max_steps=step_budget(eps), cap=24)
    print(f"n={n}, eps={eps}, threshold eps*n^2={eps * n * n:.1f}")
    for i, (P, q, irr) in enumerate(zip(run.partitions, run.q_values, run.irreg_values)):
        line = f"step {i}: parts={len(P):3d} q={q:.5f} irreg={irr:8.3f}"
        if i:
            prev = run.irreg_values[i - 1]
            line += f"  dq={q - run.q_values[i - 1]:.5f} (guaranteed {4 * (prev / n ** 2) ** 2:.5f})"
        print(line)
    print("stopped by criterion" if run.by_criterion else "stopped at the step limit")


if __name__ == "__main__":
    main()
