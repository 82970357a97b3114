"""Learn a random 3-qubit circuit (two gates, depth two) from examples.

For each training-set size, fit a hypothesis of the same architecture class
by empirical risk minimization and measure the exact probability, over the
basis distribution, that it is off by more than beta. A few seeds keep this
under a minute; the acceptance suite runs twenty.

    python3 demos/learning_curve.py [n_seeds]
"""
from __future__ import annotations

import sys

import numpy as np

from qpdim.learner import LearningConfig, generalization_experiment

n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 4
cfg = LearningConfig(seeds=list(range(n_seeds)), m_grid=[10, 25, 50, 100], restarts=30)
rows = generalization_experiment(cfg)
print(f"{'m':>5} {'fit ok':>7} {'median test error':>18}")
for m in cfg.m_grid:
    sel = [r for r in rows if r.m == m]
    ok = [r.test_err for r in sel if r.success]
    med = np.median(ok) if ok else float("nan")
    print(f"{m:>5} {len(ok):>3}/{len(sel):<3} {med:>18.3f}")
