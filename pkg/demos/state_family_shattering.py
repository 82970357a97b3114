"""Pseudo-dimension grows at least exponentially in the number of qubits.

For each subset C of the 2^n points x0, the state |psi_C> is uniform over C.
Thresholds 1/2^n separate every pattern, so 2^n points are shattered. For
n = 1, 2 the states are prepared by explicit 2-local circuits and compared
against the pseudo-dimension upper bound for their size.

    python3 demos/state_family_shattering.py
"""
from __future__ import annotations

import time

from qpdim.shattering import is_pseudo_shattered, verify_witness
from qpdim.state_family import family_thresholds, shattering_consistency, state_family_functions

for n in range(1, 5):
    t0 = time.perf_counter()
    table = state_family_functions(n)
    res = is_pseudo_shattered(table, None, family_thresholds(n))
    print(f"n={n}: {table.n_functions} functions on {table.n_points} points, "
          f"shattered={res.shattered}, witness ok={verify_witness(table, res)}, "
          f"{time.perf_counter() - t0:.2f}s")

for n in (1, 2):
    info = shattering_consistency(n)
    print(f"circuits for n={n}: size {info['gamma']}, depth {info['delta']}, "
          f"{info['points']} points shattered <= bound {info['bound']:.1f}")
