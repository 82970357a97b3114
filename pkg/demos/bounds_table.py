"""How the pseudo-dimension and sample-size bounds scale with circuit size.

    python3 demos/bounds_table.py
"""
from __future__ import annotations

from qpdim.bounds import bound_fixed, bound_operations, bound_variable, sample_complexity

print(f"{'gamma':>6} {'fixed':>12} {'variable':>12} {'operations':>14}")
for gamma in (1, 2, 4, 8, 16, 32):
    delta = max(1, gamma // 2)
    n = 2 * gamma
    print(f"{gamma:>6} {bound_fixed(2, gamma):>12.1f} {bound_variable(2, gamma, delta, n):>12.1f} "
          f"{bound_operations(2, gamma, delta, n):>14.1f}")

print("\nsample size for Gamma=2, Delta=2, d=2, alpha=0.05, beta=0.2, confidence 0.05:")
for eps in (0.2, 0.1, 0.05):
    print(f"  eps={eps}: m = {sample_complexity(2, 2, 2, eps, 0.05, 0.05, 0.2):,}")
print("These worst-case sizes are far beyond what the desk-scale experiment needs;"
      " see demos/learning_curve.py.")
