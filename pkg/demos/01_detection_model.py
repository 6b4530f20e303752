"""A tour of the detection model's moving parts.

A bug's eventual size is the number of inputs that would ever cross it.
Big bugs sit on busy paths and get caught early; tiny bugs hide.  This
script pokes at each kernel with concrete numbers before any sampling
enters the picture.
"""

import numpy as np

from bugsize import (
    bug_log_likelihood,
    cell_probabilities,
    detection_prob,
    phase_detection_prob,
)

print("=== per-cell detection probability, 1 - exp(-test_cases) ===")
for t in (0, 1, 5, 20, 50):
    print(f"  {t:3d} test cases -> {phase_detection_prob(t):.6f}")

print()
print("=== normalized cell probabilities for a 2x3 campaign ===")
test_cases = np.array([[40, 10, 0], [25, 5, 15]])
cells = cell_probabilities(test_cases)
print(np.array_str(cells, precision=4))
print(f"  grid sums to {cells.sum():.12f}; the zero-effort cell gets 0")

print()
print("=== size-driven detection kernel, 1 - exp(-size**nu / t_max) ===")
t_max = test_cases.max()
print(f"  t_max = {t_max}")
for nu in (1.0, 1.25, 1.5):
    row = [f"{detection_prob(s, nu, t_max):.4f}" for s in (1, 5, 20, 50, 100)]
    print(f"  nu={nu:<5} size 1/5/20/50/100 -> {row}")
print("  larger bugs are found almost surely; size-1 bugs usually survive")

print()
print("=== one candidate's outcome distribution is a proper categorical ===")
size = 30
total = np.exp(bug_log_likelihood(None, True, size, cells, 1.5, t_max))
print(f"  P(never detected | size={size}) = {total:.4f}")
for j in range(2):
    for k in range(3):
        if cells[j, k] > 0:
            p = np.exp(bug_log_likelihood((j, k), True, size, cells, 1.5, t_max))
            total += p
print(f"  summed over all outcomes: {total:.12f}")
