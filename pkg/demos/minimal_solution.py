"""Decaying solution of -Delta H + V H = 0 against its closed form and its Agmon asymptotics."""

import numpy as np

from choquard.agmon import LinearProblem, minimal_solution

# V = 1 in three dimensions: H is a multiple of exp(-r) / r
S = minimal_solution(LinearProblem(3, 0.0, 1.0), 50)
g = S.profile.grid
ratio = np.exp(S.log_values) * g * np.exp(g)
print(f"Yukawa check: max |ratio / ratio(1) - 1| = {np.max(np.abs(ratio / ratio[0] - 1)):.2e}")

# V = |x|^-1 - 0.1 |x|^-2: normalised ratio tends to 1
S = minimal_solution(LinearProblem(3, 1.0, 1.0, 0.1, 2.0), 1e3)
for r in (10, 30, 100, 300, 1000):
    print(f"r = {r:5d}  normalised ratio = {float(S.normalized_ratio(np.array([r]))[0]):.5f}")
