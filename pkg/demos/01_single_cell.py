"""
One cell, one delta
===================

A unit interval with Dirichlet ends and a delta of strength alpha at its
centre. The lowest eigenvalue moves monotonically with alpha; the second
one sits at (2 pi / d)^2 whatever alpha is, because its eigenfunction
vanishes at the centre.
"""

import math

import numpy as np

from spectralforge.chain import NEUMANN, single_cell, lowest_eigenvalues
from spectralforge.closed_forms import eval_fd, solve_lambda_d

d = 1.0
print("alpha      lowest (solver)     lowest (closed form)   second")
for alpha in (-20.0, -4.0, 0.0, 4.0, 50.0):
    ev = lowest_eigenvalues(single_cell(d, alpha), 2)
    print(f"{alpha:6.1f}  {ev[0]:18.12f}  {solve_lambda_d(alpha, d):20.12f}  {ev[1]:10.6f}")

# alpha = -4/d puts the lowest eigenvalue exactly at zero
print("\nF(d, 0) =", eval_fd(d, 0.0))

# the map alpha -> lowest eigenvalue, sampled
alphas = np.linspace(-30, 30, 7)
lams = [solve_lambda_d(a, d) for a in alphas]
print("\nincreasing:", all(np.diff(lams) > 0), " upper bound:", (2 * math.pi / d) ** 2)

# Neumann ends: the second eigenvalue is pinned at (pi / d)^2 instead
print("Neumann, alpha=3:", lowest_eigenvalues(single_cell(d, 3.0, NEUMANN), 2))
