"""
Essential spectrum from decoupled cells
=======================================

Generator cells carry values that visit {0} and [1, 2] densely. With walls
between all cells, the spectrum is the union of single-cell spectra, so the
window eigenvalues pile up on the requested set.
"""

import numpy as np

from spectralforge.chain import eigenvalues_in
from spectralforge.synthesis import SpectralTarget, build_state, decoupled_truncation, generate_ess_sequence

target = SpectralTarget(intervals=((1.0, 2.0),), points=(0.0,), disc=(2.5,), window=(0.5, 3.0))
print("first generator values:", generate_ess_sequence(target, 12, window=target.window))

st = build_state(target, -199, 1, decay=0.98)
op = decoupled_truncation(st, 200)
vals = np.array(eigenvalues_in(op, (-1.0, 8.0)).values)
print("eigenvalues found:", len(vals))

hist, edges = np.histogram(vals, bins=np.arange(-0.25, 3.01, 0.25))
for h, a in zip(hist, edges):
    print(f"  [{a:5.2f}, {a + 0.25:5.2f})  {'#' * min(h, 60)}")

mesh = np.concatenate([[0.0], np.arange(1.0, 2.0001, 0.05)])
print("worst distance from the set to an eigenvalue:", max(np.abs(vals - x).min() for x in mesh))
