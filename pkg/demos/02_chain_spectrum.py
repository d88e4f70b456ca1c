"""
Spectrum of a chain
===================

Three cells coupled by deltas, with a Robin left end. Eigenvalues come with
brackets and an integer count certificate; the finite-difference oracle
gives an independent check with its own error bar.
"""

from spectralforge.chain import NEUMANN, Cell, Delta, DirichletWall, Robin, assemble, eigenvalues_in, prufer_count
from spectralforge.fd_oracle import oracle_eigenvalues

cells = [Cell(0.5, Delta(-6.0)), Cell(0.75, Delta(2.0)), Cell(1.0, Delta(10.0))]
op = assemble(cells, [Delta(3.0), Delta(-1.5)], Robin(1.0), NEUMANN)

rep = eigenvalues_in(op, (-50.0, 120.0))
print("certified:", rep.certified, " counts:", rep.count_lower, rep.count_upper)
for e in rep.eigenvalues:
    print(f"  {e.value:16.10f}  in [{e.bracket[0]:.10f}, {e.bracket[1]:.10f}]")

# counting eigenvalues below a level needs no root finding
for lam in (0.0, 20.0, 100.0):
    print(f"below {lam:5.1f}: {prufer_count(op, lam)}")

ref = oracle_eigenvalues(op, rep.count_upper)
print("\noracle check (value, oracle, oracle error):")
for e, v, err in zip(rep.eigenvalues, ref.values[rep.count_lower :], ref.errors[rep.count_lower :]):
    print(f"  {e.value:14.8f} {v:14.8f} {err:9.1e}")

# a wall splits the chain; its spectrum is the union of the pieces
walled = assemble(cells, [DirichletWall, Delta(-1.5)], Robin(1.0), NEUMANN)
print("\nwith a wall:", eigenvalues_in(walled, (-50.0, 120.0)).values)
