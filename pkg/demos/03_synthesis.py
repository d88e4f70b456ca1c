"""
Placing eigenvalues
===================

Ask for eigenvalues exactly at 3 and 7 inside the window (1, 10), with the
essential part {0}. Couplings are raised until the window structure is
certified over the whole box of strengths, then the target strengths are
tuned one at a time.
"""

from spectralforge.fd_oracle import oracle_eigenvalues
from spectralforge.synthesis import SpectralTarget, convergence_probe, escalate_beta, state_for, tune_alphas

target = SpectralTarget(intervals=(), points=(0.0,), disc=(3.0, 7.0), window=(1.0, 10.0))

state = state_for(target, n=2, tail=4)
print("lengths :", {k: round(v, 4) for k, v in state.d.items()})
print("boxes   :", {k: (round(state.alpha_minus[k], 4), round(state.alpha_plus[k], 4)) for k in state.targets})

state = escalate_beta(state, 2, tail=4)
print("escalation rounds:", state.escalation_rounds)

res = tune_alphas(state, 2, tail=4)
print("sweeps:", res.iterations)
for k, s, v, r in res.achieved:
    print(f"  cell {k}: target {s}  eigenvalue {v!r}  residual {r:.1e}")

ref = oracle_eigenvalues(res.operator, res.certificate.count_upper)
lo = res.certificate.count_lower
print("oracle:", ref.values[lo:], "+/-", ref.errors[lo:])

# the tuned strengths settle as the truncation grows
probe = convergence_probe(SpectralTarget((), (0.0,), (3.0, 5.0, 7.0), (1.0, 10.0)), [2, 4, 8])
for k in (1, 2, 3):
    print(f"drift of alpha_{k}:", ["%.1e" % x for x in probe.drift(k)])
