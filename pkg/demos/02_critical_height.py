"""
The critical height
===================

Heights below ``a_c`` keep the profile positive; heights above it reach zero
with negative slope. Bisection on that predicate pins down ``a_c``, where
the trajectory touches zero tangentially.
"""

from pks_selfsimilar import classify, find_critical, make_params

for d in (3, 4, 5):
    params = make_params(d)
    crit = find_critical(params, tol=1e-8)
    print(f"d = {d}: a_c in [{crit.a_lo:.10f}, {crit.a_hi:.10f}] after {crit.iterations} bisections,"
          f" touching radius {crit.R_touch:.6f}")

# The bracket seen in the classic picture at d = 3: 3 stays positive, 7 crosses.
params = make_params(3)
for a in (3.0, 7.0):
    c = classify(a, params)
    print(f"classify({a}) = {c.kind} (witness at r = {c.witness_r:.4f})")
