"""
Balanced configurations
=======================

A configuration is a list of levels, each holding a few nonzero complex
points.  It is *balanced* when every force vanishes.  This script builds the
catalog examples, checks their forces and asks the Jacobian whether each one
is non-degenerate.
"""

import numpy as np

from dpsurf import (build_alternating, build_handles, build_wei23, combine, force_jacobian,
                    force_report, genus, solve_balance)

# %%
# The simplest balanced family puts a single point on every level with
# alternating sign.  The forces cancel exactly in floating point.

for N in (2, 4, 6, 8):
    c = build_alternating(N)
    print(f"alternating({N}): residual {force_report(c).residual_norm:.1e}, genus {genus(c)}")

# %%
# Handles come from the roots of the hypergeometric polynomial
# ``sum C(n, k)**2 z**k``.  The residual sits at rounding level and the rank
# equals ``m - 1``, the most a scale-invariant map can reach.

for n in (1, 4, 8):
    c = build_handles(n)
    rep = force_jacobian(c)
    print(f"handles({n}): residual {force_report(c).residual_norm:.1e}, "
          f"rank {rep.rank} of {rep.m - 1}, gap {rep.gap:.1e}")

# %%
# Wei's genus-four example has explicit radical coordinates.

w = build_wei23()
print(w.levels[0], w.levels[1], sep="\n")
print("genus", genus(w), "rank", force_jacobian(w).rank)

# %%
# Two configurations whose first level is a single point can be stacked.
# The result is balanced again and its rank adds up.

c = combine(build_handles(2), build_handles(3))
print(c.counts, f"residual {force_report(c).residual_norm:.1e}", "rank", force_jacobian(c).rank)

# %%
# Newton's method with ``p[1,1]`` held fixed recovers a configuration from a
# perturbed start.

rng = np.random.default_rng(1)
exact = build_handles(4)
p = exact.flat()
p[1:] *= 1 + 1e-2 * (rng.normal(size=len(p) - 1) + 1j * rng.normal(size=len(p) - 1))
out = solve_balance(exact.with_flat(p))
print(f"converged in {out.iterations} iterations, residual history {np.array(out.history)}")
