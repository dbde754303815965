"""
The limit period problem
========================

Each configuration determines Weierstrass data on a noded surface: one
meromorphic Gauss component and one height differential per level.  The
five families of limit period conditions all vanish exactly when the
configuration is balanced.
"""

import numpy as np

from dpsurf import Configuration, build_wei23, force_vector, limit_F, x_from_config
from dpsurf.weierstrass import f4_values, residue_a, residue_oracle

# %%
# For a balanced configuration every component is at rounding level and the
# closed-form residues agree with contour quadrature.

v = limit_F(build_wei23())
print({k: f"{x:.1e}" for k, x in v.component_max.items()}, "oracle", f"{v.oracle_deviation:.1e}")

X = x_from_config(build_wei23())
print(residue_a(X, 1, 1), residue_oracle(X, 1, 1, "a"))

# %%
# Off balance, the A-period component equals ``-4 pi i`` times the force.

c = Configuration([[1.0, 0.5j], [-1.2, 2.0 + 0.3j]], 0.1 + 0.2j)
f4 = np.concatenate(f4_values(x_from_config(c)))
print(np.max(np.abs(f4 + 4j * np.pi * force_vector(c))))
