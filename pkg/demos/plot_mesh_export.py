"""
A near-limit mesh
=================

For a small gluing parameter ``r = exp(-1/t**2)`` the surface is a stack of
flat levels joined by thin catenoidal necks.  ``assemble_surface`` builds one
fundamental piece, reports how well it closes up and writes an OBJ file.
"""

import tempfile
from pathlib import Path

from dpsurf import MeshParams, assemble_surface, build_handles, export_obj

mesh = assemble_surface(build_handles(1), MeshParams(t=0.25, sigma=0.3, copies=2))
d = mesh.diagnostics

# %%
# Level heights step by ``log(r) / n_k`` and every neck waist has length
# ``2 pi / n_k``.

print("level heights", d["level_heights"])
print("waists", {k: round(w["circumference"], 12) for k, w in d["neck_waists"].items()})

# %%
# Translating by either period maps the mesh onto its neighbouring copy.

print("horizontal tiling error (rescaled)", d["tiling"]["horizontal_error_rescaled"])
print("vertical period error", d["vertical_period_relative_error"])
print("topology", d["topology"])

out = Path(tempfile.gettempdir()) / "handles1.obj"
export_obj(mesh, out)
print(out, out.stat().st_size, "bytes")
