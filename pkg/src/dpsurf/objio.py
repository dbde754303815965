"""Wavefront OBJ export and a minimal reader for round-trip checks."""
from __future__ import annotations

import io
import os

import numpy as np


def _write(mesh, fh, comment):
    V = np.asarray(mesh.vertices, dtype=float).reshape(-1, 3)
    F = np.asarray(mesh.faces, dtype=np.int64).reshape(-1, 3)
    if len(F) and (F.min() < 0 or F.max() >= len(V)):
        raise ValueError("faces reference vertices outside the vertex array")
    fh.write(f"# {comment}\n")
    fh.write(f"# vertices {len(V)} faces {len(F)}\n")
    # %.17g round-trips every double exactly.
    for x, y, z in V:
        fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
    for a, b, c in F + 1:
        fh.write(f"f {a} {b} {c}\n")


def export_obj(mesh, destination, comment="dpsurf near-limit mesh"):
    """Write ``mesh.vertices`` / ``mesh.faces`` as text OBJ.

    Parameters
    ----------
    mesh : object with ``vertices`` (V, 3) and ``faces`` (F, 3)
    destination : path or text stream
    comment : str
        First header line.

    Raises
    ------
    OSError
        If the destination cannot be written.
    """
    if isinstance(destination, (str, os.PathLike)):
        # Render first so a failed write never leaves a partial file behind.
        buf = io.StringIO()
        _write(mesh, buf, comment)
        with open(destination, "w", encoding="ascii", newline="\n") as fh:
            fh.write(buf.getvalue())
    else:
        _write(mesh, destination, comment)


def read_obj(source):
    """Vertices and zero-based triangle faces of an OBJ file (``v`` and ``f`` records only)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="ascii") as fh:
            lines = fh.read().splitlines()
    else:
        lines = source.read().splitlines()
    verts, faces = [], []
    for line in lines:
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return (np.array(verts, dtype=float).reshape(-1, 3),
            np.array(faces, dtype=np.int64).reshape(-1, 3))
