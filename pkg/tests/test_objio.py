import io
from types import SimpleNamespace

import numpy as np
import pytest

from dpsurf.objio import export_obj, read_obj


def _mesh(V, F):
    return SimpleNamespace(vertices=np.asarray(V, float).reshape(-1, 3),
                           faces=np.asarray(F, np.int64).reshape(-1, 3))


def test_empty_mesh_header_only():
    buf = io.StringIO()
    export_obj(_mesh([], []), buf)
    lines = buf.getvalue().splitlines()
    assert lines and all(l.startswith("#") for l in lines)


def test_single_triangle():
    buf = io.StringIO()
    export_obj(_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]]), buf)
    lines = buf.getvalue().splitlines()
    assert sum(l.startswith("v ") for l in lines) == 3
    assert [l for l in lines if l.startswith("f ")] == ["f 1 2 3"]


def test_round_trip_bit_identical(tmp_path):
    rng = np.random.default_rng(0)
    V = rng.normal(size=(50, 3)) * 10.0 ** rng.integers(-8, 8, size=(50, 3))
    F = rng.integers(0, 50, size=(30, 3))
    path = tmp_path / "m.obj"
    export_obj(_mesh(V, F), path)
    V2, F2 = read_obj(path)
    assert np.array_equal(V2, V)
    assert np.array_equal(F2, F)


def test_deterministic(tmp_path):
    m = _mesh([[0.1, 0.2, 0.3], [1, 2, 3], [4, 5, 6]], [[0, 1, 2]])
    export_obj(m, tmp_path / "a.obj")
    export_obj(m, tmp_path / "b.obj")
    assert (tmp_path / "a.obj").read_bytes() == (tmp_path / "b.obj").read_bytes()


def test_io_failure(tmp_path):
    with pytest.raises(OSError):
        export_obj(_mesh([], []), tmp_path / "missing" / "x.obj")


def test_bad_face_index():
    with pytest.raises(ValueError):
        export_obj(_mesh([[0, 0, 0]], [[0, 1, 2]]), io.StringIO())
