import json

import numpy as np
import pytest

from errors import InvalidInputError
from geometry import codisk, disk, halfplane
from models import DiskSpec, MatrixSpec, RationalSpec, load_disk, load_function, load_matrix
from ratfun import RationalFunction


def _dump(tmp_path, name, model):
    path = tmp_path / name
    path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
    return path


# ---------- matrix files ----------

def test_matrix_file_roundtrip(tmp_path, rng):
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    path = _dump(tmp_path, "a.json", MatrixSpec.from_matrix(a))
    payload = json.loads(path.read_text(encoding="utf-8"))
    assert payload["n"] == 3
    assert len(payload["re"]) == 3 and len(payload["im"][2]) == 3
    assert np.allclose(load_matrix(path), a, rtol=1e-15, atol=0.0)


def test_matrix_file_without_imaginary_part(tmp_path):
    path = tmp_path / "a.json"
    path.write_text('{"n": 2, "re": [[1.0, 1.5], [0.0, 1.0]]}', encoding="utf-8")
    assert np.array_equal(load_matrix(path), np.array([[1.0, 1.5], [0.0, 1.0]], dtype=np.complex128))


def test_matrix_file_reports_bad_row(tmp_path):
    path = tmp_path / "a.json"
    path.write_text('{"n": 2, "re": [[1.0, 0.0], [0.0]]}', encoding="utf-8")
    with pytest.raises(InvalidInputError) as excinfo:
        load_matrix(path)
    assert excinfo.value.row == 1


# ---------- disk files ----------

@pytest.mark.parametrize("d", [disk(1 + 1j, 2.0), codisk(-0.5, 0.25), halfplane(0.7, -1.5)],
                         ids=["disk", "codisk", "halfplane"])
def test_disk_file_roundtrip(tmp_path, d):
    spec = DiskSpec.from_disk(d)
    assert spec.kind == d.kind
    loaded = load_disk(_dump(tmp_path, "d.json", spec))
    assert loaded.kind == d.kind
    assert np.allclose(loaded.hermitian, d.hermitian, atol=1e-12)


def test_disk_file_missing_fields(tmp_path):
    path = tmp_path / "d.json"
    path.write_text('{"kind": "halfplane", "angle": 0.0}', encoding="utf-8")
    with pytest.raises(InvalidInputError):
        load_disk(path)


# ---------- rational function files ----------

def test_laurent_function_file_roundtrip(tmp_path):
    f = RationalFunction.laurent([0.5, 0.0, 1.0 - 2.0j, 3.0], -1)
    path = _dump(tmp_path, "f.json", RationalSpec.from_function(f))
    assert json.loads(path.read_text(encoding="utf-8"))["laurent_low"] == -1
    g = load_function(path)
    assert g.is_laurent
    z = np.array([2.0, 0.5j, -1.0 + 0.3j])
    assert np.allclose(g.eval_points(z), f.eval_points(z), atol=1e-14)


def test_rational_function_file(tmp_path):
    path = tmp_path / "f.json"
    # (z + 1) / ((z - 4)(z - 1/4))
    path.write_text('{"num": [[1, 0], [1, 0]], "den": [[1, 0], [-4.25, 0], [1, 0]]}', encoding="utf-8")
    f = load_function(path)
    assert not f.is_laurent
    z = 2.0 + 0.0j
    assert complex(f.eval_points(np.array([z]))[0]) == pytest.approx((z + 1) / ((z - 4) * (z - 0.25)))


def test_function_file_rejects_bad_coefficient(tmp_path):
    path = tmp_path / "f.json"
    path.write_text('{"num": [[1, 0], [1]]}', encoding="utf-8")
    with pytest.raises(InvalidInputError):
        load_function(path)
