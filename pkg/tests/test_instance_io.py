"""Tests for instance generation, serialization and loading."""
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from riemprod.exceptions import InvalidInputError
from riemprod.geometry.curvature import is_p_tensor
from riemprod.geometry.structure import generate_structure
from riemprod.models import ClassLabel
from riemprod.services.instance_io import (
    InstanceKind,
    dump_instance,
    generate_instance,
    load_instance,
    parse_instance,
    save_instance,
)


@pytest.mark.parametrize("kind", list(InstanceKind))
def test_generated_instances_reload(kind, tmp_path):
    """Test every kind survives a save and load."""
    data = generate_instance(kind, 2, -1, 3)
    path = tmp_path / f"{kind.value}.json"
    save_instance(data, path)
    loaded = load_instance(path)
    assert loaded.data.n == 2
    assert loaded.ps.epsilon == -1
    assert_allclose(loaded.ps.g, np.asarray(data.g))


def test_generation_is_byte_identical():
    """Test equal arguments give identical serialized text."""
    a = dump_instance(generate_instance("instance", 3, 1, 8))
    b = dump_instance(generate_instance("instance", 3, 1, 8))
    assert a == b


def test_instance_kind_contents(tmp_path):
    """Test the full instance carries theta, H, lambda, mu and a P-tensor R'."""
    path = tmp_path / "full.json"
    save_instance(generate_instance(InstanceKind.INSTANCE, 2, 1, 0), path)
    raw = json.loads(path.read_text())
    assert {"theta", "H", "lambda", "mu", "Rprime"} <= set(raw)
    loaded = load_instance(path)
    assert_allclose(loaded.lee.theta, np.asarray(raw["theta"]))
    assert loaded.nabla_theta is not None
    assert is_p_tensor(loaded.data.Rprime, loaded.ps).passed


def test_structure_kind_is_minimal():
    """Test the structure kind omits optional fields."""
    raw = json.loads(dump_instance(generate_instance("structure", 2, 1, 0)))
    assert set(raw) == {"n", "epsilon", "g", "P", "seed"}


def test_ftensor_kind_omits_theta():
    """Test the F tensor instance has no theta and the requested class."""
    data = generate_instance("ftensor", 2, 1, 0, f_class=ClassLabel.W6BAR)
    assert data.theta is None
    assert data.F is not None


def test_parse_rejects_malformed_json():
    """Test broken JSON raises InvalidInputError."""
    with pytest.raises(InvalidInputError):
        parse_instance("{not json")


def test_parse_rejects_bad_shape():
    """Test a metric of the wrong size is refused."""
    doc = {"n": 2, "epsilon": 1, "g": np.eye(6).tolist(), "P": np.eye(4).tolist()}
    with pytest.raises(InvalidInputError):
        parse_instance(json.dumps(doc))


def test_parse_rejects_bad_epsilon():
    """Test epsilon must be a sign."""
    doc = {"n": 2, "epsilon": 0, "g": np.eye(4).tolist(), "P": np.diag([1.0, 1.0, -1.0, -1.0]).tolist()}
    with pytest.raises(InvalidInputError):
        parse_instance(json.dumps(doc))


def test_load_rejects_invalid_structure(tmp_path):
    """Test a structure violating the axioms is refused on load."""
    doc = {"n": 2, "epsilon": 1, "g": np.eye(4).tolist(), "P": np.diag([1.0, 1.0, 1.0, -1.0]).tolist()}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(InvalidInputError) as info:
        load_instance(path)
    assert info.value.report is not None


def _corrupted_instance(tmp_path, field, corrupt):
    data = generate_instance(InstanceKind.INSTANCE, 2, 1, 0)
    raw = json.loads(dump_instance(data))
    raw[field] = corrupt(np.asarray(raw[field])).tolist()
    path = tmp_path / f"bad_{field}.json"
    path.write_text(json.dumps(raw))
    return path


def test_load_rejects_theta_outside_eigenspace(tmp_path):
    """Test theta with a component in the wrong eigenspace of P is refused on load."""
    ps = generate_structure(2, 1, 0)
    wrong = ps.frame[:, -1] @ ps.g
    path = _corrupted_instance(tmp_path, "theta", lambda theta: theta + wrong)
    with pytest.raises(InvalidInputError) as info:
        load_instance(path)
    assert info.value.report is not None


def test_load_rejects_non_symmetric_H(tmp_path):
    """Test an H that is not symmetric is refused on load."""
    def skew(H):
        H = H.copy()
        H[0, 1] += 1.0
        return H

    path = _corrupted_instance(tmp_path, "H", skew)
    with pytest.raises(InvalidInputError) as info:
        load_instance(path)
    assert info.value.report is not None


def test_load_without_theta_or_H(tmp_path):
    """Test a bare structure loads with no Lee data and no H."""
    path = tmp_path / "s.json"
    save_instance(generate_instance(InstanceKind.STRUCTURE, 2, -1, 1), path)
    loaded = load_instance(path)
    assert loaded.lee is None
    assert loaded.nabla_theta is None


def test_load_missing_file(tmp_path):
    """Test a missing file is an input error."""
    with pytest.raises(InvalidInputError):
        load_instance(tmp_path / "absent.json")


def test_lambda_alias():
    """Test lambda is read and written under its JSON name."""
    doc = {
        "n": 2, "epsilon": 1, "g": np.eye(4).tolist(), "P": np.diag([1.0, 1.0, -1.0, -1.0]).tolist(),
        "lambda": 0.25, "mu": -0.5,
    }
    data = parse_instance(json.dumps(doc))
    assert data.lam == 0.25
    assert json.loads(dump_instance(data))["lambda"] == 0.25
