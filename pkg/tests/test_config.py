import json
import math

import pytest

from phi43_lattice.errors import InvalidParameterException
from phi43_lattice.input.study_config_input import StudyConfigInput
from phi43_lattice.model.analysis import AnalysisParams
from phi43_lattice.model.study_config import BlockObject, StudyConfig, StudyKind
from phi43_lattice.model.symbol import Variant


def _write(tmp_path, json_object):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(json_object))
    return str(path)


def test_defaults_are_admissible():
    config = StudyConfig().check()
    assert config.galerkin_symbol_factor == pytest.approx(math.pi ** 2)
    assert config.steps == 500
    assert AnalysisParams().violations() == []

def test_analysis_violations_are_listed():
    params = AnalysisParams(z=0.7, delta=0.001, kappa=0.01)
    violated = params.violations()
    assert "1/2 < z < 2/3" in violated
    assert "delta > 2 kappa" in violated
    with pytest.raises(InvalidParameterException):
        params.check()

@pytest.mark.parametrize('overrides', [
    {'N_list': []},
    {'N_ref': 0},
    {'dt': 0.5, 'T': 0.1},
    {'samples': 0},
    {'threads': 0},
    {'oversample': 1},
    {'probe_points': 0},
    {'L': 0.0}
])
def test_check_rejects_inconsistent_configs(overrides):
    with pytest.raises(InvalidParameterException):
        StudyConfig(**overrides).check()

def test_flat_keys_round_trip():
    config = StudyConfig.from_json_object({'study': 'block-variance', 'N_list': [3], 'analysis.kappa': 0.005,
                                           'block_object': 'wick2_diff', 'reference_variant': 'lattice'})
    assert config.study == StudyKind.BLOCK_VARIANCE
    assert config.analysis.kappa == 0.005
    assert config.analysis.z == 0.6
    assert config.block_object == BlockObject.WICK2_DIFF
    assert config.reference_variant == Variant.LATTICE
    again = StudyConfig.from_json_object(config.to_json_object())
    assert again.to_json_object() == config.to_json_object()

def test_build_merges_file_and_flags(tmp_path):
    path = _write(tmp_path, {'N_list': [2, 4], 'N_ref': 8, 'samples': 5, 'analysis.z': 0.605})
    config = StudyConfigInput.build(StudyKind.CONVERGE, path, N=[1, 2], samples=None, seed=3)
    assert config.N_list == [1, 2]
    assert config.N_ref == 8
    assert config.samples == 5
    assert config.seed == 3
    assert config.analysis.z == 0.605

def test_build_sets_the_study_kind(tmp_path):
    path = _write(tmp_path, {'study': 'converge'})
    assert StudyConfigInput.build(StudyKind.OU_LAW, path).study == StudyKind.OU_LAW

def test_z_flag_reaches_the_analysis():
    config = StudyConfigInput.build(StudyKind.SIMULATE, z=0.55)
    assert config.analysis.z == 0.55

def test_missing_file(tmp_path):
    with pytest.raises(InvalidParameterException, match="Config file not found"):
        StudyConfigInput.build(StudyKind.CONVERGE, str(tmp_path / 'absent.json'))

def test_malformed_file(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text("{not json")
    with pytest.raises(InvalidParameterException):
        StudyConfigInput.load_json_object(str(path))

@pytest.mark.parametrize('json_object, key', [
    ({'N_list': [0]}, 'N_list.0'),
    ({'dt': -1.0}, 'dt'),
    ({'unknown': 1}, '<root>'),
    ({'block_object': 'u4_diff'}, 'block_object')
])
def test_schema_names_the_failing_key(json_object, key):
    with pytest.raises(InvalidParameterException) as info:
        StudyConfigInput.validate(json_object)
    assert info.value.data['path'] == key

def test_unknown_override():
    with pytest.raises(InvalidParameterException):
        StudyConfigInput.to_json_object({}, colour='blue')

def test_inadmissible_exponent_from_flags():
    with pytest.raises(InvalidParameterException):
        StudyConfigInput.build(StudyKind.SIMULATE, z=0.7)
