import json

import numpy as np
import pytest

from phi43_lattice.errors import ResultIOException
from phi43_lattice.lattice_spectral import dft_inverse
from phi43_lattice.model.field import LatticeField
from phi43_lattice.model.renorm import RenormConstants
from phi43_lattice.model.study_config import StudyConfig, StudyKind
from phi43_lattice.model.study_result import StudyResult, StudyTable
from phi43_lattice.standard_api.field_codec import read_field, write_field
from phi43_lattice.standard_api.results import MANIFEST_NAME, SCHEMA_HEADER, ResultReader, ResultStatus, ResultWriter
from phi43_lattice.stochastic.noise import RNG_SCHEME
from phi43_lattice import utils


def test_spectral_field_container(tmp_path, random_field):
    spec = random_field(3)
    path = str(tmp_path / 'phi.phf')
    write_field(path, spec)
    with open(path, 'rb') as file:
        assert file.readline() == b"PHI43FIELD v1 kind=spectral side=7 band=3 layout=row-major-centered\n"
    np.testing.assert_array_equal(read_field(path).coeffs, spec.coeffs)

def test_lattice_field_container(tmp_path, random_field):
    field = dft_inverse(random_field(2))
    path = str(tmp_path / 'phi.phf')
    write_field(path, field)
    again = read_field(path)
    assert isinstance(again, LatticeField)
    assert again.grid.N == 2
    np.testing.assert_array_equal(again.values, field.values)

def test_container_rejects_foreign_files(tmp_path):
    path = tmp_path / 'other.phf'
    path.write_bytes(b"NOT A FIELD\n" + bytes(16))
    with pytest.raises(ResultIOException):
        read_field(str(path))

def test_container_rejects_truncated_payload(tmp_path, random_field):
    path = tmp_path / 'phi.phf'
    write_field(str(path), random_field(1))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ResultIOException):
        read_field(str(path))

def test_container_rejects_missing_file(tmp_path):
    with pytest.raises(ResultIOException):
        read_field(str(tmp_path / 'missing.phf'))

def test_tables_carry_the_schema_header(tmp_path):
    writer = ResultWriter(str(tmp_path / 'out'))
    path = writer.write_table(StudyTable('convergence', ['N', 'median'], [[2, 0.5], [4, np.float64(0.25)]]))
    with open(path) as file:
        assert file.readline().strip() == SCHEMA_HEADER
        assert file.readline().strip() == 'N,median'
    rows = ResultReader(str(tmp_path / 'out')).read_table('convergence')
    assert rows == [{'N': '2', 'median': '0.5'}, {'N': '4', 'median': '0.25'}]

def test_reader_rejects_unversioned_tables(tmp_path):
    (tmp_path / 'plain.csv').write_text("N,median\n2,0.5\n")
    with pytest.raises(ResultIOException):
        ResultReader(str(tmp_path)).read_table('plain')

def test_constants_table_round_trip(tmp_path):
    consts = RenormConstants(3, 0.5, 0.1, 0.2, 0.05, {triple: 0.001 * i for i, triple in enumerate(utils.nonzero_triples())})
    ResultWriter(str(tmp_path)).write_constants([consts])
    again = ResultReader(str(tmp_path)).read_constants()[0]
    assert again.N == 3
    assert again.C1 == pytest.approx(consts.C1)
    assert again.C12 == pytest.approx(consts.C12)

def test_manifest_records_run(tmp_path):
    config = StudyConfig(StudyKind.RENORM_SCALING, N_list=[1], output=str(tmp_path))
    result = StudyResult(config, [StudyTable('scaling', ['N'], [[1]])], {'verdict': True, 'value': np.float64(1.5)})
    paths = ResultWriter(str(tmp_path)).write_result(result)
    assert paths[-1].endswith(MANIFEST_NAME)
    manifest = ResultReader(str(tmp_path)).read_manifest()
    assert manifest['status'] == 'success'
    assert manifest['rngScheme'] == RNG_SCHEME
    assert manifest['schemaVersion'] == 1
    assert manifest['config']['N_list'] == [1]
    assert manifest['data']['summary'] == {'verdict': True, 'value': 1.5}
    assert manifest['error'] is None
    assert manifest['timestamp'].tzinfo is not None
    assert abs((utils.datetime_utc_now() - manifest['timestamp']).total_seconds()) < 60.0

def test_error_manifest(tmp_path):
    ResultWriter(str(tmp_path)).write_manifest(None, {'study': 'converge'}, ResultStatus.ERROR, {'exception': 'X', 'message': 'm', 'data': {}})
    with open(tmp_path / MANIFEST_NAME) as file:
        manifest = json.load(file)
    assert manifest['status'] == 'error'
    assert manifest['data'] is None
    assert manifest['error']['message'] == 'm'

def test_missing_manifest(tmp_path):
    with pytest.raises(ResultIOException):
        ResultReader(str(tmp_path)).read_manifest()

def test_manifest_with_invalid_timestamp(tmp_path):
    with open(tmp_path / MANIFEST_NAME, 'w') as file:
        json.dump({'status': 'success', 'timestamp': 'yesterday'}, file)
    with pytest.raises(ResultIOException):
        ResultReader(str(tmp_path)).read_manifest()
