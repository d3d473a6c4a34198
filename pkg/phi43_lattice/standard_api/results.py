"""Versioned result files: CSV tables with a schema-version header and a run manifest."""
from abc import ABC
import csv
from enum import Enum
from importlib import metadata
import json
import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np

from .. import utils
from ..errors import ResultIOException
from ..model.renorm import RenormConstants
from ..model.study_result import StudyResult, StudyTable
from ..stochastic.noise import RNG_SCHEME


SCHEMA_VERSION = 1

SCHEMA_HEADER = f"# schema-version: {SCHEMA_VERSION}"

MANIFEST_NAME = 'manifest.json'

PACKAGE_NAME = 'phi43-lattice'


class ResultStatus(Enum):
    SUCCESS = 'success'
    ERROR = 'error'


def package_version() -> str:
    try:
        return metadata.version(PACKAGE_NAME)
    except metadata.PackageNotFoundError:
        return 'unknown'

def _to_builtin(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


class ResultBase(ABC):

    def __init__(self, directory: str) -> None:
        super().__init__()
        self._logger = logging.getLogger(__name__)
        self.directory = directory

    def _json_dumps(self, obj: Any, indent: int = 2) -> str:
        return json.dumps(obj, indent=indent, sort_keys=True, default=_to_builtin)

    def _json_loads(self, obj: str) -> Any:
        return json.loads(obj)

    def path(self, name: str) -> str:
        return os.path.join(self.directory, name)


class ResultWriter(ResultBase):
    """Writes the tables and manifest of a study into one output directory."""

    def _open(self, name: str):
        try:
            os.makedirs(self.directory, exist_ok=True)
            return open(self.path(name), 'w', encoding='utf-8', newline='')
        except OSError as e:
            raise ResultIOException(f"Cannot write {self.path(name)}: {e}", {'path': self.path(name)})

    def write_table(self, table: StudyTable) -> str:
        name = f"{table.name}.csv"
        with self._open(name) as file:
            file.write(SCHEMA_HEADER + '\n')
            writer = csv.writer(file, lineterminator='\n')
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([_to_builtin(value) if isinstance(value, np.generic) else value for value in row])
        self._logger.debug(f"wrote {len(table)} rows to {self.path(name)}")
        return self.path(name)

    def write_constants(self, constants: List[RenormConstants], name: str = 'constants') -> str:
        return self.write_table(StudyTable(name, RenormConstants.columns(), [consts.to_row() for consts in constants]))

    def write_manifest(self, result: Optional[StudyResult], config: Dict[str, Any], status: ResultStatus = ResultStatus.SUCCESS, error: Optional[Dict[str, Any]] = None) -> str:
        manifest = {
            'status': status.value,
            'config': config,
            'version': package_version(),
            'rngScheme': RNG_SCHEME,
            'schemaVersion': SCHEMA_VERSION,
            'timestamp': utils.to_iso_time_format(utils.datetime_utc_now()),
            'data': result.to_json_object() if result is not None else None,
            'error': error
        }
        serialized = self._json_dumps(manifest)
        with self._open(MANIFEST_NAME) as file:
            file.write(serialized + '\n')
        self._logger.info(f"--- Result manifest ---\n"
                          f"- Path: {self.path(MANIFEST_NAME)}\n"
                          f"- Status: {status.value}\n")
        return self.path(MANIFEST_NAME)

    def write_result(self, result: StudyResult) -> List[str]:
        """Every table of `result`, then the manifest (written last, so its presence marks a complete run)."""
        paths = [self.write_table(table) for table in result.tables]
        paths.append(self.write_manifest(result, result.config.to_json_object()))
        return paths


class ResultReader(ResultBase):
    """Reads back what `ResultWriter` wrote; values come back as strings keyed by column."""

    def read_table(self, name: str) -> List[Dict[str, str]]:
        """Rows of `<name>.csv`.

        Raises:
            ResultIOException: If the file is missing or its schema version is not supported.
        """
        path = self.path(name if name.endswith('.csv') else f"{name}.csv")
        try:
            with open(path, 'r', encoding='utf-8', newline='') as file:
                header = file.readline().rstrip('\n')
                if header != SCHEMA_HEADER:
                    raise ResultIOException(f"Unsupported table header in {path}", {'path': path, 'header': header})
                return list(csv.DictReader(file))
        except OSError as e:
            raise ResultIOException(f"Cannot read {path}: {e}", {'path': path})

    def read_constants(self, name: str = 'constants') -> List[RenormConstants]:
        return [RenormConstants.from_row(row) for row in self.read_table(name)]

    def read_manifest(self) -> Dict[str, Any]:
        """Manifest contents with `timestamp` parsed to a timezone aware datetime.

        Raises:
            ResultIOException: If the file is missing, is not JSON or carries an invalid timestamp.
        """
        path = self.path(MANIFEST_NAME)
        try:
            with open(path, 'r', encoding='utf-8') as file:
                manifest = self._json_loads(file.read())
            manifest['timestamp'] = utils.parse_iso_time_format(manifest.get('timestamp'))
            return manifest
        except (OSError, json.JSONDecodeError, ValueError) as e:
            raise ResultIOException(f"Cannot read {path}: {e}", {'path': path})
