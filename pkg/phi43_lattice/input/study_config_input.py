from __future__ import annotations # Allow referencing enclosing class in typings
import json
import logging
import os
from typing import Any, Dict, Optional

import jsonschema

from ..errors import InvalidParameterException
from ..model.study_config import BlockObject, StudyConfig, StudyKind
from ..model.symbol import Variant


logger = logging.getLogger(__name__)

_POSITIVE_NUMBER = {'type': 'number', 'exclusiveMinimum': 0}
_POSITIVE_INTEGER = {'type': 'integer', 'minimum': 1}

STUDY_CONFIG_SCHEMA: Dict[str, Any] = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'properties': {
        'study': {'enum': [kind.value for kind in StudyKind]},
        'N_list': {'type': 'array', 'items': _POSITIVE_INTEGER, 'minItems': 1},
        'N_ref': _POSITIVE_INTEGER,
        'T': _POSITIVE_NUMBER,
        'dt': _POSITIVE_NUMBER,
        'samples': _POSITIVE_INTEGER,
        'seed': {'type': 'integer', 'minimum': 0},
        'L': _POSITIVE_NUMBER,
        'output': {'type': 'string', 'minLength': 1},
        'threads': _POSITIVE_INTEGER,
        'record_every': _POSITIVE_INTEGER,
        'galerkin_symbol_factor': _POSITIVE_NUMBER,
        'oversample': {'type': 'integer', 'minimum': 2},
        'probe_points': _POSITIVE_INTEGER,
        'block_object': {'enum': [block.value for block in BlockObject]},
        't_probe': _POSITIVE_NUMBER,
        'diagnostic_delta': _POSITIVE_NUMBER,
        'reference_variant': {'enum': [variant.value for variant in Variant]},
        'analysis.z': {'type': 'number'},
        'analysis.delta': {'type': 'number'},
        'analysis.beta': {'type': 'number'},
        'analysis.kappa': {'type': 'number'},
        'analysis.gamma': {'type': 'number'},
        'analysis.rho': {'type': 'number'}
    },
    'additionalProperties': False
}
"""Flat-key study config; every key is optional and falls back to the `StudyConfig` default."""

FLAG_KEYS = {
    'N': 'N_list',
    'N_ref': 'N_ref',
    'T': 'T',
    'dt': 'dt',
    'samples': 'samples',
    'seed': 'seed',
    'z': 'analysis.z',
    'L': 'L',
    'out': 'output',
    'threads': 'threads'
}
"""Command-line flag destination -> config key."""


class StudyConfigInput:
    """Marshalling of config files and flag overrides into a validated `StudyConfig`."""

    @classmethod
    def validate(cls, json_object: Dict[str, Any]) -> None:
        """Validate a flat-key config object.

        Raises:
            InvalidParameterException: Naming the failing key path.
        """
        try:
            jsonschema.validate(json_object, STUDY_CONFIG_SCHEMA)
        except jsonschema.ValidationError as e:
            path = '.'.join(str(part) for part in e.absolute_path) or '<root>'
            raise InvalidParameterException(f"Invalid config at '{path}': {e.message}", {'path': path})

    @classmethod
    def load_json_object(cls, path: str) -> Dict[str, Any]:
        """Read a JSON config file.

        Raises:
            InvalidParameterException: If the file is missing or not a JSON object.
        """
        if not os.path.isfile(path):
            raise InvalidParameterException(f"Config file not found: {path}", {'path': path})
        try:
            with open(path, 'r', encoding='utf-8') as file:
                json_object = json.load(file)
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidParameterException(f"Config file {path} is not readable JSON: {e}", {'path': path})
        if not isinstance(json_object, dict):
            raise InvalidParameterException(f"Config file {path} must hold a JSON object", {'path': path})
        return json_object

    @classmethod
    def to_json_object(cls, file_object: Optional[Dict[str, Any]] = None, **flags: Any) -> Dict[str, Any]:
        """Merge flag overrides (None means not given) over the file's flat-key object."""
        json_object = dict(file_object or {})
        for flag, value in flags.items():
            if value is None:
                continue
            if flag not in FLAG_KEYS:
                raise InvalidParameterException(f"Unknown override '{flag}'", {'flag': flag})
            key = FLAG_KEYS[flag]
            json_object[key] = list(value) if key == 'N_list' else value
        return json_object

    @classmethod
    def build(cls, study: StudyKind, path: Optional[str] = None, **flags: Any) -> StudyConfig:
        """Config of one subcommand: file values, then flag overrides, then the subcommand's study kind.

        Raises:
            InvalidParameterException: If the file is missing, the schema rejects it or an invariant fails.
        """
        file_object = cls.load_json_object(path) if path is not None else {}
        json_object = cls.to_json_object(file_object, **flags)
        json_object['study'] = study.value
        cls.validate(json_object)
        config = StudyConfig.from_json_object(json_object).check()
        logger.debug(f"config: {json.dumps(config.to_json_object(), sort_keys=True)}")
        return config
