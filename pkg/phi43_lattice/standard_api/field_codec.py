"""The .phf field container: one ASCII header line, then raw little-endian float64 values."""
import logging
from typing import Dict, Union

import numpy as np

from ..errors import InvalidDataException, ResultIOException
from ..model.field import LatticeField, SpectralField


logger = logging.getLogger(__name__)

MAGIC = 'PHI43FIELD'

VERSION = 'v1'

LAYOUT = 'row-major-centered'

Field = Union[SpectralField, LatticeField]


def _header(kind: str, side: int, band: int) -> bytes:
    return f"{MAGIC} {VERSION} kind={kind} side={side} band={band} layout={LAYOUT}\n".encode('ascii')

def _parse_header(line: bytes, path: str) -> Dict[str, str]:
    try:
        tokens = line.decode('ascii').split()
    except UnicodeDecodeError:
        raise ResultIOException(f"{path} is not a field container", {'path': path})
    if len(tokens) < 2 or tokens[0] != MAGIC or tokens[1] != VERSION:
        raise ResultIOException(f"{path} is not a {MAGIC} {VERSION} container", {'path': path})
    fields = dict(token.split('=', 1) for token in tokens[2:] if '=' in token)
    if fields.get('layout') != LAYOUT or fields.get('kind') not in ('spectral', 'lattice'):
        raise ResultIOException(f"Unsupported container layout in {path}", {'path': path, 'header': fields})
    return fields

def write_field(path: str, field: Field) -> None:
    """Write a spectral field (interleaved real/imag pairs) or a lattice field.

    Raises:
        ResultIOException: If the file cannot be written.
    """
    if isinstance(field, SpectralField):
        header = _header('spectral', 2 * field.band + 1, field.band)
        payload = np.ascontiguousarray(field.coeffs, dtype='<c16').view('<f8')
    else:
        header = _header('lattice', field.side, (field.side - 1) // 2)
        payload = np.ascontiguousarray(field.values, dtype='<f8')
    try:
        with open(path, 'wb') as file:
            file.write(header)
            file.write(payload.tobytes())
    except OSError as e:
        raise ResultIOException(f"Cannot write {path}: {e}", {'path': path})
    logger.debug(f"wrote {header.decode('ascii').strip()} to {path}")

def read_field(path: str) -> Field:
    """Read a container written by `write_field`.

    Raises:
        ResultIOException: If the file is missing, not a container or truncated.
    """
    try:
        with open(path, 'rb') as file:
            header = _parse_header(file.readline(), path)
            payload = file.read()
    except OSError as e:
        raise ResultIOException(f"Cannot read {path}: {e}", {'path': path})
    try:
        side = int(header['side'])
    except (KeyError, ValueError):
        raise ResultIOException(f"Missing side in {path}", {'path': path, 'header': header})
    values = np.frombuffer(payload, dtype='<f8')
    expected = side ** 3 * (2 if header['kind'] == 'spectral' else 1)
    if values.size != expected:
        raise ResultIOException(f"Payload of {path} has {values.size} values, expected {expected}", {'path': path})
    try:
        if header['kind'] == 'spectral':
            return SpectralField(values.view('<c16').reshape((side,) * 3).astype(complex))
        return LatticeField(values.reshape((side,) * 3).astype(float))
    except InvalidDataException as e:
        raise ResultIOException(f"Invalid field in {path}: {e.message}", {'path': path})
