from datetime import datetime, timezone
from itertools import product
from typing import List, Optional, Tuple, overload

import numpy as np
from dateutil import parser


Triple = Tuple[int, int, int]


@overload
def parse_iso_time_format(iso: str) -> datetime: ...
@overload
def parse_iso_time_format(iso: None) -> None: ...
def parse_iso_time_format(iso: Optional[str]) -> Optional[datetime]:
    """Parse valid in ISO 8601 format strings into timezone aware datetime objects.

    Args:
        iso (Optional[str]): Timestamp string in ISO 8601 format.

    Returns:
        Optional[datetime]: Datetime.
    """
    if iso is None:
        return None
    time = parser.isoparse(iso)
    if time.tzinfo is None:
        time = time.replace(tzinfo=timezone.utc)
    return time

@overload
def to_iso_time_format(time: datetime) -> str: ...
@overload
def to_iso_time_format(time: None) -> None: ...
def to_iso_time_format(time: Optional[datetime]) -> Optional[str]:
    """Return ISO 8601 format timestamp string with Zulu ('Z') for UTC offsets.

    Args:
        time (Optional[datetime]): Datetime

    Returns:
        Optional[str]: ISO 8601 timestamp.
    """
    return time.isoformat().replace("+00:00", "Z") if time is not None else None

def datetime_utc_now() -> datetime:
    """Returns the current time as timezone aware datetime object with timezone UTC.

    Returns:
        datetime: Datetime.
    """
    return datetime.now(timezone.utc)

def nonzero_triples() -> List[Triple]:
    """The 26 index triples (i1,i2,i3) in {-1,0,1}^3 without (0,0,0), in lexicographic order.

    Returns:
        List[Triple]: Triples.
    """
    return [triple for triple in product((-1, 0, 1), repeat=3) if triple != (0, 0, 0)]

def triple_label(triple: Triple) -> str:
    """Column label of a triple, e.g. 'C12[-1 0 1]'."""
    return "C12[" + " ".join(str(i) for i in triple) + "]"

def frequency_axis(band: int) -> np.ndarray:
    """Integer frequencies -band..band along one axis of a centered cube."""
    return np.arange(-band, band + 1)

def frequency_grid(band: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Broadcastable frequency components (k1, k2, k3) of the centered cube {-band..band}^3."""
    axis = frequency_axis(band)
    return axis[:, None, None], axis[None, :, None], axis[None, None, :]

def frequency_sup_norm(band: int) -> np.ndarray:
    """|k|_inf on the centered cube."""
    k1, k2, k3 = frequency_grid(band)
    return np.maximum(np.maximum(np.abs(k1), np.abs(k2)), np.abs(k3))

def frequency_square_norm(band: int) -> np.ndarray:
    """|k|^2 on the centered cube."""
    k1, k2, k3 = frequency_grid(band)
    return (k1 ** 2 + k2 ** 2 + k3 ** 2).astype(float)

def embed_centered(coeffs: np.ndarray, band: int) -> np.ndarray:
    """Zero-pad (or crop) a centered cube of coefficients to the centered cube of the given band."""
    old_band = (coeffs.shape[0] - 1) // 2
    out = np.zeros((2 * band + 1,) * 3, dtype=coeffs.dtype)
    common = min(old_band, band)
    src = slice(old_band - common, old_band + common + 1)
    dst = slice(band - common, band + common + 1)
    out[dst, dst, dst] = coeffs[src, src, src]
    return out

def smoothstep(s: np.ndarray) -> np.ndarray:
    """C^infinity step: 0 for s <= 0, 1 for s >= 1, built from e^{-1/s} bumps."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)
