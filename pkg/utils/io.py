"""
Shared I/O helpers: fingerprints, provenance headers and commented CSV files.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

TOOL_NAME = "landmark-astar"
TOOL_VERSION = "0.1.0"


def fingerprint_arrays(*arrays: np.ndarray, extra: str = "") -> str:
    """SHA-256 over the raw bytes of the given arrays"""
    digest = hashlib.sha256(extra.encode("utf-8"))
    for array in arrays:
        contiguous = np.ascontiguousarray(array)
        digest.update(str(contiguous.dtype).encode("ascii"))
        digest.update(str(contiguous.shape).encode("ascii"))
        digest.update(contiguous.tobytes())
    return digest.hexdigest()


def fingerprint_mapping(data: Dict[str, Any]) -> str:
    """SHA-256 of a canonical JSON dump"""
    payload = json.dumps(data, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def provenance_lines(seed: Optional[Union[int, Iterable[int]]] = None,
                     manifest_hash: Optional[str] = None,
                     **extra: Any) -> list:
    """Header lines stamped on every output file"""
    if seed is not None and not isinstance(seed, (int, np.integer)):
        seed = ",".join(str(s) for s in seed)
    lines = [
        f"# tool={TOOL_NAME} version={TOOL_VERSION}",
        f"# manifest={manifest_hash or 'none'} seed={seed if seed is not None else 'none'}",
    ]
    for key, value in extra.items():
        lines.append(f"# {key}={value}")
    return lines


def write_commented_csv(frame: pd.DataFrame, path: Union[str, Path], header_lines: Iterable[str]) -> Path:
    """Write a CSV preceded by '#' comment lines"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        for line in header_lines:
            handle.write(line.rstrip("\n") + "\n")
        frame.to_csv(handle, index=False)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_commented_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read a CSV written by write_commented_csv"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"CSV file not found: {path}")
    return pd.read_csv(path, comment="#")
