"""
Published single-ququart MU-like bases, kept as reference data.

Each fixture is a 4x4 matrix whose columns are the printed vectors in
printed order. HEADERS records the commuting set each table is printed
under as (kind, parameter) with parameters as Z_4 integers; SWAPPED_HEADERS
lists the alternative assignment checked for the two ideal tables.
"""
from typing import Dict, Tuple

import numpy as np

OMEGA = (1 + 1j) / np.sqrt(2)
OMEGA_BAR = (1 - 1j) / np.sqrt(2)


def _columns(*vectors) -> np.ndarray:
    return np.array(vectors, dtype=complex).T / 2


FIXTURES: Dict[str, np.ndarray] = {
    "i": np.eye(4, dtype=complex),
    "ii": _columns(
        (OMEGA, 1, -OMEGA, 1),
        (1, OMEGA, 1, -OMEGA),
        (-OMEGA, 1, OMEGA, 1),
        (1, -OMEGA, 1, OMEGA),
    ),
    "iii": _columns(
        (1 + 1j, 0, 1 - 1j, 0),
        (0, 1 + 1j, 0, 1 - 1j),
        (1 - 1j, 0, 1 + 1j, 0),
        (0, 1 - 1j, 0, 1 + 1j),
    ),
    "iv": _columns(
        (-OMEGA_BAR, 1, OMEGA_BAR, 1),
        (1, -OMEGA_BAR, 1, OMEGA_BAR),
        (OMEGA_BAR, 1, -OMEGA_BAR, 1),
        (1, OMEGA_BAR, 1, -OMEGA_BAR),
    ),
    "v": _columns(
        (1, 1, 1, 1),
        (1, 1j, -1, -1j),
        (1, -1, 1, -1),
        (1, -1j, -1, 1j),
    ),
    "vi": _columns(
        (1, 1j, 1, 1j),
        (1, -1, -1, 1),
        (1, -1j, 1, -1j),
        (1, 1, -1, -1),
    ),
}

HEADERS: Dict[str, Tuple[str, int]] = {
    "i": ("ray", 0),
    "ii": ("ray", 1),
    "iii": ("ray", 2),
    "iv": ("ray", 3),
    "v": ("ideal", 2),
    "vi": ("ideal", 0),
}

SWAPPED_HEADERS: Dict[str, Tuple[str, int]] = {
    "v": ("ideal", 0),
    "vi": ("ideal", 2),
}


def fixtures_single_ququart() -> Dict[str, np.ndarray]:
    """Copies of the six fixture matrices keyed by table name"""
    return {name: matrix.copy() for name, matrix in FIXTURES.items()}
