"""JSON forms of complex matrices, ring labels and basis families."""
from typing import Dict, List, Sequence

import numpy as np

from algebra.galois_core import RingElem
from bases.mub_bases import BasisFamily
from utils.errors import DimensionError


def matrix_to_json(M: np.ndarray) -> List[List[List[float]]]:
    """Row-major nested lists of [re, im] pairs"""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {M.shape}")
    return np.stack([M.real, M.imag], axis=-1).tolist()


def matrix_from_json(data: Sequence[Sequence[Sequence[float]]]) -> np.ndarray:
    pairs = np.asarray(data, dtype=float)
    if pairs.ndim != 3 or pairs.shape[-1] != 2:
        raise DimensionError(f"expected rows of [re, im] pairs, got shape {pairs.shape}")
    return pairs[..., 0] + 1j * pairs[..., 1]


def label_to_text(kind: str, param: RingElem) -> str:
    """Setup label such as ray:(1,0) or ideal:(2,0)"""
    return f"{kind}:{param!r}"


def elem_to_json(a: RingElem) -> List[int]:
    return list(a.coeffs)


def family_to_json(fam: BasisFamily) -> Dict:
    """
    Setup label -> matrix, in setup order

    Qubit families (s = 1) use the same layout; only the ring header differs.
    """
    return {
        "ring": fam.ctx.to_dict(),
        "setups": {
            label_to_text(kind, param): matrix_to_json(U)
            for kind, param, U in fam.setups()
        },
    }
