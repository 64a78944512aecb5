"""Small dense matrix and vector helpers.

Vectors are measured in the max norm. Matrices are bounded by their largest
singular value (the induced 2-norm), which is what the stability criterion
uses even though the max-norm induced bound is the max row sum. Both are
available here so callers can compare.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from fracstab.errors import DimensionMismatch, EmptyMatrix, EmptyVector, ValidationError


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Convert *a* to a finite 2-D float array, or raise."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1 and arr.size == 0:
        raise EmptyMatrix(f"{name} is empty", field=name)
    if arr.ndim != 2:
        raise DimensionMismatch(
            f"{name} must be two-dimensional, got shape {arr.shape}", field=name
        )
    if arr.size == 0:
        raise EmptyMatrix(f"{name} is empty", field=name)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries", field=name)
    return arr


def sigma_max(a) -> float:
    """Largest singular value (spectral norm) of *a*."""
    arr = as_matrix(a)
    return float(np.linalg.norm(arr, 2))


def sigma_bound(mats: Iterable) -> float:
    """Maximum of :func:`sigma_max` over square matrices of a common size."""
    arrs = [as_matrix(m, f"mats[{i}]") for i, m in enumerate(mats)]
    if not arrs:
        raise EmptyMatrix("need at least one matrix")
    shape = arrs[0].shape
    for i, arr in enumerate(arrs):
        if arr.shape[0] != arr.shape[1] or arr.shape != shape:
            raise DimensionMismatch(
                f"mats[{i}] has shape {arr.shape}, expected square {shape}",
                field=f"mats[{i}]",
            )
    return max(sigma_max(arr) for arr in arrs)


def max_row_sum(a) -> float:
    """Induced max-norm of *a*; diagnostic companion to :func:`sigma_max`."""
    arr = as_matrix(a)
    return float(np.max(np.sum(np.abs(arr), axis=1)))


def vec_norm_max(x) -> float:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyVector("vector is empty")
    return float(np.max(np.abs(arr)))
