"""Input checks shared by the estimators and the functional API."""
from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp
from sklearn.utils import check_array

from .exceptions import DimensionMismatch, InvalidConfig


def check_vectors(X, name="X"):
    """Validate a 2-D, finite, float vector block (dense or CSR).

    Sparse input comes back as CSR with sorted indices and no explicit zeros.
    """
    X = check_array(
        X,
        accept_sparse="csr",
        dtype=np.float64,
        ensure_all_finite=True,
        ensure_min_samples=0,
        ensure_min_features=0,
        input_name=name,
    )
    if sp.issparse(X):
        X = X.copy()
        X.eliminate_zeros()
        X.sort_indices()
    return X


def check_same_shape(a, b, what="vectors"):
    if a.shape != b.shape:
        raise DimensionMismatch(f"{what}: shape {a.shape} != {b.shape}")


def check_names(names, n_rows):
    names = [str(n) for n in names]
    if len(names) != n_rows:
        raise DimensionMismatch(f"{len(names)} names for {n_rows} vectors")
    if len(set(names)) != len(names):
        raise InvalidConfig("vector names must be unique")
    return names


def check_nonnegative(value, what):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value < 0:
        raise InvalidConfig(f"{what} must be a finite nonnegative number, got {value!r}")
    return float(value)


def check_positive_int(value, what, allow_zero=False):
    lo = 0 if allow_zero else 1
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < lo:
        raise InvalidConfig(f"{what} must be an integer >= {lo}, got {value!r}")
    return int(value)
