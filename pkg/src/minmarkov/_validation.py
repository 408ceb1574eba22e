"""Input validation helpers shared by the estimators and the CLI."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import InputError


def check_series(X, n_states: int | None = None) -> np.ndarray:
    """Coerce ``X`` (1-D, or a single column) to an int64 array of state codes."""
    try:
        arr = check_array(X, ensure_2d=False, dtype=None, ensure_min_samples=1)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise InputError(f"a series must be 1-D or a single column, got shape {arr.shape}")
        arr = arr[:, 0]
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise InputError("series values must be integer state codes")
    arr = arr.astype(np.int64)
    if arr.min() < 0:
        raise InputError("state codes must be nonnegative")
    if n_states is not None and arr.max() >= n_states:
        raise InputError(f"state code {arr.max()} out of range for {n_states} states")
    return arr


def check_probability_vector(r, m: int | None = None, name: str = "marginal") -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(-1)
    if m is not None and r.shape[0] != m:
        raise InputError(f"{name} has {r.shape[0]} entries, expected {m}")
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise InputError(f"{name} must be strictly positive")
    if abs(r.sum() - 1.0) > 1e-12:
        raise InputError(f"{name} must sum to 1 (sum = {r.sum()!r})")
    return r


def check_table(H, m: int, order: int, name: str = "dependence") -> np.ndarray:
    """A finite table over ``X^(order+1)``, reshaped to ``(m,) * (order+1)``."""
    H = np.asarray(H, dtype=float)
    shape = (m,) * (order + 1)
    if H.size != m ** (order + 1):
        raise InputError(f"{name} must have shape {shape}, got {H.shape}")
    if not np.all(np.isfinite(H)):
        raise InputError(f"{name} must be finite")
    return H.reshape(shape)


def check_contexts(X, m: int, order: int) -> np.ndarray:
    """Rows of ``order`` state codes (the conditioning window)."""
    X = np.atleast_2d(np.asarray(X))
    if X.shape[1] != order:
        raise InputError(f"contexts must have {order} columns, got {X.shape[1]}")
    X = X.astype(np.int64)
    if X.size and (X.min() < 0 or X.max() >= m):
        raise InputError(f"state codes must lie in 0..{m - 1}")
    return X
