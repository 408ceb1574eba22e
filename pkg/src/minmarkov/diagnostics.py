"""Independent checks for constructed kernels.

Kernels here are dense row-stochastic ``n x n`` arrays whose positive
entries define the support.  Nothing in this module goes through the
eigen-solver or the optimizer: stationary laws come from a direct linear
solve and pair laws from matrix scaling, so the results can be used as
oracles against the construction.
"""
from __future__ import annotations

import numpy as np

from .exceptions import ConvergenceError, DomainError, InputError

IPF_TOL = 1e-12
IPF_MAX_ITER = 100_000
PATH_ENUM_CAP = 10**6


def _kernel(w, name="kernel") -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InputError(f"{name} must be a square matrix")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InputError(f"{name} must be finite and nonnegative")
    return w


def stationary_by_linear_solve(w) -> np.ndarray:
    """Stationary law of an irreducible kernel from ``p (W - I) = 0, sum p = 1``."""
    w = _kernel(w)
    n = w.shape[0]
    A = np.vstack([w.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    p, *_ = np.linalg.lstsq(A, b, rcond=None)
    return p


def divergence_rate(v, w, p_v=None) -> float:
    """``D(v|w) = sum_x p_v(x) sum_y v(y|x) log(v(y|x) / w(y|x))``.

    Nonnegative, and zero iff ``v == w``.  ``p_v`` defaults to the stationary
    law of ``v``.

    Raises
    ------
    InputError
        If ``v`` and ``w`` have different supports.
    """
    v, w = _kernel(v, "v"), _kernel(w, "w")
    if v.shape != w.shape:
        raise InputError("kernels have different sizes")
    supp = v > 0
    if not np.array_equal(supp, w > 0):
        raise InputError("support mismatch between v and w")
    p_v = stationary_by_linear_solve(v) if p_v is None else np.asarray(p_v, float)
    pair = p_v[:, None] * v
    return float(np.sum(pair[supp] * (np.log(v[supp]) - np.log(w[supp]))))


def path_kl_rate(v, w, n: int, p_v=None, p_w=None) -> float:
    """``KL(p_v^(n) || p_w^(n)) / n`` by enumerating all ``m**n`` paths."""
    v, w = _kernel(v, "v"), _kernel(w, "w")
    m = v.shape[0]
    if m**n > PATH_ENUM_CAP:
        raise InputError(f"{m}**{n} paths exceed the enumeration cap {PATH_ENUM_CAP}")
    p_v = stationary_by_linear_solve(v) if p_v is None else np.asarray(p_v, float)
    p_w = stationary_by_linear_solve(w) if p_w is None else np.asarray(p_w, float)
    with np.errstate(divide="ignore"):
        lv, lw = np.log(v), np.log(w)
        Lv, Lw = np.log(p_v), np.log(p_w)
    last = np.arange(m)
    for _ in range(n - 1):
        Lv = (Lv[:, None] + lv[last]).reshape(-1)
        Lw = (Lw[:, None] + lw[last]).reshape(-1)
        last = np.tile(np.arange(m), last.shape[0])
    P = np.exp(Lv)
    mask = P > 0
    return float(np.sum(P[mask] * (Lv[mask] - Lw[mask])) / n)


def pythagorean_residual(w, w_star, v) -> float:
    """``D(w|w*) + D(w*|v) - D(w|v)``; zero when ``w*`` is the projection,
    ``w`` satisfies the moment constraints and ``v`` lies in the family."""
    p_w = stationary_by_linear_solve(w)
    p_s = stationary_by_linear_solve(w_star)
    return (
        divergence_rate(w, w_star, p_w)
        + divergence_rate(w_star, v, p_s)
        - divergence_rate(w, v, p_w)
    )


def ipf_scale(weights, row_target, col_target=None, tol: float = IPF_TOL, max_iter: int = IPF_MAX_ITER) -> np.ndarray:
    """Scale a positive matrix to prescribed row and column sums.

    Alternates row and column normalization until the row-margin error
    (columns are exact after each sweep) drops to ``tol``.  The result is the
    unique matrix of the form ``diag(a) @ weights @ diag(b)`` with those margins.
    """
    A = np.asarray(weights, dtype=float)
    if A.ndim != 2 or np.any(~(A > 0)) or not np.all(np.isfinite(A)):
        raise DomainError("weights must be a finite, strictly positive matrix")
    row = np.asarray(row_target, dtype=float).reshape(-1)
    col = row if col_target is None else np.asarray(col_target, dtype=float).reshape(-1)
    if row.shape[0] != A.shape[0] or col.shape[0] != A.shape[1]:
        raise InputError("target lengths do not match the matrix shape")
    if np.any(row <= 0) or np.any(col <= 0):
        raise DomainError("targets must be strictly positive")
    if abs(row.sum() - col.sum()) > 1e-12:
        raise InputError("row and column targets must have equal totals")
    P = A / A.sum()
    err = np.inf
    for _ in range(max_iter):
        P *= (row / P.sum(axis=1))[:, None]
        P *= (col / P.sum(axis=0))[None, :]
        err = np.max(np.abs(P.sum(axis=1) - row))
        if err <= tol:
            return P
    raise ConvergenceError(f"IPF did not converge in {max_iter} sweeps (error {err:.3e})", residual=err, iterations=max_iter)


def sample_M_member(r, seed=None, spread: float = 1.0) -> np.ndarray:
    """Random positive kernel with stationary law ``r``.

    A matrix ``exp(spread * Z)`` (``Z`` standard normal) is scaled to margins
    ``(r, r)`` and conditioned on rows.  ``spread = 0`` gives the independence
    kernel ``w(y|x) = r(y)``.
    """
    r = np.asarray(r, dtype=float)
    rng = np.random.default_rng(seed)
    W = np.exp(spread * rng.standard_normal((r.shape[0], r.shape[0])))
    joint = ipf_scale(W, r, r)
    return joint / r[:, None]


def exact_acf(kernel, p, values, max_lag: int) -> np.ndarray:
    """Autocorrelations ``rho(0..max_lag)`` of ``g(X_t)`` for a stationary chain.

    ``kernel`` is the (possibly lifted) transition matrix, ``p`` its
    stationary law and ``values`` the number ``g`` attached to each state.
    """
    W = _kernel(kernel)
    p = np.asarray(p, dtype=float).reshape(-1)
    g = np.asarray(values, dtype=float).reshape(-1)
    mean = p @ g
    var = p @ (g * g) - mean**2
    if not var > 1e-15 * max(1.0, p @ (g * g)):
        raise DomainError("state values have zero variance under p")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    h = g.copy()
    for k in range(1, max_lag + 1):
        h = W @ h
        out[k] = (p @ (g * h) - mean**2) / var
    return out


def exact_pacf(acf) -> np.ndarray:
    """Partial autocorrelations by the Levinson-Durbin recursion.

    ``acf`` holds ``rho(0..L)`` with ``rho(0) = 1``; the output has the same
    length with ``pacf[0] = 1`` and ``pacf[k] = phi_kk``.

    Raises
    ------
    DomainError
        If the sequence is not positive definite.
    """
    rho = np.asarray(acf, dtype=float).reshape(-1)
    if rho.shape[0] < 1 or abs(rho[0] - 1.0) > 1e-12:
        raise DomainError("acf must start with rho(0) = 1")
    L = rho.shape[0] - 1
    out = np.empty(L + 1)
    out[0] = 1.0
    phi = np.zeros(0)
    err = 1.0
    for k in range(1, L + 1):
        num = rho[k] - phi @ rho[k - 1:0:-1] if k > 1 else rho[1]
        a = num / err
        if not abs(a) < 1:
            raise DomainError(f"autocorrelation sequence is not positive definite at lag {k}")
        phi = np.concatenate([phi - a * phi[::-1], [a]])
        err *= 1.0 - a * a
        out[k] = a
    return out


def result_acf(result, max_lag: int, values=None) -> np.ndarray:
    """Exact ACF of a constructed chain (order ``d`` handled through the lift)."""
    m = result.m
    g = np.arange(m, dtype=float) if values is None else np.asarray(values, float)
    lifted_g = g[np.arange(m**result.order) % m]
    return exact_acf(result.transition_matrix(), result.stationary_d.reshape(-1), lifted_g, max_lag)


def stationarity_residual(kernel, p) -> float:
    """``max_y |sum_x p(x) w(y|x) - p(y)|``."""
    W = _kernel(kernel)
    p = np.asarray(p, dtype=float).reshape(-1)
    return float(np.max(np.abs(p @ W - p)))
