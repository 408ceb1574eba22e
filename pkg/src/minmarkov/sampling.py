"""Seeded simulation of stationary paths and sample statistics."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .diagnostics import exact_pacf
from .exceptions import DomainError, InputError
from .statespace import StateSpace


@dataclass(frozen=True)
class TimeSeries:
    """Integer-coded observations on ``base``; ``seed`` is ``None`` for data."""

    base: StateSpace
    values: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        x = np.asarray(self.values)
        if x.ndim != 1:
            raise InputError("a series must be one-dimensional")
        if x.size and (not np.issubdtype(x.dtype, np.integer)):
            if not np.all(np.equal(np.mod(x, 1), 0)):
                raise InputError("series values must be integer state codes")
        x = x.astype(np.int64)
        if x.size and (x.min() < 0 or x.max() >= self.base.m):
            raise InputError(f"state codes must lie in 0..{self.base.m - 1}")
        x.setflags(write=False)
        object.__setattr__(self, "values", x)

    def __len__(self):
        return int(self.values.shape[0])


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator; the only RNG used for sampling."""
    return np.random.Generator(np.random.PCG64(seed))


def _draw(cum, u, n):
    k = bisect_right(cum, u)
    return k if k < n else n - 1


def sample_path(result, n: int, seed: int | None = None) -> TimeSeries:
    """Stationary path of length ``n`` from a :class:`~minmarkov.mininfo.MinInfoResult`.

    The first ``d`` states are drawn jointly from the exact stationary law on
    ``X^d``; later states follow the kernel.  One uniform variate is used per
    draw, mapped through the inverse CDF over the canonical state order.
    """
    n = int(n)
    if n < 0:
        raise InputError("n must be nonnegative")
    m, d = result.m, result.order
    rng = make_rng(seed)
    u = rng.random(max(n - d, 0) + 1)

    init = np.cumsum(result.stationary_d.reshape(-1)).tolist()
    state = _draw(init, u[0], m**d)
    block = np.unravel_index(state, (m,) * d)
    out = np.empty(n, dtype=np.int64)
    head = min(n, d)
    out[:head] = [int(b) for b in block[:head]]
    if n > d:
        rows = np.cumsum(result.lifted_kernel(), axis=1).tolist()
        tail_mod = m ** (d - 1)
        for t in range(d, n):
            y = _draw(rows[state], u[t - d + 1], m)
            out[t] = y
            state = (state % tail_mod) * m + y
    return TimeSeries(result.base, out, seed)


def sample_acf(ts: TimeSeries, max_lag: int) -> np.ndarray:
    """Sample autocorrelations (biased, denominator ``n``) at lags ``0..max_lag``."""
    x = np.asarray(ts.values if isinstance(ts, TimeSeries) else ts, dtype=float)
    n = x.shape[0]
    if n <= max_lag:
        raise InputError(f"series of length {n} is too short for max_lag={max_lag}")
    z = x - x.mean()
    c0 = z @ z
    if c0 == 0:
        raise DomainError("series has zero sample variance")
    return np.array([1.0] + [(z[: n - k] @ z[k:]) / c0 for k in range(1, max_lag + 1)])


def sample_pacf(ts: TimeSeries, max_lag: int) -> np.ndarray:
    return exact_pacf(sample_acf(ts, max_lag))


def empirical_marginal(ts: TimeSeries) -> np.ndarray:
    x = ts.values
    if x.shape[0] < 1:
        raise InputError("empty series")
    return np.bincount(x, minlength=ts.base.m) / x.shape[0]
