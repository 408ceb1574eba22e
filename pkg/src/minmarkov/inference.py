"""Joint estimation of dependence parameters and the marginal from data.

For ``H = h0 + sum_k theta_k h_k`` the kernel
``exp(H + kappa(x_{2:d+1}) - kappa(x_{1:d}) - delta(x_{d+1}))`` is the
exponential family with carrier ``h0`` and statistics ``h_1..h_K`` plus the
negated last-symbol indicators.  Projecting onto the sample means of those
statistics estimates ``theta`` and ``delta`` at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError, UnobservedStateError
from .expfam import ExpFamily
from .mininfo import MinInfoResult, MinInfoSpec, assemble
from .projection import DEFAULT_TOL, ProjectionProblem, project
from .sampling import TimeSeries
from .statespace import StateSpace, lift


@dataclass
class ParametricModel:
    """Dependence model ``h0 + sum_k theta_k h_k`` over ``X^(order+1)``."""

    base: StateSpace
    h: list
    h0: np.ndarray | None = None
    order: int = 1

    def __post_init__(self):
        m, d = self.base.m, int(self.order)
        if d < 1:
            raise InputError("order must be >= 1")
        self.order = d
        shape = (m,) * (d + 1)

        def table(t, what):
            t = np.asarray(t, dtype=float)
            if t.size != m ** (d + 1):
                raise InputError(f"{what} must have shape {shape}, got {t.shape}")
            if not np.all(np.isfinite(t)):
                raise InputError(f"{what} must be finite")
            return t.reshape(shape)

        self.h0 = np.zeros(shape) if self.h0 is None else table(self.h0, "h0")
        self.h = [table(t, f"h[{k}]") for k, t in enumerate(self.h)]

    @property
    def K(self) -> int:
        return len(self.h)

    def dependence(self, theta) -> np.ndarray:
        H = self.h0.copy()
        for t, hk in zip(np.asarray(theta, float).reshape(-1), self.h):
            H += t * hk
        return H


@dataclass(frozen=True)
class FitResult:
    theta_hat: np.ndarray
    delta_hat: np.ndarray
    result: MinInfoResult
    sample_moments: np.ndarray
    marginal: np.ndarray
    n_windows: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def kernel_hat(self) -> np.ndarray:
        return self.result.kernel


def window_index(x: np.ndarray, m: int, d: int) -> np.ndarray:
    """Rank of each length-``d+1`` window ``x[t-d..t]`` among ``(d+1)``-tuples."""
    n = x.shape[0]
    idx = np.zeros(n - d, dtype=np.int64)
    for j in range(d + 1):
        idx = idx * m + x[j : n - d + j]
    return idx


def sample_targets(model: ParametricModel, ts: TimeSeries, smoothing: float = 0.0):
    """Window means of ``h_k`` and last-symbol frequencies (denominator ``n - d``).

    ``smoothing > 0`` adds that many pseudo-counts to every state's frequency;
    it departs from the plain sample-mean estimator and is off by default.
    """
    m, d = model.base.m, model.order
    x = ts.values
    n = x.shape[0]
    if n <= d:
        raise InputError(f"series of length {n} is too short for order {d}")
    idx = window_index(x, m, d)
    mu_h = np.array([hk.reshape(-1)[idx].mean() for hk in model.h])
    counts = np.bincount(x[d:], minlength=m).astype(float)
    if smoothing < 0:
        raise InputError("smoothing must be nonnegative")
    if smoothing == 0:
        missing = [model.base.labels[i] for i in np.flatnonzero(counts == 0)]
        if missing:
            raise UnobservedStateError(missing)
    freq = (counts + smoothing) / (counts.sum() + m * smoothing)
    return mu_h, freq, n - d


def fit(
    model: ParametricModel,
    ts: TimeSeries,
    tol: float = DEFAULT_TOL,
    max_iter: int = 500,
    smoothing: float = 0.0,
) -> FitResult:
    """Estimate ``theta`` and ``delta`` by the I-projection onto sample moments.

    Raises
    ------
    UnobservedStateError
        Some state never appears as the last element of a window.
    UnattainableMomentsError
        The sample moments lie on the boundary of the attainable set.
    """
    if ts.base.m != model.base.m:
        raise InputError("series and model use different state spaces")
    m, d, K = model.base.m, model.order, model.K
    mu_h, freq, n_win = sample_targets(model, ts, smoothing)

    g = lift(model.base, d)
    last = np.arange(g.n_edges) % m
    ind = -(last[None, :] == np.arange(m - 1)[:, None]).astype(float)
    H_stats = np.array([hk.reshape(-1) for hk in model.h]).reshape(K, g.n_edges)
    F = np.vstack([H_stats, ind])
    fam = ExpFamily(g, model.h0.reshape(-1), F)
    mu = np.concatenate([mu_h, -freq[: m - 1]])
    prob = ProjectionProblem(fam, mu, tol=tol, max_iter=max_iter)
    proj = project(prob)

    theta = np.asarray(proj.theta_star)
    spec = MinInfoSpec(model.base, model.dependence(theta[:K]), freq / freq.sum(), order=d, tol=tol, max_iter=max_iter)
    res = assemble(spec, proj.point, theta[K:], proj.metadata(prob))
    return FitResult(
        theta_hat=theta[:K].copy(),
        delta_hat=res.delta.copy(),
        result=res,
        sample_moments=mu,
        marginal=freq,
        n_windows=n_win,
        diagnostics=res.diagnostics,
    )
