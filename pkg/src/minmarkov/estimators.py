"""scikit-learn style front ends.

:class:`MinInfoMarkovChain` builds the chain from a given dependence table
and marginal (``fit`` ignores its data argument); :class:`MinInfoMarkovEstimator`
learns the dependence coefficients and the marginal from an observed series.
Both expose ``predict_proba`` on conditioning windows, ``score`` on series
and ``sample``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import diagnostics, sampling
from ._validation import check_contexts, check_probability_vector, check_series, check_table
from .exceptions import InputError
from .inference import ParametricModel, fit as fit_model, window_index
from .mininfo import MinInfoSpec, construct
from .projection import DEFAULT_TOL
from .statespace import StateSpace


class _KernelMixin:
    """Shared prediction surface; needs ``result_`` set by ``fit``."""

    def _publish(self, result):
        self.result_ = result
        self.n_states_ = result.m
        self.kernel_ = result.kernel
        self.kappa_ = result.kappa
        self.delta_ = result.delta
        self.stationary_ = result.stationary_d
        self.marginal_ = result.stationary_1
        self.psi_ = result.psi
        self.n_iter_ = result.diagnostics.get("iterations")

    def predict_proba(self, X):
        """Next-state distribution for each row of ``order`` preceding states."""
        check_is_fitted(self, "result_")
        X = check_contexts(X, self.n_states_, self.result_.order)
        idx = np.ravel_multi_index(X.T, (self.n_states_,) * self.result_.order)
        return self.result_.lifted_kernel()[idx]

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def score(self, X, y=None):
        """Mean conditional log-likelihood per transition of the series ``X``."""
        check_is_fitted(self, "result_")
        x = check_series(X, self.n_states_)
        d = self.result_.order
        if x.shape[0] <= d:
            raise InputError(f"series must be longer than the order {d}")
        idx = window_index(x, self.n_states_, d)
        return float(np.mean(np.log(self.kernel_.reshape(-1)[idx])))

    def sample(self, n, random_state=None):
        """Stationary path of length ``n`` (integer codes)."""
        check_is_fitted(self, "result_")
        return np.array(sampling.sample_path(self.result_, n, seed=random_state).values)

    def acf(self, max_lag=20):
        check_is_fitted(self, "result_")
        return diagnostics.result_acf(self.result_, max_lag)

    def pacf(self, max_lag=20):
        return diagnostics.exact_pacf(self.acf(max_lag))


class MinInfoMarkovChain(_KernelMixin, BaseEstimator):
    """Minimum information Markov chain with given dependence and marginal.

    Parameters
    ----------
    dependence : array_like of shape (m,) * (order + 1)
        Dependence table ``H``.
    marginal : array_like of shape (m,)
        Strictly positive stationary marginal ``r``.
    order : int, default=1
    tol : float, default=1e-11
        Gradient max-norm tolerance of the dual minimization.
    max_iter : int, default=500

    Attributes
    ----------
    kernel_ : ndarray of shape (m,) * (order + 1)
        ``kernel_[x_1, ..., x_d, y]`` is the transition probability.
    kappa_, delta_ : ndarray
        Decomposition terms; ``kappa_`` of the last tuple is 0.
    stationary_ : ndarray of shape (m,) * order
    marginal_ : ndarray of shape (m,)
    """

    def __init__(self, dependence=None, marginal=None, order=1, tol=DEFAULT_TOL, max_iter=500):
        self.dependence = dependence
        self.marginal = marginal
        self.order = order
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X=None, y=None):
        if self.marginal is None:
            raise InputError("marginal is required")
        r = check_probability_vector(self.marginal)
        m = r.shape[0]
        H = np.zeros((m,) * (self.order + 1)) if self.dependence is None else self.dependence
        H = check_table(H, m, self.order)
        base = StateSpace(tuple(range(m)))
        spec = MinInfoSpec(base, H, r, order=self.order, tol=self.tol, max_iter=self.max_iter)
        self._publish(construct(spec))
        self.theta_ = self.result_.theta
        return self


class MinInfoMarkovEstimator(_KernelMixin, BaseEstimator):
    """Estimate ``H = h0 + sum_k coef_k basis_k`` and the marginal from a series.

    Parameters
    ----------
    basis : list of array_like
        Tables over ``X^(order+1)``; their coefficients are estimated.
    h0 : array_like, optional
        Fixed offset table (zeros when omitted).
    order : int, default=1
    n_states : int, optional
        Size of the state space; inferred as ``max(X) + 1`` when omitted.
    smoothing : float, default=0.0
        Pseudo-counts added to each state's frequency.  Nonzero values depart
        from the sample-moment estimator but allow unobserved states.
    """

    def __init__(self, basis=(), h0=None, order=1, n_states=None, tol=DEFAULT_TOL, max_iter=500, smoothing=0.0):
        self.basis = basis
        self.h0 = h0
        self.order = order
        self.n_states = n_states
        self.tol = tol
        self.max_iter = max_iter
        self.smoothing = smoothing

    def fit(self, X, y=None):
        x = check_series(X, self.n_states)
        m = int(self.n_states) if self.n_states is not None else int(x.max()) + 1
        base = StateSpace(tuple(range(m)))
        model = ParametricModel(base, list(self.basis), h0=self.h0, order=self.order)
        res = fit_model(
            model, sampling.TimeSeries(base, x), tol=self.tol, max_iter=self.max_iter, smoothing=self.smoothing
        )
        self.fit_result_ = res
        self._publish(res.result)
        self.coef_ = res.theta_hat
        self.sample_moments_ = res.sample_moments
        return self
