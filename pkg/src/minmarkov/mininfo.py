"""Minimum information Markov kernels with prescribed dependence and marginal.

Given a dependence table ``H`` over ``X^(d+1)`` and a positive marginal ``r``
over ``X``, build the order-``d`` kernel

    w(x_{d+1} | x_{1:d}) = exp(H(x_{1:d+1}) + kappa(x_{2:d+1}) - kappa(x_{1:d}) - delta(x_{d+1}))

whose first-order stationary marginal is ``r``.  The kernel is the I-projection
in the family on the lifted space generated by ``C = H`` and
``F_i = -1{x_{d+1} = i}`` (``i < m-1``) with target moments ``-r(i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError
from .expfam import ExpFamily
from .projection import DEFAULT_TOL, ProjectionProblem, project
from .statespace import LiftedSpace, StateSpace, lift

R_SUM_TOL = 1e-12


# -- named generators ---------------------------------------------------------

def inar1_dependence(N: int, alpha: float) -> np.ndarray:
    """``H(x, y) = alpha * x * y`` on ``{0..N}^2``."""
    x = np.arange(int(N) + 1, dtype=float)
    return float(alpha) * np.multiply.outer(x, x)


def inar2_dependence(N: int, alpha) -> np.ndarray:
    """``H(x, y, z) = alpha[0] * y * z + alpha[1] * x * z`` on ``{0..N}^3``."""
    a1, a2 = (float(a) for a in alpha)
    v = np.arange(int(N) + 1, dtype=float)
    x, y, z = np.meshgrid(v, v, v, indexing="ij")
    return a1 * y * z + a2 * x * z


def binomial_marginal(N: int, nu: float) -> np.ndarray:
    N = int(N)
    if N < 1:
        raise InputError("binomial N must be >= 1")
    if not 0 < nu < 1:
        raise InputError(f"binomial nu must lie in (0, 1), got {nu}")
    return np.array([math.comb(N, k) * nu**k * (1 - nu) ** (N - k) for k in range(N + 1)])


# -- specification and result ------------------------------------------------

def check_marginal(r, m: int | None = None) -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(-1)
    if m is not None and r.shape[0] != m:
        raise InputError(f"marginal has {r.shape[0]} entries, expected {m}")
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise InputError("marginal must be strictly positive")
    if abs(r.sum() - 1.0) > R_SUM_TOL:
        raise InputError(f"marginal must sum to 1 (sum = {r.sum()!r})")
    return r


@dataclass
class MinInfoSpec:
    """Inputs of the construction.  ``H`` has shape ``(m,) * (order + 1)``."""

    base: StateSpace
    H: np.ndarray
    r: np.ndarray
    order: int = 1
    tol: float = DEFAULT_TOL
    max_iter: int = 500
    cap: int | None = None

    def __post_init__(self):
        self.order = int(self.order)
        if self.order < 1:
            raise InputError(f"order must be >= 1, got {self.order}")
        m = self.base.m
        self.r = check_marginal(self.r, m)
        H = np.asarray(self.H, dtype=float)
        want = (m,) * (self.order + 1)
        if H.size != m ** (self.order + 1):
            raise InputError(f"H must have shape {want}, got {H.shape}")
        H = H.reshape(want)
        if not np.all(np.isfinite(H)):
            raise InputError("H must be finite")
        self.H = H


@dataclass(frozen=True)
class MinInfoResult:
    """Constructed kernel and its decomposition.

    Arrays are indexed by state codes: ``kernel[x_1, ..., x_d, y]``,
    ``kappa[x_1, ..., x_d]`` (``kappa`` of the last lifted state is 0),
    ``delta[y]``, ``stationary_d[x_1, ..., x_d]``.
    """

    base: StateSpace
    order: int
    H: np.ndarray
    r: np.ndarray
    kernel: np.ndarray
    kappa: np.ndarray
    delta: np.ndarray
    stationary_d: np.ndarray
    theta: np.ndarray
    psi: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def lifted(self) -> LiftedSpace:
        return lift(self.base, self.order)

    @property
    def stationary_1(self) -> np.ndarray:
        return marginalize(self.stationary_d, 1)

    def lifted_kernel(self) -> np.ndarray:
        """Per-state next-symbol probabilities, shape ``(m**d, m)``."""
        return self.kernel.reshape(self.m**self.order, self.m)

    def transition_matrix(self) -> np.ndarray:
        """Dense first-order transition matrix of the lifted chain."""
        g = self.lifted
        n = g.n_states
        out = np.zeros((n, n))
        out[g.edge_src, g.edge_dst] = self.kernel.reshape(-1)
        return out

    def pair(self) -> np.ndarray:
        """Stationary law of ``(x_1, ..., x_{d+1})``, shape ``(m,) * (d+1)``."""
        return self.stationary_d[..., None] * self.kernel

    def log_decomposition(self) -> np.ndarray:
        """``H + kappa(x_{2:d+1}) - kappa(x_{1:d}) - delta(x_{d+1})``."""
        d = self.order
        k_head = self.kappa.reshape(self.kappa.shape + (1,))
        k_tail = self.kappa.reshape((1,) + self.kappa.shape)
        dl = self.delta.reshape((1,) * d + (self.m,))
        return self.H + k_tail - k_head - dl


def marginalize(stationary_d, k: int) -> np.ndarray:
    """Marginal law of the first ``k`` coordinates of a law on ``X^d``."""
    p = np.asarray(stationary_d, dtype=float)
    d = p.ndim
    if not 1 <= k <= d:
        raise InputError(f"k must lie in 1..{d}, got {k}")
    if k == d:
        return p.copy()
    return p.sum(axis=tuple(range(k, d)))


def family_for(base: StateSpace, H: np.ndarray, order: int, cap: int | None = None) -> ExpFamily:
    """Lifted family with carrier ``H`` and statistics ``-1{last = i}``, ``i < m-1``."""
    g = lift(base, order, cap=cap)
    m = base.m
    last = np.arange(g.n_edges) % m
    F = -(last[None, :] == np.arange(m - 1)[:, None]).astype(float)
    # indicators of the last symbol are independent modulo the gauge by construction
    return ExpFamily(g, np.asarray(H, float).reshape(-1), F, check=False)


def assemble(spec: MinInfoSpec, point, theta_marginal, diagnostics: dict) -> MinInfoResult:
    """Read kernel, kappa, delta and the stationary law off a family point.

    ``theta_marginal`` are the coefficients of the last-symbol indicators:
    ``delta(i) = theta_marginal[i] + psi`` for ``i < m-1`` and
    ``delta(m-1) = psi``.
    """
    m, d = spec.base.m, spec.order
    theta = np.array(theta_marginal, dtype=float)
    psi = float(point.psi)
    delta = np.full(m, psi)
    delta[: m - 1] += theta
    return MinInfoResult(
        base=spec.base,
        order=d,
        H=spec.H,
        r=spec.r,
        kernel=np.array(point.w).reshape((m,) * (d + 1)),
        kappa=np.array(point.kappa).reshape((m,) * d),
        delta=delta,
        stationary_d=np.array(point.p).reshape((m,) * d),
        theta=theta,
        psi=psi,
        diagnostics=dict(diagnostics, eigen_residual=point.solution.eigen.residual),
    )


def construct(spec: MinInfoSpec, **projection_options) -> MinInfoResult:
    """Minimum information kernel of any order (dispatches on ``spec.order``)."""
    fam = family_for(spec.base, spec.H, spec.order, cap=spec.cap)
    prob = ProjectionProblem(
        fam, -spec.r[: spec.base.m - 1], tol=spec.tol, max_iter=spec.max_iter, **projection_options
    )
    proj = project(prob)
    return assemble(spec, proj.point, proj.theta_star, proj.metadata(prob))


def construct_first_order(spec: MinInfoSpec, **projection_options) -> MinInfoResult:
    if spec.order != 1:
        raise InputError("construct_first_order needs order 1")
    return construct(spec, **projection_options)


def construct_higher_order(spec: MinInfoSpec, **projection_options) -> MinInfoResult:
    if spec.order < 2:
        raise InputError("construct_higher_order needs order >= 2")
    return construct(spec, **projection_options)


def scaling_factors(result: MinInfoResult):
    """Matrix-scaling factors ``(a, b)`` with ``exp(H) * a[:, None] * b[None, :]``
    having both margins equal to ``r`` (first order only).

    ``a(x) = r(x) exp(-kappa(x))`` and ``b(y) = exp(kappa(y) - delta(y))``;
    the scaled matrix is the stationary pair law ``r(x) w(y|x)``.
    """
    if result.order != 1:
        raise InputError("the matrix-scaling correspondence only holds for order 1")
    a = result.r * np.exp(-result.kappa)
    b = np.exp(result.kappa - result.delta)
    return a, b
