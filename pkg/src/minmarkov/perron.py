"""Perron-Frobenius eigendata and kernel normalization.

A nonnegative matrix ``f`` supported on a strongly connected digraph has a
simple positive eigenvalue ``Z`` with positive right/left eigenvectors
``gamma``/``beta``.  The Markov kernel ``w(y|x) = f(x,y) gamma(y) / (Z gamma(x))``
then has stationary distribution ``p ∝ beta * gamma`` where ``beta`` is the
left eigenvector *of f* (not of ``w``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix

from .exceptions import ConvergenceError, DomainError, InputError
from .statespace import Digraph, StateSpace, is_strongly_connected

DEFAULT_TOL = 1e-12
# below this many states dense matrix-vector products are faster than CSR
DENSE_MAX_STATES = 256


@dataclass(frozen=True)
class NonnegMatrix:
    """Positive weights on the edges of a digraph, stored in log domain.

    The represented matrix is ``exp(log_values)`` on ``graph``'s edges (in the
    graph's canonical edge order) and zero elsewhere.
    """

    graph: object
    log_values: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.log_values, dtype=float).reshape(-1)
        if lv.shape[0] != self.graph.n_edges:
            raise InputError(
                f"expected {self.graph.n_edges} edge values, got {lv.shape[0]}"
            )
        if np.isnan(lv).any() or np.isposinf(lv).any():
            raise DomainError("edge log-weights must be finite")
        if np.isneginf(lv).any():
            raise DomainError("weights must be strictly positive on every edge")
        lv.setflags(write=False)
        object.__setattr__(self, "log_values", lv)

    @classmethod
    def from_values(cls, graph, values) -> "NonnegMatrix":
        values = np.asarray(values, dtype=float).reshape(-1)
        if np.any(~(values > 0)):
            raise DomainError("weights must be strictly positive on every edge")
        return cls(graph, np.log(values))

    @classmethod
    def from_dense(cls, f, labels=None) -> "NonnegMatrix":
        """Build from a dense square array; the support defines the digraph."""
        f = np.asarray(f, dtype=float)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise InputError("f must be a square matrix")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise DomainError("f must be finite and nonnegative")
        n = f.shape[0]
        base = StateSpace(tuple(labels) if labels is not None else tuple(range(n)))
        xs, ys = np.nonzero(f)
        graph = Digraph(base, tuple(zip(xs.tolist(), ys.tolist())))
        return cls.from_values(graph, f[graph.edge_src, graph.edge_dst])

    @property
    def n(self) -> int:
        return self.graph.n_states

    @property
    def log_scale(self) -> float:
        return float(self.log_values.max())

    def scaled_csr(self) -> csr_matrix:
        """The matrix divided by ``exp(log_scale)`` (max entry 1)."""
        v = np.exp(self.log_values - self.log_scale)
        g = self.graph
        return csr_matrix((v, (g.edge_src, g.edge_dst)), shape=(self.n, self.n))

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        out[self.graph.edge_src, self.graph.edge_dst] = np.exp(self.log_values)
        return out


@dataclass(frozen=True)
class PerronData:
    """Perron eigendata of a nonnegative irreducible matrix.

    ``gamma`` and ``beta`` are scaled so their largest entry is exactly 1.
    ``kappa = log(gamma) - log(gamma[-1])`` uses the last-state gauge.
    ``residual`` is the largest componentwise relative eigen-residual
    ``|(f g)_x - Z g_x| / (Z g_x)`` over both eigenvectors.
    """

    Z: float
    psi: float
    gamma: np.ndarray
    beta: np.ndarray
    kappa: np.ndarray
    residual: float
    iterations: int


@dataclass(frozen=True)
class KernelSolution:
    """Row-stochastic kernel with its stationary law and eigendata.

    All per-edge arrays follow ``graph``'s canonical edge order.
    """

    graph: object
    log_w: np.ndarray
    w: np.ndarray
    p: np.ndarray
    pair: np.ndarray
    eigen: PerronData

    def matrix(self) -> np.ndarray:
        """Dense ``n x n`` transition matrix (zeros off the support)."""
        n = self.graph.n_states
        out = np.zeros((n, n))
        out[self.graph.edge_src, self.graph.edge_dst] = self.w
        return out

    def sparse(self) -> csr_matrix:
        n = self.graph.n_states
        return csr_matrix((self.w, (self.graph.edge_src, self.graph.edge_dst)), shape=(n, n))

    def row_sums(self) -> np.ndarray:
        return np.bincount(self.graph.edge_src, weights=self.w, minlength=self.graph.n_states)


def _power(A, shift, v, tol, max_iter):
    """Shifted power iteration for the Perron vector of ``A`` (sparse, positive
    on a strongly connected support).  Stops on the Collatz-Wielandt gap:
    ``max(Av/v) - min(Av/v) <= tol * min(Av/v)``."""
    gap = np.inf
    for it in range(1, max_iter + 1):
        y = A @ v
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = y / v
        lo, hi = ratio.min(), ratio.max()
        # also catches NaN, inf and zeros in v
        if not (lo > 0 and hi < np.inf):
            raise ConvergenceError(
                "power iteration lost positivity (weights span too many orders of magnitude)",
                residual=float("inf"),
                iterations=it,
            )
        gap = (hi - lo) / lo
        if gap <= tol:
            return v, lo, hi, gap, it
        v = y + shift * v
        v /= v.max()
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(relative residual {gap:.3e})",
        residual=float(gap),
        iterations=max_iter,
    )


def _check(f: NonnegMatrix) -> None:
    if f.n < 2:
        raise InputError("at least 2 states are required")
    if not is_strongly_connected(f.graph):
        raise InputError("support of f is not strongly connected")


def solve(
    f: NonnegMatrix,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    gamma0=None,
    beta0=None,
) -> PerronData:
    """Perron eigendata of ``f``.

    Power iteration on ``f + c I`` with ``c`` the smallest row sum.  Any
    ``c > 0`` makes a periodic support (a pure cycle) primitive without moving
    the eigenvectors; ``c <= Z`` keeps the convergence factor
    ``max |lambda + c| / (Z + c)`` away from 1.  Optional ``gamma0``/``beta0`` warm-start the iterations.

    Raises
    ------
    ConvergenceError
        If either eigenvector misses ``tol`` within ``max_iter`` iterations
        (default ``100 * n**2``).
    """
    _check(f)
    n = f.n
    if max_iter is None:
        max_iter = 100 * n * n
    A = f.scaled_csr()
    if A.nnz != f.graph.n_edges or np.any(A.data == 0):
        raise ConvergenceError(
            "edge weights underflow after scaling (log-weight spread above ~745)",
            residual=float("inf"),
            iterations=0,
        )
    shift = float(np.asarray(A.sum(axis=1)).min())
    g0 = np.ones(n) if gamma0 is None else np.asarray(gamma0, float).copy()
    b0 = np.ones(n) if beta0 is None else np.asarray(beta0, float).copy()
    if not (np.all(g0 > 0) and np.all(b0 > 0)):
        raise InputError("warm-start vectors must be strictly positive")

    if n <= DENSE_MAX_STATES:
        A = A.toarray()
        At = np.ascontiguousarray(A.T)
    else:
        At = A.T.tocsr()
    gamma, _, _, ggap, git = _power(A, shift, g0, tol, max_iter)
    beta, _, _, bgap, bit = _power(At, shift, b0, tol, max_iter)
    gamma = gamma / gamma.max()
    beta = beta / beta.max()

    # two-sided Rayleigh quotient: second-order accurate in the eigenvector error
    Zs = float(beta @ (A @ gamma)) / float(beta @ gamma)
    psi = float(np.log(Zs) + f.log_scale)
    kappa = np.log(gamma)
    kappa = kappa - kappa[-1]
    for arr in (gamma, beta, kappa):
        arr.setflags(write=False)
    return PerronData(
        Z=float(np.exp(psi)) if psi < 709.0 else float("inf"),
        psi=psi,
        gamma=gamma,
        beta=beta,
        kappa=kappa,
        residual=float(max(ggap, bgap)),
        iterations=int(max(git, bit)),
    )


def kernel_from_eigen(f: NonnegMatrix, eig: PerronData) -> KernelSolution:
    g = f.graph
    log_w = f.log_values + eig.kappa[g.edge_dst] - eig.kappa[g.edge_src] - eig.psi
    w = np.exp(log_w)
    p = eig.beta * eig.gamma
    p = p / p.sum()
    pair = p[g.edge_src] * w
    for arr in (log_w, w, p, pair):
        arr.setflags(write=False)
    return KernelSolution(graph=g, log_w=log_w, w=w, p=p, pair=pair, eigen=eig)


def normalize_kernel(f: NonnegMatrix, tol: float = DEFAULT_TOL, **kw) -> KernelSolution:
    """Turn ``f`` into the Markov kernel ``f(x,y) exp(kappa(y) - kappa(x) - psi)``.

    Rows sum to one up to the eigen-residual ``tol``; the kernel is positive
    exactly on the support of ``f``.
    """
    return kernel_from_eigen(f, solve(f, tol=tol, **kw))


def stationary(f: NonnegMatrix, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Stationary distribution of the kernel normalized from ``f``:
    ``p(x) ∝ beta(x) gamma(x)`` with ``beta``, ``gamma`` the left/right Perron
    vectors of ``f``."""
    return normalize_kernel(f, tol=tol).p
