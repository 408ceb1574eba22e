"""Exponential families of Markov kernels.

A family is generated by a carrier ``C`` and statistics ``F_1..F_K`` on the
edges of a strongly connected digraph.  Its member at natural parameter
``theta`` is::

    w_theta(y|x) = exp(C + sum_k theta_k F_k + kappa(y) - kappa(x) - psi)

with ``kappa``/``psi`` supplied by the Perron eigenproblem.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix, hstack
from scipy.sparse.linalg import spsolve

from . import perron
from .exceptions import InputError
from .perron import KernelSolution, NonnegMatrix
from .statespace import require_strongly_connected

INDEPENDENCE_THRESHOLD = 1e-8
FISHER_STEP = 1e-5


def null_space_basis(graph) -> csr_matrix:
    """Sparse ``|E| x n`` basis of the gauge space: columns
    ``1{y=z} - 1{x=z}`` for ``z < n-1`` plus the constant ``-1``."""
    n, E = graph.n_states, graph.n_edges
    rows = np.arange(E)
    src, dst = graph.edge_src, graph.edge_dst
    inc = csr_matrix(
        (np.concatenate([np.ones(E), -np.ones(E)]),
         (np.concatenate([rows, rows]), np.concatenate([dst, src]))),
        shape=(E, n),
    )[:, : n - 1]
    const = csr_matrix(-np.ones((E, 1)))
    return hstack([inc, const]).tocsr()


def residual_modulo_gauge(graph, F: np.ndarray) -> np.ndarray:
    """Component of each row of ``F`` orthogonal to the gauge space."""
    F = np.atleast_2d(F)
    if F.shape[0] == 0:
        return F
    B = null_space_basis(graph)
    BtB = (B.T @ B).tocsc()
    coef = spsolve(BtB, np.asarray(B.T @ F.T))
    coef = np.asarray(coef).reshape(B.shape[1], F.shape[0])
    return F - np.asarray(B @ coef).T


def independent_modulo_gauge(graph, F: np.ndarray, threshold: float = INDEPENDENCE_THRESHOLD) -> bool:
    """True iff the rows of ``F`` are linearly independent modulo functions
    of the form ``kappa(y) - kappa(x) - c``.

    Equivalent to ``rank([F; N]) == K + dim N`` for a gauge basis ``N``.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.shape[0] == 0:
        return True
    R = residual_modulo_gauge(graph, F)
    sv = np.linalg.svd(R, compute_uv=False)
    scale = max(1.0, float(np.linalg.svd(F, compute_uv=False).max()))
    return bool(sv.min() > threshold * scale)


class ExpFamily:
    """Exponential family on ``graph`` generated by ``C`` and rows of ``F``.

    Parameters
    ----------
    graph : Digraph or LiftedSpace
    C : array_like, shape (n_edges,)
    F : array_like, shape (K, n_edges)
    check : bool
        Verify strong connectivity and independence of ``F`` modulo the
        gauge space (needed for strict convexity of the potential).
    """

    def __init__(self, graph, C, F, check: bool = True):
        E = graph.n_edges
        C = np.asarray(C, dtype=float).reshape(-1)
        F = np.asarray(F, dtype=float)
        if F.size == 0:
            F = np.zeros((0, E))
        F = np.atleast_2d(F)
        if C.shape != (E,):
            raise InputError(f"C must have {E} entries (one per edge), got {C.shape[0]}")
        if F.shape[1] != E:
            raise InputError(f"each statistic must have {E} entries, got {F.shape[1]}")
        if not (np.all(np.isfinite(C)) and np.all(np.isfinite(F))):
            raise InputError("C and F must be finite")
        if check:
            require_strongly_connected(graph)
            if not independent_modulo_gauge(graph, F):
                raise InputError(
                    "statistics are not linearly independent modulo kappa(y)-kappa(x)-c"
                )
        C.setflags(write=False)
        F.setflags(write=False)
        self.graph = graph
        self.C = C
        self.F = F

    @property
    def K(self) -> int:
        return self.F.shape[0]

    def log_weights(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != self.K:
            raise InputError(f"theta must have length {self.K}, got {theta.shape[0]}")
        return self.C + theta @ self.F

    def at(self, theta, tol: float = perron.DEFAULT_TOL, warm: "ThetaPoint | None" = None) -> "ThetaPoint":
        return at(self, theta, tol=tol, warm=warm)


@dataclass(frozen=True)
class ThetaPoint:
    family: ExpFamily
    theta: np.ndarray
    solution: KernelSolution

    @property
    def psi(self) -> float:
        return self.solution.eigen.psi

    @property
    def kappa(self) -> np.ndarray:
        return self.solution.eigen.kappa

    @property
    def w(self) -> np.ndarray:
        return self.solution.w

    @property
    def p(self) -> np.ndarray:
        return self.solution.p

    @property
    def pair(self) -> np.ndarray:
        return self.solution.pair


def at(fam: ExpFamily, theta, tol: float = perron.DEFAULT_TOL, warm: ThetaPoint | None = None) -> ThetaPoint:
    """Evaluate the family member at ``theta``.  ``warm`` (a nearby point)
    seeds the eigen-iterations."""
    theta = np.array(theta, dtype=float).reshape(-1)
    f = NonnegMatrix(fam.graph, fam.log_weights(theta))
    kw = {}
    if warm is not None:
        kw = dict(gamma0=warm.solution.eigen.gamma, beta0=warm.solution.eigen.beta)
    sol = perron.kernel_from_eigen(f, perron.solve(f, tol=tol, **kw))
    theta.setflags(write=False)
    return ThetaPoint(fam, theta, sol)


def mean_map(pt: ThetaPoint) -> np.ndarray:
    """Stationary expectations ``E[F_k]`` under the pair law; equals grad psi."""
    return pt.family.F @ pt.pair


def score_functions(pt: ThetaPoint, step: float = FISHER_STEP) -> np.ndarray:
    """``d/dtheta_k log w_theta`` on every edge, shape ``(K, n_edges)``.

    ``d kappa`` comes from central differences of ``kappa_theta`` (gauge
    ``kappa(last) = 0``); ``d psi`` is the exact mean map.
    """
    fam = pt.family
    g = fam.graph
    dpsi = mean_map(pt)
    out = np.empty_like(fam.F)
    for k in range(fam.K):
        e = np.zeros(fam.K)
        e[k] = step
        kp = at(fam, pt.theta + e, warm=pt).kappa
        km = at(fam, pt.theta - e, warm=pt).kappa
        dk = (kp - km) / (2 * step)
        out[k] = fam.F[k] + dk[g.edge_dst] - dk[g.edge_src] - dpsi[k]
    return out


def fisher(pt: ThetaPoint, step: float = FISHER_STEP) -> np.ndarray:
    """Fisher information ``G_kl = sum pair * s_k * s_l``, the Hessian of psi."""
    S = score_functions(pt, step=step)
    G = (S * pt.pair) @ S.T
    return 0.5 * (G + G.T)
