"""Markov I-projection by convex dual minimization.

The unique kernel in the intersection of an exponential family ``E`` and the
moment set ``M(mu) = {w : E_w[F_k] = mu_k}`` has natural parameter

    theta* = argmin_theta  psi(theta) - <theta, mu>

whose gradient is ``mean_map(theta) - mu``.  The minimization uses BFGS
with a backtracking Armijo line search started at ``theta = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expfam
from .exceptions import ConvergenceError, InputError, UnattainableMomentsError
from .expfam import ExpFamily, ThetaPoint

ARMIJO_C1 = 1e-4
SHRINK = 0.5
MAX_BACKTRACK = 60
THETA_BOUND = 1e4
# max-norm of the dual gradient (moment mismatch) at termination
DEFAULT_TOL = 1e-11
MAX_STEP = 10.0
# exp(-LOG_SPREAD_LIMIT) is near the smallest normal double; beyond it some
# kernel entries underflow and the moments are numerically on the boundary
LOG_SPREAD_LIMIT = 700.0
# trial points past this are not evaluated (weights would underflow to 0)
LOG_SPREAD_REJECT = 740.0
STOP_RULES = ("gradient", "reduction")


@dataclass
class ProjectionProblem:
    """Target moments ``mu`` for the statistics of ``family``.

    ``stop_rule="gradient"`` stops once ``max|grad| <= tol``.
    ``stop_rule="reduction"`` stops once an accepted step lowers the objective
    by less than ``ftol`` (the classic rule; it can stop early on flat
    stretches, so the gradient norm is still reported).
    """

    family: ExpFamily
    mu: np.ndarray
    tol: float = DEFAULT_TOL
    max_iter: int = 500
    ftol: float = 1e-12
    stop_rule: str = "gradient"
    fisher_init: bool = False
    theta_bound: float = THETA_BOUND
    theta0: np.ndarray | None = None

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float).reshape(-1)
        if self.mu.shape[0] != self.family.K:
            raise InputError(f"mu must have length {self.family.K}, got {self.mu.shape[0]}")
        if self.stop_rule not in STOP_RULES:
            raise InputError(f"stop_rule must be one of {STOP_RULES}")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if int(self.max_iter) < 1:
            raise InputError("max_iter must be >= 1")


@dataclass(frozen=True)
class ProjectionResult:
    theta_star: np.ndarray
    point: ThetaPoint
    objective: float
    grad_norm: float
    iterations: int
    n_evaluations: int
    stop_reason: str
    history: list = field(default_factory=list, repr=False)

    def metadata(self, prob: ProjectionProblem | None = None) -> dict:
        meta = {
            "iterations": self.iterations,
            "evaluations": self.n_evaluations,
            "grad_norm": self.grad_norm,
            "objective": self.objective,
            "stop_reason": self.stop_reason,
            "optimizer": "bfgs-armijo",
        }
        if prob is not None:
            meta.update(tol=prob.tol, ftol=prob.ftol, max_iter=prob.max_iter, stop_rule=prob.stop_rule)
        return meta


def _evaluate(prob: ProjectionProblem, theta, warm=None):
    pt = expfam.at(prob.family, theta, warm=warm)
    value = pt.psi - float(theta @ prob.mu)
    grad = expfam.mean_map(pt) - prob.mu
    return pt, value, grad


def objective_and_gradient(prob: ProjectionProblem, theta):
    """``(psi(theta) - <theta, mu>, mean_map(theta) - mu)``."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    _, value, grad = _evaluate(prob, theta)
    return value, grad


def _spread(prob, theta) -> float:
    lw = prob.family.log_weights(theta)
    return float(lw.max() - lw.min())


def _check_bound(prob, theta, gnorm, it):
    if np.max(np.abs(theta)) > prob.theta_bound:
        bad = [int(k) for k in np.flatnonzero(np.abs(theta) > prob.theta_bound)]
        raise UnattainableMomentsError(
            f"target moments unattainable: |theta| exceeded {prob.theta_bound:g} "
            f"in components {bad}",
            components=bad,
            residual=gnorm,
            iterations=it,
        )
    if _spread(prob, theta) > LOG_SPREAD_LIMIT:
        bad = [int(k) for k in np.argsort(-np.abs(theta))[:1]]
        raise UnattainableMomentsError(
            f"target moments unattainable: kernel log-weights span more than "
            f"{LOG_SPREAD_LIMIT:g} (largest |theta| in component {bad[0]})",
            components=bad,
            residual=gnorm,
            iterations=it,
        )


def project(prob: ProjectionProblem) -> ProjectionResult:
    """Minimize the dual objective; see :class:`ProjectionProblem`.

    Raises
    ------
    UnattainableMomentsError
        ``theta`` escaped the box ``theta_bound`` (``mu`` outside or on the
        boundary of the attainable moment set).
    ConvergenceError
        ``max_iter`` reached or the line search stalled above ``tol``.
    """
    K = prob.family.K
    theta = np.zeros(K) if prob.theta0 is None else np.asarray(prob.theta0, float).copy()
    pt, f, g = _evaluate(prob, theta)
    n_eval = 1
    history = [f]
    if prob.fisher_init and K:
        Hinv = np.linalg.inv(expfam.fisher(pt))
        scaled = True
    else:
        Hinv = np.eye(K)
        scaled = False
    # slack for floating-point noise in psi near the optimum
    noise = 8 * np.finfo(float).eps

    it = 0
    reason = None
    while True:
        gnorm = float(np.max(np.abs(g))) if K else 0.0
        if gnorm <= prob.tol:
            reason = "gradient"
            break
        if it >= prob.max_iter:
            raise ConvergenceError(
                f"no convergence after {it} iterations (gradient max-norm {gnorm:.3e}); "
                "target moments may be near the boundary of the attainable set",
                residual=gnorm,
                iterations=it,
            )
        it += 1
        d = -Hinv @ g
        slope = float(g @ d)
        if not slope < 0:
            Hinv = np.eye(K)
            d = -g
            slope = -float(g @ g)

        # trial points far out make the eigenproblem badly scaled
        t = min(1.0, MAX_STEP / float(np.max(np.abs(d))))
        accepted = None
        for _ in range(MAX_BACKTRACK):
            trial = theta + t * d
            tpt = None
            if _spread(prob, trial) <= LOG_SPREAD_REJECT:
                try:
                    tpt, tf, tg = _evaluate(prob, trial, warm=pt)
                except ConvergenceError:
                    pass
                n_eval += 1
            if tpt is not None and tf <= f + ARMIJO_C1 * t * slope + noise * max(1.0, abs(f)):
                accepted = (trial, tpt, tf, tg)
                break
            t *= SHRINK
        if accepted is None:
            raise ConvergenceError(
                f"line search stalled at iteration {it} (gradient max-norm {gnorm:.3e})",
                residual=gnorm,
                iterations=it,
            )
        new_theta, pt, new_f, new_g = accepted
        s = new_theta - theta
        y = new_g - g
        sy = float(s @ y)
        if sy > 1e-300:
            if not scaled:
                Hinv = np.eye(K) * (sy / float(y @ y))
                scaled = True
            rho = 1.0 / sy
            V = np.eye(K) - rho * np.outer(s, y)
            Hinv = V @ Hinv @ V.T + rho * np.outer(s, s)
        reduction = f - new_f
        theta, f, g = new_theta, new_f, new_g
        history.append(f)
        _check_bound(prob, theta, float(np.max(np.abs(g))), it)
        if prob.stop_rule == "reduction" and reduction < prob.ftol:
            reason = "reduction"
            break

    theta.setflags(write=False)
    return ProjectionResult(
        theta_star=theta,
        point=pt,
        objective=float(f),
        grad_norm=float(np.max(np.abs(g))) if K else 0.0,
        iterations=it,
        n_evaluations=n_eval,
        stop_reason=reason,
        history=history,
    )
