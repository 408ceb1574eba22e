import numpy as np
import pytest

from minmarkov.exceptions import ConvergenceError, InputError, UnattainableMomentsError
from minmarkov.expfam import ExpFamily, at, mean_map
from minmarkov.mininfo import binomial_marginal, family_for, inar1_dependence
from minmarkov.projection import ProjectionProblem, objective_and_gradient, project
from minmarkov.statespace import Digraph, StateSpace


def marginal_family(H):
    m = H.shape[0]
    return family_for(StateSpace.integers(m - 1), H, 1)


def test_independence_problem_closed_form():
    r = np.array([0.2, 0.3, 0.5])
    res = project(ProjectionProblem(marginal_family(np.zeros((3, 3))), -r[:2]))
    np.testing.assert_allclose(res.theta_star, np.log(r[2] / r[:2]), atol=1e-8)
    assert res.point.psi == pytest.approx(-np.log(r[2]), abs=1e-9)


def test_fixed_point_at_zero():
    rng = np.random.default_rng(0)
    g = Digraph.complete(StateSpace.integers(3))
    fam = ExpFamily(g, rng.standard_normal(16), rng.standard_normal((3, 16)))
    mu = mean_map(at(fam, np.zeros(3)))
    res = project(ProjectionProblem(fam, mu))
    assert res.iterations == 0
    np.testing.assert_array_equal(res.theta_star, 0)


def test_binomial_example_converges():
    fam = marginal_family(inar1_dependence(5, -1.0))
    res = project(ProjectionProblem(fam, -binomial_marginal(5, 0.4)[:5]))
    assert res.grad_norm <= 1e-9
    assert res.iterations < 200
    assert res.stop_reason == "gradient"


def test_objective_at_origin():
    rng = np.random.default_rng(1)
    g = Digraph.complete(StateSpace.integers(3))
    fam = ExpFamily(g, np.zeros(16), rng.standard_normal((2, 16)))
    value, grad = objective_and_gradient(ProjectionProblem(fam, np.zeros(2)), np.zeros(2))
    assert value == pytest.approx(np.log(4), abs=1e-14)
    np.testing.assert_allclose(grad, mean_map(at(fam, np.zeros(2))), atol=1e-15)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    g = Digraph.complete(StateSpace.integers(3))
    fam = ExpFamily(g, rng.standard_normal(16), rng.standard_normal((3, 16)))
    prob = ProjectionProblem(fam, rng.standard_normal(3))
    theta = rng.uniform(-1, 1, 3)
    _, grad = objective_and_gradient(prob, theta)
    h = 1e-5
    fd = np.array([
        (objective_and_gradient(prob, theta + h * e)[0] - objective_and_gradient(prob, theta - h * e)[0]) / (2 * h)
        for e in np.eye(3)
    ])
    np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-9)


def test_objective_is_convex_on_lines():
    rng = np.random.default_rng(3)
    g = Digraph.complete(StateSpace.integers(3))
    fam = ExpFamily(g, rng.standard_normal(16), rng.standard_normal((3, 16)))
    prob = ProjectionProblem(fam, rng.standard_normal(3) * 0.1)
    for _ in range(10):
        a, b = rng.uniform(-2, 2, (2, 3))
        fa, fm, fb = (objective_and_gradient(prob, t)[0] for t in (a, 0.5 * (a + b), b))
        assert fm <= 0.5 * (fa + fb) + 1e-12


def test_objective_history_is_monotone():
    fam = marginal_family(inar1_dependence(5, -1.0))
    res = project(ProjectionProblem(fam, -binomial_marginal(5, 0.4)[:5]))
    assert np.all(np.diff(res.history) <= 1e-12)


def test_reduction_stop_rule_and_fisher_start():
    fam = marginal_family(inar1_dependence(5, -1.0))
    mu = -binomial_marginal(5, 0.4)[:5]
    base = project(ProjectionProblem(fam, mu))
    red = project(ProjectionProblem(fam, mu, stop_rule="reduction"))
    fis = project(ProjectionProblem(fam, mu, fisher_init=True))
    assert red.stop_reason in ("reduction", "gradient")
    np.testing.assert_allclose(red.theta_star, base.theta_star, atol=1e-4)
    np.testing.assert_allclose(fis.theta_star, base.theta_star, atol=1e-7)


def test_iteration_budget():
    fam = marginal_family(inar1_dependence(5, -1.0))
    with pytest.raises(ConvergenceError) as ei:
        project(ProjectionProblem(fam, -binomial_marginal(5, 0.4)[:5], max_iter=2))
    assert ei.value.iterations == 2
    assert ei.value.residual > 1e-9


@pytest.mark.parametrize("mu", [[-1.5, -0.1], [0.1, -0.2], [-0.5, -0.6]])
def test_moments_outside_simplex_are_unattainable(mu):
    with pytest.raises(UnattainableMomentsError) as ei:
        project(ProjectionProblem(marginal_family(np.zeros((3, 3))), mu))
    assert ei.value.components


def test_theta_box_bound():
    with pytest.raises(UnattainableMomentsError):
        project(ProjectionProblem(marginal_family(np.zeros((3, 3))), [-1.5, -0.1], theta_bound=20.0))


def test_problem_validation():
    fam = marginal_family(np.zeros((3, 3)))
    with pytest.raises(InputError):
        ProjectionProblem(fam, [0.1])
    with pytest.raises(InputError):
        ProjectionProblem(fam, [-0.3, -0.3], stop_rule="nope")
    with pytest.raises(InputError):
        ProjectionProblem(fam, [-0.3, -0.3], tol=0)


def test_metadata_fields():
    fam = marginal_family(np.zeros((3, 3)))
    prob = ProjectionProblem(fam, [-0.3, -0.3])
    meta = project(prob).metadata(prob)
    for key in ("iterations", "grad_norm", "tol", "max_iter", "stop_reason"):
        assert key in meta
