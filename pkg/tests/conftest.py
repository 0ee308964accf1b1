import numpy as np
import pytest

from paretomm import (
    ObjectiveSet,
    ProblemInstance,
    make_log_cosh_quadratic,
    quadratic_from_hessian,
)
from paretomm.problem_io import (
    identity_pair_problem,
    png_counterexample_problem,
    problem_from_spec,
    random_problem_spec,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def identity_pair():
    """Identity-Hessian quadratics at -e1 and +e1, preference toward e2."""
    return identity_pair_problem()


@pytest.fixture
def png_instance():
    """Shared Hessian [[1,1],[1,2]], centers -e1/+e1, preference toward e2."""
    return png_counterexample_problem()


def random_spd(rng, d, eig_range=(0.5, 3.0)):
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    H = Q @ np.diag(rng.uniform(*eig_range, size=d)) @ Q.T
    return 0.5 * (H + H.T)


def random_quadratic_problem(rng, d=3, n=3, shared=False):
    return problem_from_spec(random_problem_spec(rng, d, n, shared_hessian=shared))


def random_logcosh_problem(rng, d=2, n=2, c=0.3):
    objectives = [
        make_log_cosh_quadratic(random_spd(rng, d), rng.normal(size=d), c) for _ in range(n)
    ]
    f0 = quadratic_from_hessian(random_spd(rng, d), rng.normal(size=d))
    return ProblemInstance.create(ObjectiveSet.from_objectives(objectives), f0)
