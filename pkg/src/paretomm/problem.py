"""Problem instances: smooth functions, objective sets, and derived constants.

An objective set holds n strongly convex objectives together with the
smoothness bundle (mu, L, L_H, r) that every solver bound is computed from.
The preference function is a separate smooth function with its own gradient
Lipschitz constant L0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, InvalidArgumentError

# Lipschitz constant of d/dt sech^2(t), attained at t = atanh(1/sqrt(3)).
LOG_COSH_HESS_LIPSCHITZ = 4.0 / (3.0 * np.sqrt(3.0))


@dataclass(frozen=True, eq=False)
class SmoothFunction:
    """Twice-differentiable scalar function on R^d with declared constants.

    ``mu``/``L``/``L_H`` are the strong convexity, gradient-Lipschitz and
    Hessian-Lipschitz constants; ``None`` means undeclared.  Declared
    constants are trusted (analytic families compute them exactly) and only
    spot-checked by the test suite.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    mu: Optional[float] = None
    L: Optional[float] = None
    L_H: Optional[float] = None
    minimizer_hint: Optional[np.ndarray] = None


def make_quadratic(A: np.ndarray, z: np.ndarray) -> SmoothFunction:
    """Quadratic f(x) = 0.5 * ||A (x - z)||^2 with Hessian H = A^T A.

    ``A`` must be full rank: smallest singular value > 1e-12 times the
    largest.  Constants are mu = lambda_min(H), L = lambda_max(H), L_H = 0.
    """
    A = np.asarray(A, dtype=float)
    z = np.asarray(z, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"A must be square, got shape {A.shape}")
    if A.shape[0] != z.shape[0]:
        raise InvalidArgumentError("A and z dimensions disagree")
    svals = np.linalg.svd(A, compute_uv=False)
    if svals[-1] <= 1e-12 * svals[0]:
        raise InvalidArgumentError("A is rank deficient")
    H = A.T @ A
    H = 0.5 * (H + H.T)
    eigs = np.linalg.eigvalsh(H)

    def value(x):
        d = np.asarray(x, dtype=float) - z
        Ad = A @ d
        return 0.5 * float(Ad @ Ad)

    def grad(x):
        return H @ (np.asarray(x, dtype=float) - z)

    def hess(x):
        return H

    return SmoothFunction(
        dim=z.shape[0],
        value=value,
        grad=grad,
        hess=hess,
        mu=float(eigs[0]),
        L=float(eigs[-1]),
        L_H=0.0,
        minimizer_hint=z.copy(),
    )


def quadratic_from_hessian(H: np.ndarray, z: np.ndarray) -> SmoothFunction:
    """Quadratic with a prescribed symmetric positive-definite Hessian."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidArgumentError(f"H must be square, got shape {H.shape}")
    if not np.allclose(H, H.T, atol=1e-12 * max(1.0, np.abs(H).max())):
        raise InvalidArgumentError("H must be symmetric")
    try:
        lower = np.linalg.cholesky(H)
    except np.linalg.LinAlgError as exc:
        raise InvalidArgumentError("H is not positive definite") from exc
    return make_quadratic(lower.T, z)


def _log_cosh(t: np.ndarray) -> np.ndarray:
    # log cosh(t) = |t| + log1p(exp(-2|t|)) - log 2, stable for large |t|
    a = np.abs(t)
    return a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0)


def make_log_cosh_quadratic(H: np.ndarray, z: np.ndarray, c: float) -> SmoothFunction:
    """Quadratic plus c * sum_i log cosh(x_i - z_i); still minimized at z.

    The perturbation is convex with Hessian diag(sech^2), so
    mu = lambda_min(H), L = lambda_max(H) + c, and the Hessian is Lipschitz
    with constant c * 4/(3*sqrt(3)).
    """
    if c < 0:
        raise InvalidArgumentError("c must be nonnegative")
    base = quadratic_from_hessian(H, z)
    z = np.asarray(z, dtype=float)
    Hm = np.asarray(H, dtype=float)

    def value(x):
        d = np.asarray(x, dtype=float) - z
        return 0.5 * float(d @ (Hm @ d)) + c * float(np.sum(_log_cosh(d)))

    def grad(x):
        d = np.asarray(x, dtype=float) - z
        return Hm @ d + c * np.tanh(d)

    def hess(x):
        d = np.asarray(x, dtype=float) - z
        return Hm + c * np.diag(1.0 / np.cosh(d) ** 2)

    return SmoothFunction(
        dim=z.shape[0],
        value=value,
        grad=grad,
        hess=hess,
        mu=base.mu,
        L=base.L + c,
        L_H=c * LOG_COSH_HESS_LIPSCHITZ,
        minimizer_hint=z.copy(),
    )


# Registry of non-quadratic families referenced by problem files.
BUILTIN_FUNCTIONS = {
    "log_cosh_quadratic": lambda params: make_log_cosh_quadratic(
        np.asarray(params["H"], dtype=float),
        np.asarray(params["z"], dtype=float),
        float(params.get("c", 1.0)),
    ),
}


def norm_1_2(M: np.ndarray) -> float:
    """l1 -> l2 operator norm of a d x n matrix: the largest column l2 norm."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[1] == 0:
        return 0.0
    return float(np.max(np.linalg.norm(M, axis=0)))


@dataclass(frozen=True, eq=False)
class ObjectiveSet:
    """The n objectives with their shared constant bundle and cached minimizers."""

    objectives: tuple
    mu: float
    L: float
    L_H: float
    minimizers: np.ndarray  # (n, d)
    r: float

    @property
    def n(self) -> int:
        return len(self.objectives)

    @property
    def dim(self) -> int:
        return self.objectives[0].dim

    @property
    def kappa(self) -> float:
        return self.L / self.mu

    def jacobian_T(self, x: np.ndarray) -> np.ndarray:
        """Transposed objective Jacobian: d x n matrix with columns grad f_i(x)."""
        return np.column_stack([f.grad(x) for f in self.objectives])

    @classmethod
    def from_objectives(cls, objectives: Sequence[SmoothFunction]) -> "ObjectiveSet":
        objectives = tuple(objectives)
        if len(objectives) < 1:
            raise InvalidArgumentError("need at least one objective")
        d = objectives[0].dim
        for i, f in enumerate(objectives):
            if f.dim != d:
                raise InvalidArgumentError(f"objective {i} has dim {f.dim}, expected {d}")
            if f.mu is None or f.L is None or f.L_H is None:
                raise ConfigurationError(f"objective {i} is missing declared constants")
            if not (0 < f.mu <= f.L):
                raise ConfigurationError(f"objective {i} must have 0 < mu <= L")
        mu = min(f.mu for f in objectives)
        L = max(f.L for f in objectives)
        L_H = max(f.L_H for f in objectives)

        from .manifold import minimize_function  # deferred: manifold imports this module

        mins = []
        for f in objectives:
            x0 = f.minimizer_hint if f.minimizer_hint is not None else np.zeros(d)
            res = minimize_function(f, x0, tol_grad=1e-10 * L, newton=True)
            mins.append(res.x)
        minimizers = np.array(mins)
        minimizers.setflags(write=False)
        r = 0.0
        for i in range(len(objectives)):
            for j in range(i + 1, len(objectives)):
                r = max(r, float(np.linalg.norm(minimizers[i] - minimizers[j])))
        return cls(objectives=objectives, mu=mu, L=L, L_H=L_H, minimizers=minimizers, r=r)


@dataclass(frozen=True)
class ConstantBundle:
    """Solver constants derived from (mu, L, L_H, r, L0).

    R_bound = sqrt(kappa) * r bounds the diameter of the set of scalarized
    minimizers; M0 and M1 are the Lipschitz constants of the weight-to-
    minimizer map and of its derivative; mu_g = n * L0 * M1 is the curvature
    of the quadratic upper bounds used by the outer solver.
    """

    R_bound: float
    M0: float
    M1: float
    mu_g: float


def derive_constants(F: ObjectiveSet, f0: SmoothFunction) -> ConstantBundle:
    """Evaluate the constant formulas; deterministic in the declared inputs."""
    if f0.L is None:
        raise ConfigurationError("preference function is missing its gradient Lipschitz constant")
    kappa = F.kappa
    R = np.sqrt(kappa) * F.r
    M0 = kappa * R
    M1 = 2.0 * kappa**2 * R * (1.0 + F.L_H * R / F.mu)
    mu_g = F.n * f0.L * M1
    return ConstantBundle(R_bound=float(R), M0=float(M0), M1=float(M1), mu_g=float(mu_g))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Objectives plus a preference function and the derived constant bundle."""

    F: ObjectiveSet
    f0: SmoothFunction
    bundle: ConstantBundle

    @classmethod
    def create(cls, F: ObjectiveSet, f0: SmoothFunction) -> "ProblemInstance":
        if f0.dim != F.dim:
            raise InvalidArgumentError(
                f"preference dim {f0.dim} does not match objective dim {F.dim}"
            )
        return cls(F=F, f0=f0, bundle=derive_constants(F, f0))


def scalarize(F: ObjectiveSet, beta) -> SmoothFunction:
    """Convex combination sum_i beta_i f_i with the bundle constants of F."""
    w = np.asarray(getattr(beta, "weights", beta), dtype=float)
    if w.shape != (F.n,):
        raise InvalidArgumentError(f"beta has {w.shape} weights, expected ({F.n},)")
    objectives = F.objectives

    def value(x):
        return float(sum(wi * f.value(x) for wi, f in zip(w, objectives)))

    def grad(x):
        g = np.zeros(F.dim)
        for wi, f in zip(w, objectives):
            g += wi * f.grad(x)
        return g

    def hess(x):
        H = np.zeros((F.dim, F.dim))
        for wi, f in zip(w, objectives):
            H += wi * f.hess(x)
        return H

    return SmoothFunction(
        dim=F.dim,
        value=value,
        grad=grad,
        hess=hess,
        mu=F.mu,
        L=F.L,
        L_H=F.L_H,
        minimizer_hint=w @ F.minimizers,
    )
