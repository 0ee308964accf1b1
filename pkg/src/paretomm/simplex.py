"""Simplex geometry: projection, stationarity gaps, and quadratic minimization.

The simplex is treated as a metric space under the l1 norm.  Stationarity of
a smooth function at beta is measured by the l1-normalized gap
max(0, sup_{beta'} -v^T (beta' - beta) / ||beta' - beta||_1), which reduces
to a maximum over the vertices.  The projected-gradient solver additionally
controls the stricter l2 tangent-cone gap, so both notions hold at its
returned tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import BudgetExceededError, InvalidArgumentError


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """Convex-weight vector: nonnegative entries summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        if w.ndim != 1 or w.size == 0:
            raise InvalidArgumentError("weights must be a nonempty vector")
        if np.min(w) < -1e-9:
            raise InvalidArgumentError(f"negative weight {np.min(w)}")
        w = np.maximum(w, 0.0)
        s = w.sum()
        if s <= 0:
            raise InvalidArgumentError("weights sum to zero")
        w /= s
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.size

    @staticmethod
    def uniform(n: int) -> "SimplexPoint":
        return SimplexPoint(np.full(n, 1.0 / n))

    @staticmethod
    def vertex(n: int, j: int) -> "SimplexPoint":
        w = np.zeros(n)
        w[j] = 1.0
        return SimplexPoint(w)


def project_to_simplex(y: np.ndarray) -> SimplexPoint:
    """Euclidean projection onto the simplex by sort and threshold."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise InvalidArgumentError("y must be a nonempty vector")
    u = np.sort(y)[::-1]
    cumsum = np.cumsum(u)
    ks = np.arange(1, y.size + 1)
    cond = u - (cumsum - 1.0) / ks > 0
    rho = int(np.nonzero(cond)[0][-1])
    tau = (cumsum[rho] - 1.0) / (rho + 1.0)
    return SimplexPoint(np.maximum(y - tau, 0.0))


def l1_stationarity_gap(v: np.ndarray, beta: SimplexPoint) -> float:
    """Smallest eps with -v^T (beta' - beta) <= eps ||beta' - beta||_1 on the simplex.

    The feasible directions form the cone {u : sum u = 0, u_j >= 0 where
    beta_j = 0}; on its unit l1 ball the extreme points are (e_i - e_j)/2
    with j restricted to the positive coordinates, so the supremum is a
    maximum over coordinate pairs.
    """
    v = np.asarray(v, dtype=float)
    w = beta.weights
    if v.shape != w.shape:
        raise InvalidArgumentError("v and beta dimensions disagree")
    free = w > 1e-14
    if not np.any(free):
        return 0.0
    return max(0.0, 0.5 * (float(np.max(v[free])) - float(np.min(v))))


def _project_tangent_cone(q: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Project q onto {u : sum u = 0, u_i >= 0 for i in active}.

    The projection lies on a face where some subset of the active
    coordinates is pinned to zero; enumerate those subsets and keep the
    nearest feasible candidate.
    """
    n = q.size
    act = [int(i) for i in np.nonzero(active)[0]]
    best = None
    best_dist = np.inf
    for k in range(len(act) + 1):
        for pinned in combinations(act, k):
            free = np.ones(n, dtype=bool)
            free[list(pinned)] = False
            m = int(free.sum())
            if m == 0:
                u = np.zeros(n)
            else:
                u = np.zeros(n)
                u[free] = q[free] - q[free].sum() / m
            if np.any(u[act] < -1e-13):
                continue
            dist = float(np.linalg.norm(u - q))
            if dist < best_dist:
                best_dist = dist
                best = u
    return best if best is not None else np.zeros(n)


def l2_tangent_gap(v: np.ndarray, beta: SimplexPoint) -> float:
    """Norm of the negative gradient projected onto the tangent cone at beta."""
    v = np.asarray(v, dtype=float)
    w = beta.weights
    active = w <= 1e-14
    proj = _project_tangent_cone(-v, active)
    return float(np.linalg.norm(proj))


@dataclass(frozen=True, eq=False)
class SimplexQuadratic:
    """Isotropic quadratic in relative form around its anchor.

    value(beta') = offset + linear^T (beta' - anchor)
                   + 0.5 * curvature * ||beta' - anchor||_2^2
    """

    anchor: SimplexPoint
    linear: np.ndarray
    curvature: float
    offset: float = 0.0

    def __post_init__(self):
        if self.curvature <= 0:
            raise InvalidArgumentError("curvature must be positive")
        lin = np.asarray(self.linear, dtype=float)
        if lin.shape != self.anchor.weights.shape:
            raise InvalidArgumentError("linear term and anchor dimensions disagree")
        object.__setattr__(self, "linear", lin)

    def value_at(self, beta: SimplexPoint) -> float:
        d = beta.weights - self.anchor.weights
        return self.offset + float(self.linear @ d) + 0.5 * self.curvature * float(d @ d)

    def grad_at(self, beta: SimplexPoint) -> np.ndarray:
        return self.linear + self.curvature * (beta.weights - self.anchor.weights)


def minimize_quadratic_over_simplex(
    Q: SimplexQuadratic, tol_gap: float, max_iters: int = 10_000
):
    """Projected gradient descent with step 1/curvature from the anchor.

    Stops when the l2 tangent-cone gap is at most ``tol_gap``; since the l2
    gap dominates the l1 gap, the returned point meets the tolerance in both
    senses.  Returns ``(point, achieved_gap)``.
    """
    if tol_gap <= 0:
        raise InvalidArgumentError("tol_gap must be positive")
    beta = Q.anchor
    value = Q.value_at(beta)
    best = (beta, np.inf)
    for _ in range(max_iters + 1):
        gap = l2_tangent_gap(Q.grad_at(beta), beta)
        if gap < best[1]:
            best = (beta, gap)
        if gap <= tol_gap:
            return beta, gap
        nxt = project_to_simplex(beta.weights - Q.grad_at(beta) / Q.curvature)
        nxt_value = Q.value_at(nxt)
        if nxt_value > value + 1e-12:
            # step 1/C on a C-smooth quadratic cannot ascend
            break
        beta, value = nxt, nxt_value
    raise BudgetExceededError(
        f"simplex solver stalled at gap {best[1]:.3e} (target {tol_gap:.3e})",
        best=best[0],
        metric=best[1],
    )


def min_norm_over_simplex(G: np.ndarray):
    """Minimize ||G beta||_2 over the simplex, exactly, by face enumeration.

    ``G`` is d x n.  On each face (a subset of coordinates pinned to zero)
    the minimizer solves an equality-constrained least-squares system; the
    global solution is the best feasible face minimizer.  Returns
    ``(SimplexPoint, norm)``.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    n = G.shape[1]
    if n == 0:
        raise InvalidArgumentError("G must have at least one column")
    best_beta = None
    best_val = np.inf
    idx = list(range(n))
    for m in range(n, 0, -1):
        for free in combinations(idx, m):
            Gf = G[:, list(free)]
            k = len(free)
            # KKT system for min ||Gf b||^2 subject to sum b = 1
            K = np.zeros((k + 1, k + 1))
            K[:k, :k] = Gf.T @ Gf
            K[:k, k] = 1.0
            K[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            b = sol[:k]
            if abs(b.sum() - 1.0) > 1e-9 or np.min(b) < -1e-12:
                continue
            beta = np.zeros(n)
            beta[list(free)] = np.maximum(b, 0.0)
            val = float(np.linalg.norm(G @ (beta / beta.sum())))
            if val < best_val:
                best_val = val
                best_beta = beta
    if best_beta is None:
        # vertices always qualify; fall back defensively
        vals = np.linalg.norm(G, axis=0)
        j = int(np.argmin(vals))
        return SimplexPoint.vertex(n, j), float(vals[j])
    return SimplexPoint(best_beta), best_val
