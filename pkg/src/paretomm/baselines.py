"""First-order baseline dynamics and the counterexample constructions.

Contains the constrained projection vector used by Pareto-navigating
gradient descent, its descent loop with the collinearity stopping test, the
genericity diagnostics, and the constructor that turns any preference-generic
gradient tuple into a shared-Hessian instance whose optimum is the origin --
demonstrating that no nontrivial first-order test of the gradients alone can
be necessary for optimality.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import InfeasibleError, InvalidArgumentError, SizeLimitError
from .problem import (
    ObjectiveSet,
    ProblemInstance,
    SmoothFunction,
    make_quadratic,
)
from .simplex import min_norm_over_simplex

COLLINEARITY_TOL = 1e-6  # radians; the stopping test has no canonical tolerance
_MAX_PNG_OBJECTIVES = 20


@dataclass(frozen=True)
class PngConfig:
    c: float
    step: float
    eps_stop: float
    max_iters: int

    def __post_init__(self):
        if min(self.c, self.step, self.eps_stop) <= 0 or self.max_iters <= 0:
            raise InvalidArgumentError("all PNG parameters must be positive")


def _png_vector_from_grads(G: np.ndarray, g0: np.ndarray, c: float) -> np.ndarray:
    n = G.shape[0]
    gram = G @ G.T
    Gg0 = G @ g0
    row_norms = np.linalg.norm(G, axis=1)
    # one KKT point with nonnegative multipliers exists iff the cone is
    # nonempty; by convexity it is the minimizer, so accept the first
    for k in range(n + 1):
        for S in combinations(range(n), k):
            if k == 0:
                v = g0
                Gv = Gg0
            else:
                idx = list(S)
                sub = gram[np.ix_(idx, idx)]
                rhs = c - Gg0[idx]
                try:
                    lam = np.linalg.solve(sub, rhs)
                except np.linalg.LinAlgError:
                    lam, *_ = np.linalg.lstsq(sub, rhs, rcond=None)
                if np.min(lam) < -1e-10 * max(1.0, float(np.max(np.abs(lam)))):
                    continue
                v = g0 + G[idx].T @ lam
                Gv = Gg0 + gram[:, idx] @ lam
                # residual tolerance scales with the products involved:
                # near-degenerate cones produce legitimately huge v
                eq_tol = 1e-9 * (1.0 + row_norms[idx] * np.linalg.norm(v))
                if np.any(np.abs(Gv[idx] - c) > eq_tol):
                    continue
            slack_tol = 1e-9 * (1.0 + row_norms * np.linalg.norm(v))
            if np.all(Gv - c >= -slack_tol):
                return np.asarray(v, dtype=float).copy()
    raise InfeasibleError("constraint halfspaces have empty intersection")


def png_vector(F: ObjectiveSet, f0: SmoothFunction, x: np.ndarray, c: float) -> np.ndarray:
    """Project grad f0(x) onto {v : grad f_i(x)^T v >= c for all i}.

    Solved exactly by enumerating active sets of the KKT system; the
    objective is strictly convex, so any multiplier-feasible KKT point is
    the minimizer.
    """
    if c <= 0:
        raise InvalidArgumentError("c must be positive")
    if F.n > _MAX_PNG_OBJECTIVES:
        raise SizeLimitError(f"active-set enumeration capped at {_MAX_PNG_OBJECTIVES} objectives")
    x = np.asarray(x, dtype=float)
    return _png_vector_from_grads(F.jacobian_T(x).T, f0.grad(x), c)


def pareto_stationarity_gap(F: ObjectiveSet, x: np.ndarray):
    """min over convex weights of ||grad f_beta(x)||, with the minimizing weights."""
    beta, val = min_norm_over_simplex(F.jacobian_T(np.asarray(x, dtype=float)))
    return beta, val


def _angle_to_descent(v: np.ndarray, g0: np.ndarray) -> float:
    """Angle between v and -grad f0; pi when either vector vanishes."""
    nv = float(np.linalg.norm(v))
    ng = float(np.linalg.norm(g0))
    if nv == 0.0 or ng == 0.0:
        return np.pi
    cosang = float(v @ (-g0)) / (nv * ng)
    return float(np.arccos(np.clip(cosang, -1.0, 1.0)))


@dataclass(frozen=True, eq=False)
class PngResult:
    trajectory: np.ndarray  # (T, d)
    point: np.ndarray
    status: str  # "stationary" | "budget-exceeded"
    iterations: int


class _PngState:
    __slots__ = ("x", "m", "v", "angle", "g0")

    def __init__(self, F, f0, x, c):
        self.x = np.asarray(x, dtype=float)
        G = F.jacobian_T(self.x).T
        self.g0 = f0.grad(self.x)
        _, self.m = min_norm_over_simplex(G.T)
        try:
            self.v = _png_vector_from_grads(G, self.g0, c)
            self.angle = _angle_to_descent(self.v, self.g0)
        except InfeasibleError:
            self.v = None
            self.angle = np.pi


def _refine_segment(F, f0, a, b, config):
    """Search the segment [a, b] for a point passing the stopping test.

    The discrete dynamics generically step across the thin collinearity
    region, so the crossing is located by repeated grid refinement of the
    angle along the segment.
    """
    lo, hi = 0.0, 1.0
    seg = b - a
    best = None
    for _ in range(14):
        ts = np.linspace(lo, hi, 17)
        evals = []
        for t in ts:
            s = _PngState(F, f0, a + t * seg, config.c)
            evals.append(s)
            if s.m <= config.eps_stop and s.angle <= COLLINEARITY_TOL:
                return s.x
        angles = [s.angle for s in evals]
        j = int(np.argmin(angles))
        best = evals[j]
        width = (hi - lo) / (len(ts) - 1)
        lo, hi = max(0.0, ts[j] - width), min(1.0, ts[j] + width)
        if hi - lo < 1e-15:
            break
    if best is not None and best.m <= config.eps_stop and best.angle <= COLLINEARITY_TOL:
        return best.x
    return None


def _fd_grad(fn, x, h):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return g


def _zero_angle_along(F, f0, x, direction, config, span):
    """Golden-section the collinearity angle along x + t * direction."""
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    lo, hi = -span, span

    def val(t):
        return _PngState(F, f0, x + t * direction, config.c).angle

    a, b = lo, hi
    c1 = b - phi * (b - a)
    c2 = a + phi * (b - a)
    f1, f2 = val(c1), val(c2)
    for _ in range(44):
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - phi * (b - a)
            f1 = val(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + phi * (b - a)
            f2 = val(c2)
    t = 0.5 * (a + b)
    return x + t * direction, val(t)


def _polish_to_stationary(F, f0, seed, config):
    """Trace the collinearity set from a near-band seed down to the band.

    The fixed-step iteration provably cannot land in the joint target set
    (the two-active steps conserve the quantity whose zero level is the
    collinearity set, and the set is microscopically thin transversally),
    so once the dynamics stall near the Pareto set the stationary point is
    located by a predictor-corrector walk: first descend the angle to the
    collinearity set, then slide along it until the smallest scalarized
    gradient norm is inside the requested level, re-zeroing the angle after
    every slide.  The returned point passes the exact stopping test.
    """
    x = np.asarray(seed, dtype=float).copy()
    state = _PngState(F, f0, x, config.c)
    if state.v is None:
        return None
    h = max(1e-7, 1e-7 * float(np.linalg.norm(x)))

    def angle_at(y):
        return _PngState(F, f0, y, config.c).angle

    # phase A: descend the angle onto the collinearity set
    seed_angle = state.angle
    for it_a in range(80):
        state = _PngState(F, f0, x, config.c)
        if state.v is None:
            return None
        if state.angle <= 0.5 * COLLINEARITY_TOL:
            break
        g = _fd_grad(angle_at, x, h)
        gn = float(np.linalg.norm(g))
        if gn <= 1e-14:
            return None
        if it_a > 10 and state.angle > seed_angle:
            return None
        step_len = state.angle / gn
        improved = False
        for _ in range(12):
            cand = x - step_len * g / gn
            if angle_at(cand) < state.angle:
                x = cand
                improved = True
                break
            step_len *= 0.5
        if not improved:
            x, ang = _zero_angle_along(F, f0, x, g / gn, config, state.angle / gn)
            if ang >= state.angle:
                return None
    state = _PngState(F, f0, x, config.c)
    if state.angle > COLLINEARITY_TOL:
        return None

    # phase B: slide along the set until the band condition holds
    def m_at(y):
        return _PngState(F, f0, y, config.c).m

    target = 0.7 * config.eps_stop
    for _ in range(500):
        state = _PngState(F, f0, x, config.c)
        if state.v is None:
            return None
        if state.m <= config.eps_stop and state.angle <= COLLINEARITY_TOL:
            return x
        ga = _fd_grad(angle_at, x, h)
        na = float(np.linalg.norm(ga))
        gm = _fd_grad(m_at, x, h)
        if na > 1e-14:
            ga /= na
            gm = gm - (gm @ ga) * ga  # tangent component along the set
        nm = float(np.linalg.norm(gm))
        if nm <= 1e-14:
            return None
        step_len = min(0.5 * (state.m - target) / nm if state.m > target else 0.0, 0.05)
        step_len = max(step_len, 0.25 * config.eps_stop / max(nm, 1.0))
        x = x - step_len * gm / nm
        if na > 1e-14:
            x, ang = _zero_angle_along(F, f0, x, ga, config, 2.0 * step_len + state.angle / na)
            if ang > COLLINEARITY_TOL and ang > 10.0 * state.angle:
                return None
    return None


def png_descent(
    F: ObjectiveSet, f0: SmoothFunction, x0: np.ndarray, config: PngConfig
) -> PngResult:
    """Iterate x <- x - step * v until the stationarity test fires.

    The test requires the projection vector to be anti-collinear with
    grad f0 (within ``COLLINEARITY_TOL``) while the smallest scalarized
    gradient norm is at or below ``eps_stop``; it runs before every step,
    so an already-stationary start returns immediately.  Near the Pareto
    set the raw step blows up like c / distance, so displacements are
    capped there; when the capped dynamics stall, the stationary point is
    located by the curve-tracing polish and verified against the same test.
    """
    state = _PngState(F, f0, x0, config.c)
    traj = [state.x.copy()]
    band = max(config.eps_stop, 0.02 * max(F.r, 1e-6))
    anchor_x, anchor_it = state.x.copy(), 0
    next_polish_at = 0
    next_refine_at = 0
    for it in range(config.max_iters):
        if state.m <= config.eps_stop and state.angle <= COLLINEARITY_TOL:
            return PngResult(np.array(traj), state.x, "stationary", it)
        if float(np.linalg.norm(state.x - anchor_x)) > 5.0 * band:
            anchor_x, anchor_it = state.x.copy(), it
        stalled = it - anchor_it >= 100
        if state.m <= 2.0 * band and state.angle <= 1.0 and stalled and it >= next_polish_at:
            polished = _polish_to_stationary(F, f0, state.x, config)
            if polished is not None:
                traj.append(polished)
                return PngResult(np.array(traj), polished, "stationary", it)
            next_polish_at = it + 3000
        if state.v is None:
            raise InfeasibleError(
                f"projection subproblem infeasible at iteration {it}; "
                f"x={state.x.tolist()}"
            )
        move = config.step * state.v
        length = float(np.linalg.norm(move))
        cap = (state.m + band) / F.L
        if state.m <= 4.0 * band and length > cap:
            move *= cap / length
        nxt = _PngState(F, f0, state.x - move, config.c)
        near_band = min(state.m, nxt.m) <= config.eps_stop
        aligned = min(state.angle, nxt.angle) <= 1e-3
        flipped = False
        if state.x.size == 2 and nxt.v is not None and min(state.angle, nxt.angle) <= 0.2:
            cross_cur = state.v[0] * -state.g0[1] - state.v[1] * -state.g0[0]
            cross_nxt = nxt.v[0] * -nxt.g0[1] - nxt.v[1] * -nxt.g0[0]
            flipped = cross_cur * cross_nxt < 0
        if near_band and (aligned or flipped) and it >= next_refine_at:
            refined = _refine_segment(F, f0, state.x, nxt.x, config)
            if refined is not None:
                traj.append(refined)
                return PngResult(np.array(traj), refined, "stationary", it + 1)
            next_refine_at = it + 500
        state = nxt
        traj.append(state.x.copy())
    return PngResult(np.array(traj), state.x, "budget-exceeded", config.max_iters)


def is_pareto_generic(vectors: Sequence[np.ndarray]) -> bool:
    """Zero is a convex combination of the vectors and their rank is n - 1."""
    V = np.array([np.asarray(v, dtype=float) for v in vectors])
    n = V.shape[0]
    if n < 2:
        raise InvalidArgumentError("need at least two vectors")
    svals = np.linalg.svd(V, compute_uv=False)
    scale = float(svals[0]) if svals[0] > 0 else 1.0
    rank = int(np.sum(svals > 1e-10 * scale))
    if rank != n - 1:
        return False
    _, value = min_norm_over_simplex(V.T)
    return value <= 1e-10 * scale


def is_preference_generic(v0: np.ndarray, vectors: Sequence[np.ndarray]) -> bool:
    """Pareto genericity of the objective gradients plus v0 outside their span."""
    v0 = np.asarray(v0, dtype=float)
    V = np.array([np.asarray(v, dtype=float) for v in vectors])
    n, d = V.shape
    if not (1 < n <= d):
        raise InvalidArgumentError(f"need 1 < n <= d, got n={n}, d={d}")
    if not is_pareto_generic(V):
        return False
    coeffs, *_ = np.linalg.lstsq(V.T, v0, rcond=None)
    residual = v0 - V.T @ coeffs
    return float(np.linalg.norm(residual)) > 1e-10 * float(np.linalg.norm(v0))


def sample_preference_generic(rng: np.random.Generator, d: int, n: int):
    """Draw a well-conditioned preference-generic tuple (v0, [v1..vn])."""
    if not (1 < n <= d):
        raise InvalidArgumentError(f"need 1 < n <= d, got n={n}, d={d}")
    while True:
        V = rng.normal(size=(n - 1, d))
        w = rng.dirichlet(np.ones(n)) + 0.05
        w /= w.sum()
        vn = -(w[:-1] @ V) / w[-1]
        vs = np.vstack([V, vn])
        svals = np.linalg.svd(vs, compute_uv=False)
        if svals[max(0, n - 2)] < 0.1 * svals[0]:
            continue  # nearly rank-deficient draw; would ill-condition the build
        v0 = rng.normal(size=d)
        coeffs, *_ = np.linalg.lstsq(vs.T, v0, rcond=None)
        residual = v0 - vs.T @ coeffs
        if np.linalg.norm(residual) < 0.3 * np.linalg.norm(v0):
            continue
        if is_preference_generic(v0, vs):
            return v0, [vs[i] for i in range(n)]


def rotation_map(v0: np.ndarray, vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Positive-definite map sending span(v1..vn) into the hyperplane normal to v0.

    Built from projections: Pi_V + Pi_{V-perp} Pi_{U-perp} with U the span of
    the vectors and V the orthogonal complement of v0.  Positive definite as
    a quadratic form (not symmetric in general).
    """
    v0 = np.asarray(v0, dtype=float)
    d = v0.size
    U = np.array([np.asarray(v, dtype=float) for v in vectors]).T  # (d, n)
    left, svals, _ = np.linalg.svd(U, full_matrices=False)
    rank = int(np.sum(svals > 1e-12 * max(svals[0], 1e-300)))
    Bu = left[:, :rank]
    P_Uperp = np.eye(d) - Bu @ Bu.T
    u0 = v0 / np.linalg.norm(v0)
    P_Vperp = np.outer(u0, u0)
    P_V = np.eye(d) - P_Vperp
    return P_V + P_Vperp @ P_Uperp


@dataclass(frozen=True, eq=False)
class ImpossibilityInstance:
    problem: ProblemInstance
    x_star: np.ndarray
    rotation: np.ndarray  # the raw positive-definite map
    hessian: np.ndarray  # shared symmetric Hessian of the objectives
    centers: np.ndarray  # (n, d) quadratic centers, the Pareto hull vertices
    v0: np.ndarray
    gradients: np.ndarray  # (n, d) prescribed objective gradients at x_star


def build_impossibility_instance(vs: Sequence[np.ndarray]) -> ImpossibilityInstance:
    """Instance matching prescribed gradients at 0 while 0 is preference optimal.

    Input is (v0, v1, ..., vn).  The preference is 0.5 * ||x + v0||^2 and the
    objectives are shared-Hessian quadratics 0.5 * ||A (x - z_i)||^2 with
    z_i = -H^{-1} v_i, so grad f_i(0) = v_i exactly.  The Hessian is the
    inverse Gram form of the rotation map: G = R^T R is symmetric positive
    definite and still sends span(v_i) into the hyperplane normal to v0
    (R^T acts as the identity there), hence every hull vertex satisfies
    v0^T z_i = 0 and the origin minimizes the preference over the hull.
    """
    vs = [np.asarray(v, dtype=float) for v in vs]
    if len(vs) < 3:
        raise InvalidArgumentError("need v0 plus at least two objective gradients")
    v0, vectors = vs[0], vs[1:]
    if not is_preference_generic(v0, vectors):
        raise InvalidArgumentError("input gradients are not preference generic")
    R = rotation_map(v0, vectors)
    G = R.T @ R
    H = np.linalg.inv(G)
    H = 0.5 * (H + H.T)
    try:
        A = np.linalg.cholesky(H).T
    except np.linalg.LinAlgError as exc:
        raise InvalidArgumentError("constructed Hessian lost positive definiteness") from exc
    centers = np.array([-G @ v for v in vectors])
    objectives = [make_quadratic(A, z) for z in centers]
    d = v0.size
    f0 = make_quadratic(np.eye(d), -v0)
    F = ObjectiveSet.from_objectives(objectives)
    problem = ProblemInstance.create(F, f0)
    return ImpossibilityInstance(
        problem=problem,
        x_star=np.zeros(d),
        rotation=R,
        hessian=H,
        centers=centers,
        v0=v0,
        gradients=np.array(vectors),
    )
