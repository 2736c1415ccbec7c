"""Trainers: the flip-loss (bound-minimizing) classifier, exact
low-dimensional zero-one ERM, and an L_q-regularized logistic baseline.

The flip-loss objective is

    Obj(h, z) = sum_n flip_k(arccos a_n),
    a_n = h . (x_n - z) y_n / (||h|| ||x_n - z||),

the sum of exact flip probabilities of the shifted, normalized margins
(no min(1, 2*.) cap: the cap only matters where it is flat and would
contribute no gradient).  It is scale-invariant in h, so models are
compared by angle.  The trainer runs Polak-Ribiere conjugate gradient
with Armijo backtracking on the mean objective, optimizing (h, z)
jointly; z is kept inside a ball around the midpoint of the class
centroids by projection, and the Armijo test is evaluated at the
projected candidate so accepted steps never increase the objective.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, gammaln

from .errors import DegenerateInputError, InvalidParameterError
from .flipkernel import flip_probability
from .model import LinearModel
from .projection import rng_stream

__all__ = [
    "TrainConfig",
    "objective",
    "gradients",
    "train_bound_minimizer",
    "train_erm_lowdim",
    "train_lq_logistic",
    "optimal_threshold",
]

# clamp keeping (1 - a^2)^((k-2)/2) and the angular projectors finite
_A_CLIP = 1.0 - 1e-9

# size caps for exact zero-one ERM (hyperplane enumeration cost)
EXACT_ERM_MAX_K = 3
EXACT_ERM_MAX_N = 200


@dataclass
class TrainConfig:
    k: int = 5
    max_iters: int = 300
    grad_tol: float = 1e-6
    restarts: int = 3
    r_shift: float | None = None  # None: 0.25 x distance between class centroids
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise InvalidParameterError("flip-loss training requires k >= 2")
        if self.grad_tol <= 0.0:
            raise InvalidParameterError("grad_tol must be positive")
        if self.restarts < 1:
            raise InvalidParameterError("restarts must be >= 1")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be >= 1")


def _shifted_margins(X, y, h, z):
    W = X - z
    norms = np.linalg.norm(W, axis=1)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise DegenerateInputError(
            f"point {int(bad[0])} coincides with the shift z; margins undefined"
        )
    hn = np.linalg.norm(h)
    if hn == 0.0:
        raise InvalidParameterError("weight vector h must be nonzero")
    a = (W @ h) * y / (hn * norms)
    return W, norms, hn, np.clip(a, -1.0, 1.0)


def objective(X, y, h, z, k: int) -> float:
    """Sum over points of the exact flip probability at the shifted
    normalized margin.  Scale-invariant in h."""
    if k < 2:
        raise InvalidParameterError("objective requires k >= 2")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _, _, _, a = _shifted_margins(X, y, np.asarray(h, float), np.asarray(z, float))
    return float(np.sum(flip_probability(k, a)))


def _flip_slope(k, a):
    # d flip_k / d a = -Gamma(k) / (2^(k-1) Gamma(k/2)^2) (1-a^2)^((k-2)/2)
    return -np.exp(
        gammaln(k) - (k - 1) * math.log(2.0) - 2.0 * gammaln(k / 2.0)
        + 0.5 * (k - 2) * np.log1p(-a * a)
    )


def gradients(X, y, h, z, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of `objective` w.r.t. h and z.

    grad_h lives in the tangent space of the direction h (the projector
    I - hh^T/||h||^2 annihilates h); each z-summand is orthogonal to its
    own x_n - z.  Margins are clamped to 1 - 1e-9 in magnitude so the
    projector formulas stay finite at a_n = +-1.
    """
    if k < 2:
        raise InvalidParameterError("gradients require k >= 2")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    W, norms, hn, a = _shifted_margins(X, y, h, z)
    hh = h / hn
    a = np.clip(a, -_A_CLIP, _A_CLIP)
    slope = _flip_slope(k, a)

    U = W * (y / norms)[:, None]
    s = U.T @ slope
    grad_h = (s - hh * (hh @ s)) / hn

    t = slope * y / norms
    proj = W @ hh
    grad_z = -(hh * np.sum(t)) + W.T @ (t * proj / norms ** 2)
    return grad_h, grad_z


def _class_centroids(X, y):
    pos = X[y > 0]
    neg = X[y < 0]
    if len(pos) == 0 or len(neg) == 0:
        raise InvalidParameterError("training requires both labels present")
    return pos.mean(axis=0), neg.mean(axis=0)


def _cg_minimize(X, y, k, h0, z0, center, radius, max_iters, grad_tol, callback=None):
    """Projected Polak-Ribiere CG with Armijo backtracking on the mean
    objective.  Returns (h, z, objective_mean, iterations)."""
    N, d = X.shape

    def project_z(v):
        dz = v[d:] - center
        nz = np.linalg.norm(dz)
        if radius == 0.0:
            v = v.copy()
            v[d:] = center
        elif nz > radius:
            v = v.copy()
            v[d:] = center + dz * (radius / nz)
        return v

    def fval(v):
        return objective(X, y, v[:d], v[d:], k) / N

    def gval(v):
        gh, gz = gradients(X, y, v[:d], v[d:], k)
        return np.concatenate([gh, gz]) / N

    v = project_z(np.concatenate([h0, z0]))
    f = fval(v)
    g = gval(v)
    p = -g
    iters = 0
    for iters in range(1, max_iters + 1):
        gnorm = np.linalg.norm(g)
        if gnorm <= grad_tol:
            iters -= 1
            break
        if p @ g >= 0.0:  # not a descent direction: restart
            p = -g
        accepted = False
        alpha = 1.0
        for _ in range(60):
            cand = project_z(v + alpha * p)
            fc = fval(cand)
            # Armijo on the realized (possibly projected) step; the
            # min(0, .) keeps accepted steps non-increasing even when
            # the ball projection bends the step uphill of p.
            if fc <= f + 1e-4 * min(0.0, g @ (cand - v)):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            if np.array_equal(p, -g):
                break  # no descent along steepest direction: converged
            p = -g
            continue
        if fc > f + 1e-12:
            raise AssertionError("accepted step increased the objective")
        g_new = gval(cand)
        beta = max(0.0, g_new @ (g_new - g) / (g @ g))
        p = -g_new + beta * p
        v, f, g = cand, fc, g_new
        # keep ||h|| in a sane range; the objective is scale-invariant
        hn = np.linalg.norm(v[:d])
        if hn < 1e-3 or hn > 1e3:
            v = v.copy()
            v[:d] /= hn
            g = gval(v)
            p = -g
        if callback is not None:
            callback(iters, f)
    return v[:d], v[d:], f, iters


def train_bound_minimizer(X, y, config: TrainConfig | None = None,
                          init: LinearModel | None = None,
                          callback=None) -> LinearModel:
    """Train the flip-loss classifier by conjugate gradient.

    Runs `config.restarts` CG runs (restart 0 from the centroid
    difference, later ones from seeded Gaussian perturbations of it;
    with `init` given, from the supplied model) and keeps the best
    final objective, ties broken by lowest restart index.  z stays in
    the ball of radius r_shift around the centroid midpoint.  The
    returned model has unit-norm h; meta records seed, iterations and
    the final mean objective.
    """
    config = config or TrainConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    cpos, cneg = _class_centroids(X, y)
    center = 0.5 * (cpos + cneg)
    gap = np.linalg.norm(cpos - cneg)
    radius = 0.25 * gap if config.r_shift is None else float(config.r_shift)
    if radius < 0.0:
        raise InvalidParameterError("r_shift must be nonnegative")

    if init is not None:
        h_base = init.h.copy()
        z_base = init.z.copy() if init.z is not None else center.copy()
    else:
        h_base = cpos - cneg
        if np.linalg.norm(h_base) == 0.0:
            h_base = np.ones(X.shape[1])
        z_base = center.copy()

    scale = np.linalg.norm(h_base)
    best = None
    for r in range(config.restarts):
        if r == 0:
            h0 = h_base.copy()
        else:
            rng = rng_stream(config.seed, 0x0C6, r)
            h0 = h_base + 0.5 * scale * rng.standard_normal(X.shape[1])
            if np.linalg.norm(h0) == 0.0:
                h0 = h_base.copy()
        h, z, f, iters = _cg_minimize(
            X, y, config.k, h0, z_base, center, radius,
            config.max_iters, config.grad_tol,
            callback=(callback if r == 0 else None),
        )
        if best is None or f < best[0]:
            best = (f, r, h, z, iters)

    f, r, h, z, iters = best
    h = h / np.linalg.norm(h)
    return LinearModel(
        h=h,
        z=z,
        b=None,
        k=config.k,
        meta={"seed": config.seed, "iterations": iters, "objective": f, "restart": r},
    )


def optimal_threshold(scores, y) -> tuple[float, int]:
    """Intercept minimizing the zero-one error of sign(score + b).

    Scans the midpoints between consecutive sorted scores plus the two
    outer extremes; returns (b, errors)."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    cuts = np.concatenate(([s[0] - 1.0], 0.5 * (s[:-1] + s[1:]), [s[-1] + 1.0]))
    best_b, best_err = 0.0, len(y) + 1
    for cut in cuts:
        pred = np.where(scores - cut >= 0.0, 1.0, -1.0)
        err = int(np.sum(pred != y))
        if err < best_err:
            best_b, best_err = float(-cut), err
    return best_b, best_err


def _exact_erm_candidates(Xp):
    """Normals/offsets of every hyperplane through k affinely
    independent sample points (k = ambient dimension <= 3)."""
    N, k = Xp.shape
    if k == 1:
        W = np.ones((N, 1))
        B = -Xp[:, 0]
        return W, B
    idx = np.array(list(itertools.combinations(range(N), k)))
    P = Xp[idx]  # (M, k, k)
    if k == 2:
        diff = P[:, 1] - P[:, 0]
        W = np.stack([-diff[:, 1], diff[:, 0]], axis=1)
    else:
        W = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])
    keep = np.linalg.norm(W, axis=1) > 1e-12
    W = W[keep]
    B = -np.einsum("ij,ij->i", W, P[keep, 0])
    return W, B


def train_erm_lowdim(points, labels, mode: str = "exact",
                     surrogate_k: int = 5, seed: int = 0) -> LinearModel:
    """Empirical risk minimization in a low-dimensional space.

    exact: true zero-one minimizer with intercept, by enumerating all
    hyperplanes through k-subsets of points, both orientations, and
    both infinitesimal shifts of the boundary points; capped at
    k <= 3, N <= 200.  surrogate: flip-loss CG direction (no shift)
    followed by the error-optimal threshold.
    """
    X = np.asarray(points, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidParameterError("points must be an N x k array")
    if set(np.unique(y)) - {-1.0, 1.0}:
        raise InvalidParameterError("labels must be in {-1, +1}")
    N, k = X.shape

    if mode == "surrogate":
        config = TrainConfig(k=surrogate_k, restarts=2, r_shift=0.0, seed=seed)
        direction = train_bound_minimizer(X, y, config)
        b, err = optimal_threshold(X @ direction.h, y)
        return LinearModel(h=direction.h, z=None, b=b, k=surrogate_k,
                           meta={"seed": seed, "mode": "surrogate",
                                 "train_errors": err, "train_error_rate": err / N})
    if mode != "exact":
        raise InvalidParameterError(f"unknown ERM mode {mode!r}")
    if k > EXACT_ERM_MAX_K or N > EXACT_ERM_MAX_N:
        raise InvalidParameterError(
            f"exact zero-one ERM is capped at k <= {EXACT_ERM_MAX_K} and "
            f"N <= {EXACT_ERM_MAX_N} (got k={k}, N={N}); use mode='surrogate'"
        )

    W, B = _exact_erm_candidates(X)
    best = None  # (errors, candidate_index, w, b_shifted)
    # constant classifiers as the starting candidates
    big = float(np.max(np.abs(X)) * k + 1.0)
    n_errs_all_pos = int(np.sum(y < 0))
    n_errs_all_neg = int(np.sum(y > 0))
    if n_errs_all_pos <= n_errs_all_neg:
        best = (n_errs_all_pos, -1, np.ones(k), big)
    else:
        best = (n_errs_all_neg, -1, np.ones(k), -big)

    chunk = max(1, (1 << 22) // max(1, N))
    for start in range(0, len(W), chunk):
        Wc = W[start : start + chunk]
        Bc = B[start : start + chunk]
        margins = X @ Wc.T + Bc  # (N, M)
        # points within rounding noise of a hyperplane count as boundary
        # points: the defining points themselves land at ~1e-18, not 0
        tol = 1e-9 * np.maximum(1e-30, np.max(np.abs(margins), axis=0))
        for sgn in (1.0, -1.0):
            m = sgn * margins
            pos_side = m > tol
            neg_side = m < -tol
            boundary = ~pos_side & ~neg_side
            ywrong_pos = (y < 0)[:, None]
            ywrong_neg = (y > 0)[:, None]
            base = np.sum(pos_side & ywrong_pos, axis=0) + np.sum(neg_side & ywrong_neg, axis=0)
            zeros_as_pos = base + np.sum(boundary & ywrong_pos, axis=0)
            zeros_as_neg = base + np.sum(boundary & ywrong_neg, axis=0)
            for errs, zsign in ((zeros_as_pos, 1.0), (zeros_as_neg, -1.0)):
                j = int(np.argmin(errs))
                e = int(errs[j])
                if e < best[0]:
                    mj = m[:, j]
                    interior = np.abs(mj[np.abs(mj) > tol[j]])
                    eps = 0.5 * float(np.min(interior)) if interior.size else 1.0
                    best = (e, start + j, sgn * Wc[j], sgn * Bc[j] + zsign * eps)
        if best[0] == 0:
            break

    errors, _, w, b = best
    model = LinearModel(h=w, z=None, b=b, k=None, meta={"seed": seed, "mode": "exact"})
    # count with the exact code path predictions use
    achieved = int(np.sum(model.predict(X) != y))
    model.meta["train_errors"] = achieved
    model.meta["train_error_rate"] = achieved / N
    return model


def train_lq_logistic(X, y, q: float, lam: float, iters: int = 400,
                      seed: int = 0, smoothing: float = 1e-8) -> LinearModel:
    """Gradient-descent L_q-regularized logistic regression.

    Minimizes mean log(1 + exp(-y (Xw + b))) + lam * sum_j penalty(w_j)
    with penalty |w|^q for q in (1, 2] and the smoothed (|w| +
    smoothing)^q for q <= 1.  The intercept is unpenalized.  Step sizes
    backtrack so the loss never increases; deterministic given seed.
    """
    if not (0.0 < q <= 2.0):
        raise InvalidParameterError(f"q must lie in (0, 2], got {q}")
    if lam < 0.0:
        raise InvalidParameterError(f"lambda must be nonnegative, got {lam}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    N, d = X.shape
    rng = rng_stream(seed, 0x109)
    w = 0.01 * rng.standard_normal(d)
    b = 0.0
    smooth = q <= 1.0

    def penalty(w):
        base = np.abs(w) + smoothing if smooth else np.abs(w)
        return float(np.sum(base ** q))

    def penalty_grad(w):
        base = np.abs(w) + smoothing if smooth else np.abs(w)
        # q |w|^(q-1) sign(w); 0 at the origin (subgradient choice)
        with np.errstate(divide="ignore"):
            g = q * base ** (q - 1.0) * np.sign(w)
        return np.where(np.isfinite(g), g, 0.0)

    def total_loss(w, b):
        margins = y * (X @ w + b)
        return float(np.mean(np.logaddexp(0.0, -margins))) + lam * penalty(w)

    f = total_loss(w, b)
    step = 1.0
    for _ in range(iters):
        margins = y * (X @ w + b)
        sig = expit(-margins)
        gw = -(X.T @ (y * sig)) / N + lam * penalty_grad(w)
        gb = float(-np.mean(y * sig))
        for _ in range(40):
            w_new = w - step * gw
            b_new = b - step * gb
            f_new = total_loss(w_new, b_new)
            if f_new <= f:
                break
            step *= 0.5
        else:
            break
        w, b, f = w_new, b_new, f_new
        step = min(step * 2.0, 1e3)
    if np.linalg.norm(w) == 0.0:
        w = np.full(d, 1e-12)  # keep the model valid when fully shrunk
    return LinearModel(h=w, z=None, b=b, k=None,
                       meta={"seed": seed, "q": q, "lambda": lam,
                             "iterations": iters, "objective": f})
