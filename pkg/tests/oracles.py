"""Independent oracles used by the test suite.

These deliberately avoid the code paths they check: the flip
probability is integrated from its raw integral form (the library goes
through the incomplete beta function), zero-one sweeps enumerate
directions by brute force, and bound totals are recomputed with plain
per-point loops.
"""

import itertools
import math

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln


def flip_by_quadrature(k: int, theta: float) -> float:
    """Adaptive quadrature of the defining integral

        Gamma(k) / Gamma(k/2)^2 * integral_0^psi z^((k-2)/2) / (1+z)^k dz,
        psi = (1 - cos theta) / (1 + cos theta),

    evaluated in log space so it stays finite for large k."""
    c = math.cos(theta)
    if c >= 1.0:
        return 0.0
    if c <= -1.0:
        return 1.0
    psi = (1.0 - c) / (1.0 + c)
    lnpre = gammaln(k) - 2.0 * gammaln(k / 2.0)

    def integrand(z):
        if z <= 0.0:
            return 0.0
        return math.exp(lnpre + 0.5 * (k - 2) * math.log(z) - k * math.log1p(z))

    points = [p for p in (1.0,) if 0.0 < p < psi]
    value, _ = quad(integrand, 0.0, psi, limit=400, epsabs=1e-12, epsrel=1e-11,
                    points=points or None)
    return value


def sweep_zero_one_error(X, y, n_directions: int = 100_000, seed: int = 0) -> int:
    """Minimum zero-one error over `n_directions` random directions,
    each with its own error-optimal intercept (boundary points tried on
    both sides).  Includes the two constant classifiers."""
    rng = np.random.default_rng(seed)
    d = X.shape[1]
    dirs = rng.standard_normal((n_directions, d))
    scores = X @ dirs.T  # (N, M)
    best = min(int(np.sum(y != 1.0)), int(np.sum(y != -1.0)))
    order = np.argsort(scores, axis=0)
    ys = y[order]  # label of each point in score order, per direction
    # walking the threshold from -inf to +inf: start all predicted +1,
    # flipping points to -1 one by one in score order
    start_errs = np.sum(y == -1.0)
    deltas = np.where(ys == 1.0, 1, -1)  # moving a point to the - side
    errs = start_errs + np.cumsum(deltas, axis=0)
    best_dir = int(min(start_errs, errs.min()))
    # mirrored orientation: predicted classes swap
    start_errs_m = np.sum(y == 1.0)
    errs_m = start_errs_m - np.cumsum(deltas, axis=0)
    best_dir = min(best_dir, int(min(start_errs_m, errs_m.min())))
    return min(best, best_dir)


def exhaustive_bound_total(terms) -> float:
    total = 0.0
    for value in terms:
        total += value
    return total


def pair_at_angle(theta: float, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors at the requested angle embedded in d dimensions,
    rotated by a deterministic orthogonal matrix so nothing aligns with
    the coordinate axes."""
    h = np.zeros(d)
    u = np.zeros(d)
    h[0] = 1.0
    u[0] = math.cos(theta)
    u[1] = math.sin(theta)
    rng = np.random.default_rng(1234 + d)
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return Q @ h, Q @ u
