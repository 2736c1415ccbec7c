"""Sign-flip probability of a dot product under Gaussian random projection.

For vectors h, x at angle theta, projected to k dimensions by a matrix
with i.i.d. N(0, sigma^2) entries, the probability that the dot product
changes sign,

    flip(k, theta) = Pr[(Rh)^T (Rx) <= 0],

depends only on k and theta, never on the ambient dimension.  Its exact
value is the regularized incomplete beta function

    flip(k, theta) = I_x(k/2, k/2)   at   x = (1 - cos theta) / 2,

which is the numerically robust route near theta in {0, pi} where the
raw integral representation degenerates.  Tests cross-check this
identity against adaptive quadrature of the defining integral.

Also provided: Chernoff-style upper bounds (Gaussian and subgaussian
projection entries), the induced classification loss min(1, 2*flip) as
a function of the normalized margin cos(theta), its derivative, and its
Lipschitz constant.  All Gamma-function ratios go through log-gamma so
values stay finite for k in the hundreds.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import betainc, gammaln

from .errors import InvalidParameterError

__all__ = [
    "Angle",
    "FlipEval",
    "FlipMethod",
    "flip_exact",
    "flip_probability",
    "flip_chernoff",
    "loss",
    "loss_derivative",
    "lipschitz_constant",
]

# Slack allowed when clamping cosines produced by dot-product rounding.
COSINE_CLAMP_TOL = 1e-12


def _clamp_cosine(value):
    """Clamp cosines to [-1, 1], rejecting anything beyond rounding slack."""
    arr = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError("cosine must be finite")
    if np.any(np.abs(arr) > 1.0 + COSINE_CLAMP_TOL):
        bad = float(np.max(np.abs(arr)))
        raise InvalidParameterError(
            f"cosine magnitude {bad!r} exceeds 1 beyond rounding tolerance"
        )
    return np.clip(arr, -1.0, 1.0)


def _check_k(k, minimum=1):
    if not (isinstance(k, (int, np.integer)) and not isinstance(k, bool)):
        raise InvalidParameterError(f"projection dimension k must be an integer, got {k!r}")
    if k < minimum:
        raise InvalidParameterError(f"projection dimension k must be >= {minimum}, got {k}")
    return int(k)


@dataclass(frozen=True)
class Angle:
    """Angle between two vectors; the cosine is the authoritative field."""

    cosine: float

    def __post_init__(self):
        object.__setattr__(self, "cosine", float(_clamp_cosine(self.cosine)))

    @classmethod
    def from_cosine(cls, cosine: float) -> "Angle":
        return cls(cosine)

    @classmethod
    def from_theta(cls, theta: float) -> "Angle":
        if not (0.0 <= theta <= math.pi):
            raise InvalidParameterError(f"theta must lie in [0, pi], got {theta!r}")
        return cls(math.cos(theta))

    @classmethod
    def between(cls, u, v) -> "Angle":
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu == 0.0 or nv == 0.0:
            raise InvalidParameterError("angle undefined for zero vectors")
        return cls(float(u @ v / (nu * nv)))

    @property
    def theta(self) -> float:
        return math.acos(self.cosine)


class FlipMethod(str, Enum):
    EXACT = "exact"
    CHERNOFF_GAUSSIAN = "chernoff_gaussian"
    CHERNOFF_SUBGAUSSIAN = "chernoff_subgaussian"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class FlipEval:
    """A flip-probability evaluation, tagged with how it was obtained."""

    k: int
    value: float
    method: FlipMethod
    mc_stderr: float | None = None

    def __post_init__(self):
        _check_k(self.k)
        if not (0.0 <= self.value <= 1.0):
            raise InvalidParameterError(f"flip probability {self.value!r} outside [0, 1]")

    def to_dict(self) -> dict:
        out = {"k": self.k, "value": self.value, "method": self.method.value}
        if self.mc_stderr is not None:
            out["mc_stderr"] = self.mc_stderr
        return out


def flip_probability(k, cosine):
    """Vectorized exact flip probability as a function of cos(theta).

    `k` may be a scalar or an array of positive integers (per-point
    projection dimensions); `cosine` broadcasts against it.  Endpoints
    cosine = +-1 evaluate to exactly 0 and 1 with no integration.
    """
    karr = np.asarray(k)
    if karr.dtype == np.bool_ or not np.issubdtype(karr.dtype, np.integer):
        if not np.all(np.asarray(karr, dtype=np.float64) == np.floor(karr)):
            raise InvalidParameterError("k must be integer-valued")
        karr = np.asarray(karr, dtype=np.int64)
    if np.any(karr < 1):
        raise InvalidParameterError("k must be >= 1")
    c = _clamp_cosine(cosine)
    half = karr / 2.0
    return betainc(half, half, 0.5 * (1.0 - c))


def flip_exact(k: int, angle: Angle) -> float:
    """Exact flip probability for a single (k, angle) pair."""
    k = _check_k(k)
    return float(flip_probability(k, angle.cosine))


def flip_chernoff(k: int, angle: Angle, family: str = "gaussian") -> float:
    """Chernoff upper bound on the flip probability relative to the
    original sign of the dot product.

    exp(-k cos^2(theta) / 2) for Gaussian projection entries,
    exp(-k cos^2(theta) / 8) for any zero-mean subgaussian entries.
    Requires cos(theta) != 0: the bound targets pairs with a definite
    dot-product sign.
    """
    k = _check_k(k)
    c = angle.cosine
    if c == 0.0:
        raise InvalidParameterError("chernoff bound requires a nonzero cosine")
    if family == "gaussian":
        rate = 0.5
    elif family == "subgaussian":
        rate = 0.125
    else:
        raise InvalidParameterError(f"unknown family {family!r}")
    return min(1.0, math.exp(-k * c * c * rate))


def loss(k, cosine):
    """Induced margin loss min(1, 2*flip(k, arccos(cosine))).

    Equals 1 for every cosine <= 0, decreases to 0 as cosine -> 1, and
    is non-increasing in k pointwise.  Vectorized over `cosine` (and
    over `k` when given as an array).
    """
    c = _clamp_cosine(cosine)
    val = np.minimum(1.0, 2.0 * flip_probability(k, c))
    val = np.where(c <= 0.0, 1.0, val)
    if np.ndim(val) == 0:
        return float(val)
    return val


def _log_flip_slope(k, a):
    """log |d flip / d cosine| = log Gamma(k) - (k-1) log 2
    - 2 log Gamma(k/2) + (k-2)/2 * log(1 - a^2), done in log space."""
    return (
        gammaln(k)
        - (k - 1) * math.log(2.0)
        - 2.0 * gammaln(k / 2.0)
        + 0.5 * (k - 2) * np.log1p(-a * a)
    )


def loss_derivative(k, cosine):
    """Derivative of `loss` with respect to the cosine.

    On the descending branch (cosine > 0) this is
    -2 Gamma(k) / (2^(k-1) Gamma(k/2)^2) * (1 - cosine^2)^((k-2)/2);
    on the flat branch (cosine < 0) it is 0.  At cosine = 0 the
    one-sided cosine > 0 value is returned, the subgradient choice used
    by the trainer.  k = 1 is unsupported: there the slope is unbounded
    near |cosine| = 1 and no finite Lipschitz constant exists.
    """
    karr = np.asarray(k)
    if np.any(karr < 2):
        raise InvalidParameterError("loss_derivative requires k >= 2 (unbounded for k = 1)")
    a = _clamp_cosine(cosine)
    if np.any(np.abs(a) >= 1.0):
        raise InvalidParameterError("loss_derivative requires cosine strictly inside (-1, 1)")
    slope = -2.0 * np.exp(_log_flip_slope(karr, a))
    val = np.where(a >= 0.0, slope, 0.0)
    if np.ndim(val) == 0:
        return float(val)
    return val


def lipschitz_constant(k: int) -> float:
    """Lipschitz constant of `loss` in the cosine, for k >= 2.

    L(k) = 2 Gamma((k+1)/2) / (sqrt(pi) Gamma(k/2)), which satisfies
    L(k) <= sqrt(2k/pi).
    """
    k = _check_k(k, minimum=2)
    return 2.0 * math.exp(gammaln((k + 1) / 2.0) - gammaln(k / 2.0)) / math.sqrt(math.pi)
