"""Generalization-bound evaluators with per-term breakdowns.

Every evaluator returns a :class:`BoundBreakdown` whose total is the
exact sum of its parts: an empirical term, a flip-probability term, a
complexity term, and named slack terms.  Two families are covered:

* compressive bounds - valid for the ERM classifier trained on
  randomly projected data, stated at confidence 1 - 2*delta, with a
  VC-style complexity sqrt((k + 1 + log(1/delta)) / N) and a
  Markov/Hoeffding tail on the flip term;
* dataspace bounds - uniform bounds in the original space, stated at
  confidence 1 - delta, where the projection dimension k acts as a
  capacity knob: the flip term min(1, 2*flip_k) shrinks with k while
  the complexity term grows like sqrt(k/N).

The absolute constants c (VC), C and K (width condition) are not
pinned by the theory; they are explicit parameters defaulting to 1 and
are echoed in every breakdown.

Also here: Monte-Carlo Gaussian width estimation, sufficient projection
dimension calculators, and the low-density shift condition used to
license the trainable shift.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    InvalidParameterError,
    UnboundedConditionError,
)
from .flipkernel import _clamp_cosine, flip_probability, loss
from .model import LinearModel
from .projection import rng_stream

__all__ = [
    "BoundBreakdown",
    "MarginProfile",
    "margin_profile",
    "ensemble_margin_cosines",
    "bound_compressive_split",
    "bound_compressive_margin",
    "bound_compressive_exact",
    "bound_dataspace",
    "bound_dataspace_pointwise_k",
    "bound_ldm",
    "bound_ensemble_margin",
    "bound_ensemble_exploss",
    "gaussian_width_mc",
    "sufficient_k_margin",
    "sufficient_k_width",
    "sufficient_k_multiclass",
    "shift_condition",
]


@dataclass
class BoundBreakdown:
    """Per-term decomposition of a bound; total = sum of every term."""

    name: str
    empirical_term: float
    flip_term: float
    complexity_term: float
    slack_terms: list[tuple[str, float]]
    total: float
    confidence: str
    constants: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        terms = [self.empirical_term, self.flip_term, self.complexity_term]
        terms += [v for _, v in self.slack_terms]
        if any(t < 0.0 for t in terms):
            raise InvalidParameterError("bound terms must be nonnegative")
        if abs(self.total - sum(terms)) > 1e-12 * max(1.0, abs(self.total)):
            raise InvalidParameterError("breakdown total does not equal the sum of its terms")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "empirical_term": self.empirical_term,
            "flip_term": self.flip_term,
            "complexity_term": self.complexity_term,
            "slack_terms": [[n, v] for n, v in self.slack_terms],
            "total": self.total,
            "confidence": self.confidence,
            "constants": self.constants,
            "params": self.params,
        }


def _assemble(name, empirical, flip, complexity, slacks, confidence, constants, params):
    total = empirical + flip + complexity + sum(v for _, v in slacks)
    return BoundBreakdown(
        name=name,
        empirical_term=float(empirical),
        flip_term=float(flip),
        complexity_term=float(complexity),
        slack_terms=[(n, float(v)) for n, v in slacks],
        total=float(total),
        confidence=confidence,
        constants=constants,
        params=params,
    )


@dataclass
class MarginProfile:
    """Normalized margins cos(theta) of a model against a labeled set.

    ``cosines`` are the pure angular margins of h against (x - z) y and
    feed every flip-probability term.  ``gate_cosines`` equal them
    unless the model carries an intercept, in which case the gates use
    the augmented convention (1 appended to inputs, b appended to h) so
    indicator terms see the actual decision scores.  Points where
    ||x - z|| = 0 are flagged (NaN cosine), never silently dropped.
    """

    cosines: np.ndarray
    gate_cosines: np.ndarray
    flagged: np.ndarray

    def __post_init__(self):
        self.cosines = np.asarray(self.cosines, dtype=np.float64)
        self.gate_cosines = np.asarray(self.gate_cosines, dtype=np.float64)
        self.flagged = np.asarray(self.flagged, dtype=np.int64)
        if self.cosines.shape != self.gate_cosines.shape:
            raise InvalidParameterError("cosine arrays must have identical shape")

    @classmethod
    def from_cosines(cls, cosines) -> "MarginProfile":
        c = _clamp_cosine(cosines)
        return cls(c, c, np.empty(0, dtype=np.int64))

    def __len__(self) -> int:
        return self.cosines.shape[0]

    def require_clean(self, context: str) -> None:
        if self.flagged.size:
            idx = ", ".join(str(i) for i in self.flagged[:8])
            raise DegenerateInputError(
                f"{context}: profile has zero-norm points at indices [{idx}]"
            )


def margin_profile(X, y, model: LinearModel) -> MarginProfile:
    """Per-point normalized margins of a linear model.

    cosine_n = h . (x_n - z) y_n / (||h|| ||x_n - z||), clamped to
    [-1, 1].  Zero-norm points are flagged with NaN entries rather than
    raising; evaluators refuse flagged profiles with a DegenerateInput
    error naming the indices.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    h = model.h
    hn = np.linalg.norm(h)
    if hn == 0.0:
        raise InvalidParameterError("margin profile undefined for zero weight vector")
    Xc = X - model.z if model.z is not None else X
    norms = np.linalg.norm(Xc, axis=1)
    flagged = np.flatnonzero(norms == 0.0)
    safe = np.where(norms == 0.0, 1.0, norms)
    cosines = np.clip((Xc @ h) * y / (hn * safe), -1.0, 1.0)
    cosines[flagged] = np.nan
    if model.b:
        hn_aug = math.sqrt(hn * hn + model.b * model.b)
        norms_aug = np.sqrt(safe * safe + 1.0)
        gates = np.clip((Xc @ h + model.b) * y / (hn_aug * norms_aug), -1.0, 1.0)
        gates[flagged] = np.nan
    else:
        gates = cosines.copy()
    return MarginProfile(cosines, gates, flagged)


def _check_common(k, N, delta):
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    if N < 1:
        raise InvalidParameterError(f"N must be >= 1, got {N}")
    if not (0.0 < delta < 1.0):
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")


def _resolve_n(profile, N):
    return len(profile) if N is None else int(N)


def _vc_complexity(k, N, delta, c):
    return c * math.sqrt((k + 1 + math.log(1.0 / delta)) / N)


def _flip_tail(flip_term, delta):
    """min of the Markov and Hoeffding tails on the flip term."""
    return min((1.0 - delta) / delta * flip_term, math.sqrt(0.5 * math.log(1.0 / delta)))


def _confidence_slack(N, delta):
    return 3.0 * math.sqrt(math.log(2.0 / delta) / (2.0 * N))


# sqrt(8/pi): coefficient of sqrt(k/N) in the dataspace complexity term
_DATASPACE_COEF = 2.0 * math.sqrt(2.0 / math.pi)
_SRM_COEF = 3.0 * math.sqrt(math.log(2.0) / 2.0)


def bound_compressive_split(profile, k, N=None, delta=0.05, c=1.0) -> BoundBreakdown:
    """Compressive ERM bound with the empirical error split out.

    empirical + flip (gated to correctly classified points) + VC
    complexity + min(Markov, Hoeffding) tail; holds with probability
    1 - 2*delta over the training sample and the projection.
    """
    profile.require_clean("bound_compressive_split")
    N = _resolve_n(profile, N)
    _check_common(k, N, delta)
    gate = profile.gate_cosines
    empirical = float(np.mean(gate <= 0.0))
    flips = flip_probability(k, profile.cosines)
    flip_term = float(np.sum(flips[gate > 0.0]) / len(profile))
    slacks = [("flip_tail", _flip_tail(flip_term, delta))]
    return _assemble(
        "compressive_split",
        empirical,
        flip_term,
        _vc_complexity(k, N, delta, c),
        slacks,
        "1-2*delta",
        {"c": c},
        {"k": int(k), "N": N, "delta": delta},
    )


def bound_compressive_margin(profile, k, gamma, N=None, delta=0.05, c=1.0) -> BoundBreakdown:
    """Margin variant: the indicator gates move from 0 to gamma > 0."""
    if not gamma > 0.0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    profile.require_clean("bound_compressive_margin")
    N = _resolve_n(profile, N)
    _check_common(k, N, delta)
    gate = profile.gate_cosines
    empirical = float(np.mean(gate <= gamma))
    flips = flip_probability(k, profile.cosines)
    flip_term = float(np.sum(flips[gate > gamma]) / len(profile))
    slacks = [("flip_tail", _flip_tail(flip_term, delta))]
    return _assemble(
        "compressive_margin",
        empirical,
        flip_term,
        _vc_complexity(k, N, delta, c),
        slacks,
        "1-2*delta",
        {"c": c},
        {"k": int(k), "N": N, "delta": delta, "gamma": gamma},
    )


def bound_compressive_exact(profile, k, N=None, delta=0.05, c=1.0) -> BoundBreakdown:
    """Gaussian-projection variant: the ungated flip term absorbs the
    empirical error (sign flips back from wrong to right are credited)."""
    profile.require_clean("bound_compressive_exact")
    N = _resolve_n(profile, N)
    _check_common(k, N, delta)
    flip_term = float(np.mean(flip_probability(k, profile.cosines)))
    slacks = [("flip_tail", _flip_tail(flip_term, delta))]
    return _assemble(
        "compressive_exact",
        0.0,
        flip_term,
        _vc_complexity(k, N, delta, c),
        slacks,
        "1-2*delta",
        {"c": c},
        {"k": int(k), "N": N, "delta": delta},
    )


def bound_dataspace(profile, k, N=None, delta=0.05, srm=False) -> BoundBreakdown:
    """Uniform dataspace bound at a fixed projection dimension k.

    flip term (1/N) sum min(1, 2*flip_k) + (2*sqrt(2/pi)) sqrt(k/N)
    + 3 sqrt(log(2/delta) / (2N)); with srm=True an extra
    3 sqrt(log(2)/2) sqrt(k/N) makes it uniform over all k
    (exponential prior), so k may be chosen after seeing the data.
    """
    profile.require_clean("bound_dataspace")
    N = _resolve_n(profile, N)
    _check_common(k, N, delta)
    flip_term = float(np.mean(loss(k, profile.gate_cosines)))
    complexity = _DATASPACE_COEF * math.sqrt(k / N)
    slacks = [("confidence", _confidence_slack(N, delta))]
    if srm:
        slacks.append(("srm", _SRM_COEF * math.sqrt(k / N)))
    return _assemble(
        "dataspace",
        0.0,
        flip_term,
        complexity,
        slacks,
        "1-delta",
        {},
        {"k": int(k), "N": N, "delta": delta, "srm": bool(srm)},
    )


def bound_dataspace_pointwise_k(profile, k_values, N=None, delta=0.05) -> BoundBreakdown:
    """Dataspace bound with a per-point projection dimension k(x_n y_n).

    The flip term uses each point's own k; the complexity and SRM terms
    use k_max = max_n k_n.  With constant k it reduces exactly to
    bound_dataspace(srm=True).
    """
    profile.require_clean("bound_dataspace_pointwise_k")
    k_values = np.asarray(k_values)
    if k_values.shape != profile.cosines.shape:
        raise InvalidParameterError("need one k per profile point")
    if np.any(k_values < 1):
        raise InvalidParameterError("per-point k values must be >= 1")
    N = _resolve_n(profile, N)
    k_max = int(np.max(k_values))
    _check_common(k_max, N, delta)
    flip_term = float(np.mean(loss(k_values, profile.gate_cosines)))
    complexity = _DATASPACE_COEF * math.sqrt(k_max / N)
    slacks = [
        ("confidence", _confidence_slack(N, delta)),
        ("srm", _SRM_COEF * math.sqrt(k_max / N)),
    ]
    return _assemble(
        "dataspace_pointwise_k",
        0.0,
        flip_term,
        complexity,
        slacks,
        "1-delta",
        {},
        {"k_max": k_max, "N": N, "delta": delta},
    )


def bound_ldm(X, y, model: LinearModel, N=None, delta=0.05) -> BoundBreakdown:
    """Margin-distribution corollary of the pointwise-k bound.

    Choosing k = 2/|cos| per point turns the flip term into
    (1/N) sum 2 exp(-cos_n) (mean and variance of the margin
    distribution) and the capacity terms into max_n sqrt(1/|cos_n|)
    factors (minimum margin).  Undefined at cos_n = 0.
    """
    profile = margin_profile(X, y, model)
    profile.require_clean("bound_ldm")
    cos = profile.gate_cosines
    zeros = np.flatnonzero(cos == 0.0)
    if zeros.size:
        raise DegenerateInputError(
            f"bound_ldm undefined: zero margin cosine at index {int(zeros[0])}"
        )
    N = _resolve_n(profile, N)
    _check_common(1, N, delta)
    flip_term = float(np.mean(2.0 * np.exp(-cos)))
    inv_root = float(np.max(np.sqrt(1.0 / np.abs(cos))))
    complexity = 4.0 / math.sqrt(math.pi) * inv_root / math.sqrt(N)
    slacks = [
        ("confidence", _confidence_slack(N, delta)),
        ("srm", 3.0 * math.sqrt(math.log(2.0) / N) * inv_root),
    ]
    return _assemble(
        "ldm",
        0.0,
        flip_term,
        complexity,
        slacks,
        "1-delta",
        {},
        {"N": N, "delta": delta},
    )


def _check_alpha(alpha):
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 1 or alpha.size == 0:
        raise InvalidParameterError("alpha must be a nonempty weight vector")
    l1 = float(np.sum(np.abs(alpha)))
    if l1 > 1.0 + 1e-12:
        raise InvalidParameterError(f"ensemble weights need sum |alpha_t| <= 1, got {l1}")
    if l1 == 0.0:
        raise InvalidParameterError("ensemble weights must not all be zero")
    return alpha, l1


def ensemble_margin_cosines(prediction_matrix, alpha, y=None) -> np.ndarray:
    """Cosines between the weight vector alpha and the label-signed
    prediction vectors b(x_n) y_n of a T-learner ensemble.

    `prediction_matrix` is N x T with entries in {-1, +1}; pass `y` if
    the rows are raw predictions rather than already label-signed.
    """
    B = np.asarray(prediction_matrix, dtype=np.float64)
    if B.ndim != 2:
        raise InvalidParameterError("prediction matrix must be N x T")
    if not np.all(np.abs(B) == 1.0):
        raise InvalidParameterError("prediction matrix entries must be +-1")
    alpha, _ = _check_alpha(alpha)
    if alpha.shape[0] != B.shape[1]:
        raise InvalidParameterError("alpha length must equal the number of learners")
    if y is not None:
        B = B * np.asarray(y, dtype=np.float64)[:, None]
    T = B.shape[1]
    return np.clip((B @ alpha) / (np.linalg.norm(alpha) * math.sqrt(T)), -1.0, 1.0)


def bound_ensemble_margin(ensemble_cosines, k, N=None, delta=0.05,
                          vc_dim=1, c=1.0, alpha=None) -> BoundBreakdown:
    """Dataspace bound adapted to a convex ensemble of base learners.

    Same flip term as bound_dataspace on the ensemble margins; the
    complexity is c sqrt(k * V / N) with V the base-class VC dimension.
    """
    if vc_dim < 1:
        raise InvalidParameterError(f"base-class VC dimension must be >= 1, got {vc_dim}")
    if alpha is not None:
        _check_alpha(alpha)
    cos = _clamp_cosine(ensemble_cosines)
    N = len(cos) if N is None else int(N)
    _check_common(k, N, delta)
    flip_term = float(np.mean(loss(k, cos)))
    complexity = c * math.sqrt(k * vc_dim / N)
    slacks = [("confidence", _confidence_slack(N, delta))]
    return _assemble(
        "ensemble_margin",
        0.0,
        flip_term,
        complexity,
        slacks,
        "1-delta",
        {"c": c},
        {"k": int(k), "N": N, "delta": delta, "vc_dim": int(vc_dim)},
    )


def bound_ensemble_exploss(prediction_matrix, alpha, y=None, N=None, delta=0.05,
                           vc_dim=1, c=1.0) -> BoundBreakdown:
    """Exponential-loss corollary for ensembles.

    flip term (1/N) sum 2 exp(-alpha . b(x_n) y_n / ||alpha||_1); the
    capacity tail scales with sqrt(2T) max_n sqrt(||alpha||_1 /
    |alpha . b(x_n)|), i.e. the inverse minimum ensemble margin.
    Zero ensemble scores make the bound undefined.
    """
    if vc_dim < 1:
        raise InvalidParameterError(f"base-class VC dimension must be >= 1, got {vc_dim}")
    B = np.asarray(prediction_matrix, dtype=np.float64)
    if B.ndim != 2:
        raise InvalidParameterError("prediction matrix must be N x T")
    if not np.all(np.abs(B) == 1.0):
        raise InvalidParameterError("prediction matrix entries must be +-1")
    alpha, l1 = _check_alpha(alpha)
    if alpha.shape[0] != B.shape[1]:
        raise InvalidParameterError("alpha length must equal the number of learners")
    if y is not None:
        B = B * np.asarray(y, dtype=np.float64)[:, None]
    scores = B @ alpha
    zeros = np.flatnonzero(scores == 0.0)
    if zeros.size:
        raise DegenerateInputError(
            f"zero ensemble score at index {int(zeros[0])}: exponential-loss bound undefined"
        )
    N = B.shape[0] if N is None else int(N)
    T = B.shape[1]
    _check_common(1, N, delta)
    flip_term = float(np.mean(2.0 * np.exp(-scores / l1)))
    margin_factor = math.sqrt(2.0 * T) * float(np.max(np.sqrt(l1 / np.abs(scores))))
    capacity_tail = (
        c * math.sqrt(vc_dim / N) + 3.0 * math.sqrt(math.log(2.0) / (2.0 * N))
    ) * margin_factor
    slacks = [
        ("confidence", _confidence_slack(N, delta)),
        ("capacity_tail", capacity_tail),
    ]
    return _assemble(
        "ensemble_exploss",
        0.0,
        flip_term,
        0.0,
        slacks,
        "1-delta",
        {"c": c},
        {"N": N, "T": T, "delta": delta, "vc_dim": int(vc_dim)},
    )


def gaussian_width_mc(points, samples: int, seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo Gaussian width of a finite point set.

    Draws standard Gaussian directions g and averages
    max_{x in points} g . x.  Returns (width, stderr).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InvalidParameterError("points must be a nonempty n x d array")
    if samples < 1:
        raise InvalidParameterError("samples must be positive")
    rng = rng_stream(seed, 0x67770000)
    d = pts.shape[1]
    chunk = max(1, (1 << 22) // max(1, pts.shape[0]))
    sups = np.empty(samples, dtype=np.float64)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        G = rng.standard_normal((n, d))
        sups[done : done + n] = np.max(G @ pts.T, axis=1)
        done += n
    width = float(np.mean(sups))
    stderr = float(np.std(sups, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return width, stderr


def sufficient_k_margin(gamma: float, epsilon: float, delta: float) -> int:
    """Projection dimension making the compressive flip terms < epsilon
    for data separable with margin gamma: ceil(8 log(1/(eps*delta)) / gamma^2)."""
    if not (0.0 < gamma <= 1.0):
        raise InvalidParameterError(f"gamma must lie in (0, 1], got {gamma}")
    if not (0.0 < epsilon < 1.0 and 0.0 < delta < 1.0):
        raise InvalidParameterError("epsilon and delta must lie in (0, 1)")
    return math.ceil(8.0 * math.log(1.0 / (epsilon * delta)) / gamma ** 2)


def sufficient_k_width(width: float, gamma: float, delta: float,
                       C: float = 1.0, K: float = 1.0) -> int:
    """Projection dimension sufficient for no sign flips on the
    correctly-classified set, from its Gaussian width:
    ceil(C K^4 (width + sqrt(log(1/delta)))^2 / gamma)."""
    if not gamma > 0.0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    if width < 0.0:
        raise InvalidParameterError(f"width must be nonnegative, got {width}")
    if not (0.0 < delta < 1.0):
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    if C <= 0.0 or K <= 0.0:
        raise InvalidParameterError("constants C and K must be positive")
    return math.ceil(C * K ** 4 * (width + math.sqrt(math.log(1.0 / delta))) ** 2 / gamma)


def sufficient_k_multiclass(max_width: float, m: int, gamma: float, delta: float,
                            C: float = 1.0, K: float = 1.0,
                            scheme: str = "one_vs_all") -> int:
    """Multiclass version via a union bound over the binary classifiers:
    one-vs-all uses log(m/delta); one-vs-one has m(m-1)/2 pairs."""
    if m < 2:
        raise InvalidParameterError(f"need m >= 2 classes, got {m}")
    if scheme == "one_vs_all":
        classifiers = m
    elif scheme == "one_vs_one":
        classifiers = m * (m - 1) // 2
    else:
        raise InvalidParameterError(f"unknown scheme {scheme!r}")
    if not (0.0 < delta < 1.0):
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    effective_delta = delta / classifiers
    return sufficient_k_width(max_width, gamma, effective_delta, C=C, K=K)


def shift_condition(X, z0, r: float) -> float:
    """Upper estimate of the low-density condition licensing a trainable
    shift: sup over the ball B(z0, r) of (r/sqrt(N)) sum 1/||x_n - z||,
    bounded above by (r/sqrt(N)) sum 1/(||x_n - z0|| - r).

    Requires r below the distance to the nearest point, otherwise the
    supremum is infinite.
    """
    X = np.asarray(X, dtype=np.float64)
    z0 = np.asarray(z0, dtype=np.float64)
    if not r > 0.0:
        raise InvalidParameterError(f"radius must be positive, got {r}")
    dists = np.linalg.norm(X - z0, axis=1)
    dmin = float(np.min(dists))
    if r >= dmin:
        raise UnboundedConditionError(
            f"radius {r} reaches the nearest data point (distance {dmin}): "
            "the shift condition is unbounded"
        )
    return float(r / math.sqrt(X.shape[0]) * np.sum(1.0 / (dists - r)))
