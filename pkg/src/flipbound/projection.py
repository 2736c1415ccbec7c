"""Random projection matrices and a Monte-Carlo flip-rate oracle.

Randomness is counter-based (Philox, 256-bit key) so every draw is a
pure function of (seed, stream, position).  For the Monte-Carlo oracle
each trial owns a fixed, 4-aligned block of raw 64-bit outputs: trial t
reads outputs [t*stride, (t+1)*stride), where stride = k*d rounded up
to a multiple of 4 (Philox advances in 4-output counter steps).  Any
chunking or parallel split over trials therefore reproduces identical
results bit for bit.

Gaussian variates come from the inverse normal CDF applied to 53-bit
uniforms so each matrix entry consumes exactly one raw output;
Rademacher entries use the top bit of the same outputs.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

from .errors import InvalidParameterError

__all__ = [
    "ProjectionSpec",
    "ProjectedDataset",
    "sample_matrix",
    "project",
    "mc_flip_rate",
    "rng_stream",
]

_U64 = np.uint64
_UNIF_SCALE = 2.0 ** -53

# Upper bound on float64 elements materialized per Monte-Carlo chunk.
_CHUNK_ELEMS = 1 << 23


def rng_stream(seed: int, *stream: int) -> np.random.Generator:
    """A Generator on an independent Philox stream keyed by (seed, *stream).

    The stream components (each < 2^32, at most two) are packed into the
    second word of the 128-bit Philox key: distinct (seed, stream)
    tuples give independent streams, identical tuples reproduce the
    same stream.
    """
    if len(stream) > 2:
        raise InvalidParameterError("at most 2 stream components supported")
    tag = 0
    for i, s in enumerate(stream):
        s = int(s)
        if not (0 <= s < 2 ** 32):
            raise InvalidParameterError("stream components must fit in 32 bits")
        tag |= s << (32 * i)
    key = np.array([int(seed), tag], dtype=np.uint64)
    return np.random.Generator(Philox(key=key))


@dataclass(frozen=True)
class ProjectionSpec:
    """Parameters of a k x d random projection matrix.

    distribution "gaussian" draws i.i.d. N(0, sigma^2) entries;
    "rademacher" draws unscaled +-1 entries (sigma is ignored).  The
    flip probability is scale-invariant in the matrix, so the default
    sigma = 1 is a pure convention.
    """

    k: int
    d: int
    distribution: str = "gaussian"
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.d < 1:
            raise InvalidParameterError(
                f"projection dimensions must be positive, got k={self.k}, d={self.d}"
            )
        if self.distribution not in ("gaussian", "rademacher"):
            raise InvalidParameterError(f"unknown distribution {self.distribution!r}")
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise InvalidParameterError(f"sigma must be positive, got {self.sigma!r}")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise InvalidParameterError("seed must fit in an unsigned 64-bit integer")


@dataclass
class ProjectedDataset:
    points: np.ndarray
    labels: np.ndarray
    spec: ProjectionSpec


def _raw_block(seed: int, raw_offset: int, count: int) -> np.ndarray:
    """`count` raw 64-bit outputs starting at position `raw_offset`
    (which must be 4-aligned) of the Philox stream keyed by seed."""
    assert raw_offset % 4 == 0
    bg = Philox(key=_U64(seed))
    if raw_offset:
        bg.advance(raw_offset // 4)
    return bg.random_raw(count)


def _entries_from_raw(raw: np.ndarray, spec: ProjectionSpec) -> np.ndarray:
    if spec.distribution == "gaussian":
        u = ((raw >> _U64(11)).astype(np.float64) + 0.5) * _UNIF_SCALE
        return ndtri(u) * spec.sigma
    return 1.0 - 2.0 * (raw >> _U64(63)).astype(np.float64)


def _trial_stride(spec: ProjectionSpec) -> int:
    # one raw output per matrix entry, rounded up to the Philox step
    m = spec.k * spec.d
    return ((m + 3) // 4) * 4


def sample_matrix(spec: ProjectionSpec) -> np.ndarray:
    """Sample the k x d matrix for the given spec (trial stream 0)."""
    stride = _trial_stride(spec)
    raw = _raw_block(spec.seed, 0, stride)
    entries = _entries_from_raw(raw[: spec.k * spec.d], spec)
    return entries.reshape(spec.k, spec.d)


def project(X, y, spec: ProjectionSpec, matrix: np.ndarray | None = None) -> ProjectedDataset:
    """Left-multiply every observation by the spec's matrix.

    `matrix` overrides the sampled one (e.g. an identity block for
    sanity checks); its shape must still be (k, d).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[1] != spec.d:
        raise InvalidParameterError(
            f"data dimension {X.shape} does not match spec d={spec.d}"
        )
    if len(y) != X.shape[0]:
        raise InvalidParameterError("label count does not match row count")
    R = sample_matrix(spec) if matrix is None else np.asarray(matrix, dtype=np.float64)
    if R.shape != (spec.k, spec.d):
        raise InvalidParameterError(f"matrix shape {R.shape} does not match spec")
    return ProjectedDataset(points=X @ R.T, labels=y.copy(), spec=spec)


def mc_flip_rate(h, u, spec: ProjectionSpec, trials: int) -> tuple[float, float]:
    """Monte-Carlo estimate of Pr[(Rh)^T (Ru) <= 0] over fresh draws of R.

    Ties (exact zeros) count as flips.  Returns (rate, stderr) with the
    binomial standard error sqrt(rate * (1 - rate) / trials).  The result
    is a pure function of (h, u, spec, trials), independent of chunking.
    """
    h = np.asarray(h, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if h.ndim != 1 or u.ndim != 1 or h.shape != u.shape:
        raise InvalidParameterError("h and u must be vectors of equal dimension")
    if h.shape[0] != spec.d:
        raise InvalidParameterError(f"vector dimension {h.shape[0]} != spec d={spec.d}")
    if np.linalg.norm(h) == 0.0 or np.linalg.norm(u) == 0.0:
        raise InvalidParameterError("flip rate undefined for zero vectors")
    if trials < 1:
        raise InvalidParameterError("trials must be positive")

    k, d = spec.k, spec.d
    stride = _trial_stride(spec)
    per_chunk = max(1, _CHUNK_ELEMS // stride)
    flips = 0
    t0 = 0
    while t0 < trials:
        n_t = min(per_chunk, trials - t0)
        raw = _raw_block(spec.seed, t0 * stride, n_t * stride)
        entries = _entries_from_raw(raw, spec).reshape(n_t, stride)[:, : k * d]
        G = entries.reshape(n_t * k, d)
        a = (G @ h).reshape(n_t, k)
        b = (G @ u).reshape(n_t, k)
        flips += int(np.count_nonzero(np.einsum("ij,ij->i", a, b) <= 0.0))
        t0 += n_t
    rate = flips / trials
    stderr = math.sqrt(rate * (1.0 - rate) / trials)
    return rate, stderr
