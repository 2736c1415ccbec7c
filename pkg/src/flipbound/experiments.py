"""Desk-scale experiment runners emitting plot-ready CSV reports.

Row order is canonical (sorted by the grid parameters), so reports are
reproducible bit for bit regardless of how the cells were scheduled.
"""

import math

import numpy as np
from scipy.stats import spearmanr

from . import bounds as bd
from .data import Dataset, ExperimentReport, gen_two_gaussians
from .errors import InvalidParameterError
from .optimizer import TrainConfig, train_bound_minimizer, train_erm_lowdim, train_lq_logistic
from .projection import ProjectionSpec, project, rng_stream
from .model import LinearModel

__all__ = [
    "experiment_tradeoff",
    "experiment_modelselect",
    "experiment_compressive",
    "DEFAULT_Q_GRID",
    "DEFAULT_LAMBDA_GRID",
]

DEFAULT_Q_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 2.0)
DEFAULT_LAMBDA_GRID = (0.001, 0.003, 0.01, 0.03, 0.1)


def synth_cosines(N: int, cos_sigma: float, seed: int) -> np.ndarray:
    """Margin cosines from N(0, cos_sigma^2); draws outside [-1, 1] are
    replaced with uniform samples on [-1, 1]."""
    rng = rng_stream(seed, 0x7DE)
    c = cos_sigma * rng.standard_normal(N)
    outside = np.abs(c) > 1.0
    if np.any(outside):
        c[outside] = rng.uniform(-1.0, 1.0, size=int(np.count_nonzero(outside)))
    return c


def experiment_tradeoff(N: int = 5000, cos_sigma: float = 1.0 / 3.0,
                        delta: float = 0.05, k_grid=None, seed: int = 0) -> ExperimentReport:
    """Flip-term vs complexity trade-off of the dataspace bound.

    Synthesizes a margin-cosine profile (variance 1/9 by default),
    then tabulates the bound's flip term, its complexity-plus-
    confidence remainder, and the total, for every k on the grid.
    """
    if k_grid is None:
        k_grid = range(1, 201)
    k_grid = sorted(int(k) for k in k_grid)
    if not k_grid or k_grid[0] < 1:
        raise InvalidParameterError("k_grid must contain positive integers")
    cos = synth_cosines(N, cos_sigma, seed)
    profile = bd.MarginProfile.from_cosines(cos)
    rows = []
    for k in k_grid:
        b = bd.bound_dataspace(profile, k, N=N, delta=delta, srm=False)
        rest = b.complexity_term + sum(v for _, v in b.slack_terms)
        rows.append({
            "k": k,
            "flip_term": b.flip_term,
            "complexity_plus_slack": rest,
            "total": b.total,
        })
    best = min(rows, key=lambda r: r["total"])
    return ExperimentReport(
        name="tradeoff",
        params={"N": N, "cos_sigma": cos_sigma, "delta": delta,
                "k_min": k_grid[0], "k_max": k_grid[-1]},
        rows=rows,
        summary={"argmin_k": best["k"], "min_total": best["total"]},
        seed=seed,
    )


def _holdout_error(model: LinearModel, X, y) -> float:
    return float(np.mean(model.predict(X) != y))


def experiment_modelselect(q_grid=DEFAULT_Q_GRID, lambda_grid=DEFAULT_LAMBDA_GRID,
                           seeds=(0, 1, 2, 3, 4), k: int = 10, delta: float = 0.05,
                           n_per_class: int = 140, d: int = 20,
                           center_scale: float = 0.5, holdout: int = 120,
                           iters: int = 400) -> ExperimentReport:
    """Bound-vs-holdout agreement across an L_q logistic model grid.

    For each repetition: draw the two-Gaussian training set, fit one
    model per (q, lambda), evaluate the dataspace bound on the training
    data and the error on a fresh holdout.  The summary reports the
    Spearman rank correlation between bound and holdout error within
    each repetition, and its mean.
    """
    if holdout % 2:
        raise InvalidParameterError("holdout size must be even (balanced classes)")
    rows = []
    per_seed_corr = {}
    for rep, seed in enumerate(sorted(int(s) for s in seeds)):
        train = gen_two_gaussians(n_per_class, d, center_scale, seed=seed)
        test = gen_two_gaussians(holdout // 2, d, center_scale, seed=seed + 10_000)
        cell_bounds, cell_errors = [], []
        for q in sorted(q_grid):
            for lam in sorted(lambda_grid):
                model = train_lq_logistic(train.X, train.y, q=q, lam=lam,
                                          iters=iters, seed=seed)
                profile = bd.margin_profile(train.X, train.y, model)
                breakdown = bd.bound_dataspace(profile, k, N=train.n, delta=delta)
                err = _holdout_error(model, test.X, test.y)
                train_err = _holdout_error(model, train.X, train.y)
                rows.append({
                    "seed": seed, "q": q, "lambda": lam,
                    "bound_total": breakdown.total,
                    "flip_term": breakdown.flip_term,
                    "train_error": train_err,
                    "holdout_error": err,
                })
                cell_bounds.append(breakdown.total)
                cell_errors.append(err)
        if len(cell_bounds) > 1:
            rho = spearmanr(cell_bounds, cell_errors).statistic
            per_seed_corr[seed] = float(rho) if np.isfinite(rho) else 0.0
    summary = {
        "mean_spearman": float(np.mean(list(per_seed_corr.values()))) if per_seed_corr else None,
        "max_bound": float(max(r["bound_total"] for r in rows)),
        "k": k,
        "delta": delta,
    }
    return ExperimentReport(
        name="modelselect",
        params={"k": k, "delta": delta, "n_per_class": n_per_class, "d": d,
                "center_scale": center_scale, "holdout": holdout},
        rows=rows,
        summary=summary,
        seed=min(per_seed_corr) if per_seed_corr else 0,
    )


def _split_half(n: int, seed: int):
    rng = rng_stream(seed, 0x5B117)
    perm = rng.permutation(n)
    half = n // 2
    return perm[:half], perm[half:]


def experiment_compressive(dataset: Dataset, k_grid=(1, 2, 3), distribution: str = "gaussian",
                           delta: float = 0.05, seeds=(0, 1, 2), c: float = 1.0,
                           surrogate_k: int = 5) -> ExperimentReport:
    """Compressive ERM pipeline: project, train, measure, bound.

    Per (k, seed): project the data, split in half, train the
    low-dimensional ERM classifier (exact inside its size caps,
    surrogate beyond), record the holdout error together with the
    compressive bound evaluated for the centroid-difference reference
    direction on the training half.
    """
    rows = []
    for k in sorted(int(k) for k in k_grid):
        for seed in sorted(int(s) for s in seeds):
            spec = ProjectionSpec(k=k, d=dataset.d, distribution=distribution, seed=seed)
            projected = project(dataset.X, dataset.y, spec)
            tr, te = _split_half(dataset.n, seed)
            Xtr, ytr = projected.points[tr], projected.labels[tr]
            Xte, yte = projected.points[te], projected.labels[te]
            mode = "exact" if (k <= 3 and len(tr) <= 200) else "surrogate"
            erm = train_erm_lowdim(Xtr, ytr, mode=mode, surrogate_k=surrogate_k, seed=seed)
            holdout_err = _holdout_error(erm, Xte, yte)

            ref_h = dataset.X[tr][ytr > 0].mean(axis=0) - dataset.X[tr][ytr < 0].mean(axis=0)
            reference = LinearModel(h=ref_h)
            profile = bd.margin_profile(dataset.X[tr], ytr, reference)
            split = bd.bound_compressive_split(profile, k, N=len(tr), delta=delta, c=c)
            exact = bd.bound_compressive_exact(profile, k, N=len(tr), delta=delta, c=c)
            rows.append({
                "k": k, "seed": seed, "mode": mode,
                "train_error": erm.meta.get("train_error_rate", math.nan),
                "holdout_error": holdout_err,
                "bound_split_total": split.total,
                "bound_split_flip": split.flip_term,
                "bound_exact_total": exact.total,
            })
    covered = [r for r in rows if r["bound_split_total"] >= r["holdout_error"]]
    return ExperimentReport(
        name="compressive",
        params={"distribution": distribution, "delta": delta, "c": c,
                "k_grid": ",".join(str(k) for k in sorted(k_grid))},
        rows=rows,
        summary={"coverage": len(covered) / len(rows) if rows else None},
        seed=min(int(s) for s in seeds) if len(list(seeds)) else 0,
    )
