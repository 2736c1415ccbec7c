"""Command-line interface.

One subcommand per construct: `flip`, `project`, `bound`, `width`,
`suffk`, `train`, `erm`, `experiment`.  Options may also come from a
`--config` file of `key = value` lines; explicit flags win.  Exit codes:
0 ok, 1 usage error, 2 data error.  Errors are single machine-parsable
lines on stderr: `error: <kind>: <message>`.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import bounds as bd
from .data import Dataset, ExperimentReport, gen_two_gaussians, load_csv, save_csv, save_report
from .errors import (
    DataError,
    DegenerateInputError,
    FlipboundError,
    InvalidParameterError,
    UnboundedConditionError,
)
from .experiments import (
    DEFAULT_LAMBDA_GRID,
    DEFAULT_Q_GRID,
    experiment_compressive,
    experiment_modelselect,
    experiment_tradeoff,
)
from .flipkernel import Angle, FlipEval, FlipMethod, flip_chernoff, flip_exact
from .model import LinearModel, load_model, save_model
from .optimizer import TrainConfig, train_bound_minimizer, train_erm_lowdim
from .projection import ProjectionSpec, mc_flip_rate, project

__all__ = ["main"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


REQUIRED = object()


def _parse_config(path):
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    return values


def _convert(raw, typ, name):
    try:
        if typ is bool:
            if isinstance(raw, bool):
                return raw
            if raw.lower() in ("1", "true", "yes"):
                return True
            if raw.lower() in ("0", "false", "no"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except (TypeError, ValueError):
        raise UsageError(f"bad value {raw!r} for option {name}") from None


class Opt:
    def __init__(self, name, typ=str, default=REQUIRED, help="", choices=None, flag=False):
        self.name = name
        self.typ = typ
        self.default = default
        self.help = help
        self.choices = choices
        self.flag = flag


def _add_opts(parser, opts):
    for o in opts:
        arg = "--" + o.name.replace("_", "-")
        if o.flag:
            parser.add_argument(arg, dest=o.name, action="store_true",
                                default=argparse.SUPPRESS, help=o.help)
        else:
            parser.add_argument(arg, dest=o.name, type=str,
                                default=argparse.SUPPRESS, choices=None, help=o.help)


def _resolve(ns, config, opts):
    out = {}
    known = {o.name: o for o in opts}
    given = vars(ns)
    for name, o in known.items():
        if name in given:
            raw = given[name]
            value = raw if o.flag else _convert(raw, o.typ, name)
        elif name in config:
            value = _convert(config[name], bool if o.flag else o.typ, name)
        elif o.default is REQUIRED:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")
        else:
            value = o.default
        if o.choices is not None and value not in o.choices:
            raise UsageError(f"option --{name.replace('_', '-')} must be one of {o.choices}")
        out[name] = value
    return out


def _emit(payload, out_path=None):
    text = json.dumps(payload, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


_DATA_OPTS = [
    Opt("data", str, help="input CSV path"),
    Opt("label_column", str, "label", help="name of the label column"),
    Opt("positive_label", str, "1", help="label value mapped to +1"),
]

_COMMON = [
    Opt("seed", int, 0),
    Opt("delta", float, 0.05),
    Opt("out", str, None),
    Opt("config", str, None),
]


def _load_dataset(opts) -> Dataset:
    return load_csv(opts["data"], opts["label_column"], opts["positive_label"])


def _intlist(text):
    return [int(t) for t in str(text).split(",") if t.strip() != ""]


def _floatlist(text):
    return [float(t) for t in str(text).split(",") if t.strip() != ""]


# ---------------------------------------------------------------- flip

_FLIP_OPTS = _COMMON + [
    Opt("k", int),
    Opt("theta", float, None),
    Opt("cos", float, None),
    Opt("method", str, "exact",
        choices=("exact", "chernoff-gaussian", "chernoff-subgaussian", "monte-carlo")),
    Opt("trials", int, 100_000),
    Opt("d", int, 10),
    Opt("distribution", str, "gaussian", choices=("gaussian", "rademacher")),
    Opt("sigma", float, 1.0),
]


def _cmd_flip(opts):
    if (opts["theta"] is None) == (opts["cos"] is None):
        raise UsageError("give exactly one of --theta or --cos")
    angle = Angle.from_theta(opts["theta"]) if opts["theta"] is not None \
        else Angle.from_cosine(opts["cos"])
    method = opts["method"]
    if method == "exact":
        ev = FlipEval(opts["k"], flip_exact(opts["k"], angle), FlipMethod.EXACT)
    elif method in ("chernoff-gaussian", "chernoff-subgaussian"):
        family = method.split("-", 1)[1]
        tag = FlipMethod.CHERNOFF_GAUSSIAN if family == "gaussian" \
            else FlipMethod.CHERNOFF_SUBGAUSSIAN
        ev = FlipEval(opts["k"], flip_chernoff(opts["k"], angle, family), tag)
    else:
        d = opts["d"]
        if d < 2:
            raise UsageError("monte-carlo embedding needs --d >= 2")
        h = np.zeros(d)
        u = np.zeros(d)
        h[0] = 1.0
        u[0] = angle.cosine
        u[1] = math.sin(angle.theta)
        if np.linalg.norm(u) == 0.0:  # cos = -1: antipodal embedding
            u[0] = -1.0
        spec = ProjectionSpec(k=opts["k"], d=d, distribution=opts["distribution"],
                              sigma=opts["sigma"], seed=opts["seed"])
        rate, stderr = mc_flip_rate(h, u, spec, opts["trials"])
        ev = FlipEval(opts["k"], rate, FlipMethod.MONTE_CARLO, mc_stderr=stderr)
    _emit(ev.to_dict(), opts["out"])


# ------------------------------------------------------------- project

_PROJECT_OPTS = _COMMON + _DATA_OPTS + [
    Opt("k", int),
    Opt("distribution", str, "gaussian", choices=("gaussian", "rademacher")),
    Opt("sigma", float, 1.0),
]


def _cmd_project(opts):
    if not opts["out"]:
        raise UsageError("project requires --out for the projected CSV")
    dataset = _load_dataset(opts)
    spec = ProjectionSpec(k=opts["k"], d=dataset.d, distribution=opts["distribution"],
                          sigma=opts["sigma"], seed=opts["seed"])
    projected = project(dataset.X, dataset.y, spec)
    out = Dataset(projected.points, projected.labels,
                  feature_names=[f"p{i}" for i in range(spec.k)], source=opts["data"])
    save_csv(out, opts["out"], label_column=opts["label_column"])
    _emit({"n": out.n, "d": dataset.d, "k": spec.k, "out": opts["out"]})


# --------------------------------------------------------------- bound

_BOUND_OPTS = _COMMON + _DATA_OPTS + [
    Opt("model", str, None, help="model JSON; default: centroid-difference reference"),
    Opt("k", int, 5),
    Opt("gamma", float, 0.2),
    Opt("srm", flag=True, default=False),
    Opt("c", float, 1.0),
    Opt("vc_dim", int, 1),
    Opt("alpha", str, None, help="comma-separated ensemble weights"),
    Opt("ensemble_loss", str, "margin", choices=("margin", "exp")),
]


def _reference_model(dataset) -> LinearModel:
    pos = dataset.X[dataset.y > 0]
    neg = dataset.X[dataset.y < 0]
    if len(pos) == 0 or len(neg) == 0:
        raise DegenerateInputError("centroid reference needs both classes present")
    return LinearModel(h=pos.mean(axis=0) - neg.mean(axis=0))


def _cmd_bound(variant, opts):
    dataset = _load_dataset(opts)
    delta = opts["delta"]
    if variant == "ensemble":
        alpha = np.array(_floatlist(opts["alpha"])) if opts["alpha"] else \
            np.full(dataset.d, 1.0 / dataset.d)
        if opts["ensemble_loss"] == "margin":
            cos = bd.ensemble_margin_cosines(dataset.X, alpha, y=dataset.y)
            breakdown = bd.bound_ensemble_margin(cos, opts["k"], delta=delta,
                                                 vc_dim=opts["vc_dim"], c=opts["c"],
                                                 alpha=alpha)
        else:
            breakdown = bd.bound_ensemble_exploss(dataset.X, alpha, y=dataset.y,
                                                  delta=delta, vc_dim=opts["vc_dim"],
                                                  c=opts["c"])
        _emit(breakdown.to_dict(), opts["out"])
        return
    model = load_model(opts["model"]) if opts["model"] else _reference_model(dataset)
    if variant == "ldm":
        breakdown = bd.bound_ldm(dataset.X, dataset.y, model, delta=delta)
        _emit(breakdown.to_dict(), opts["out"])
        return
    profile = bd.margin_profile(dataset.X, dataset.y, model)
    if variant == "dataspace":
        breakdown = bd.bound_dataspace(profile, opts["k"], delta=delta, srm=opts["srm"])
    elif variant == "compressive":
        breakdown = bd.bound_compressive_split(profile, opts["k"], delta=delta, c=opts["c"])
    elif variant == "margin":
        breakdown = bd.bound_compressive_margin(profile, opts["k"], opts["gamma"],
                                                delta=delta, c=opts["c"])
    elif variant == "exact":
        breakdown = bd.bound_compressive_exact(profile, opts["k"], delta=delta, c=opts["c"])
    else:
        raise UsageError(f"unknown bound variant {variant!r}")
    _emit(breakdown.to_dict(), opts["out"])


# --------------------------------------------------------------- width

_WIDTH_OPTS = _COMMON + _DATA_OPTS + [
    Opt("samples", int, 10_000),
    Opt("raw", flag=True, default=False,
        help="use rows as-is instead of label-signed unit normalization"),
]


def _cmd_width(opts):
    dataset = _load_dataset(opts)
    pts = dataset.X
    if not opts["raw"]:
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms == 0.0):
            raise DegenerateInputError("zero-norm row cannot be normalized; use --raw")
        pts = pts * (dataset.y / norms)[:, None]
    width, stderr = bd.gaussian_width_mc(pts, opts["samples"], seed=opts["seed"])
    _emit({"width": width, "stderr": stderr, "samples": opts["samples"]}, opts["out"])


# --------------------------------------------------------------- suffk

_SUFFK_OPTS = _COMMON + [
    Opt("gamma", float),
    Opt("epsilon", float, 0.05),
    Opt("width", float, 0.0),
    Opt("m", int, 2),
    Opt("scheme", str, "one_vs_all", choices=("one_vs_all", "one_vs_one")),
    Opt("bigc", float, 1.0, help="absolute constant C"),
    Opt("bigk", float, 1.0, help="subgaussian norm bound K"),
]


def _cmd_suffk(variant, opts):
    if variant == "margin":
        k = bd.sufficient_k_margin(opts["gamma"], opts["epsilon"], opts["delta"])
    elif variant == "width":
        k = bd.sufficient_k_width(opts["width"], opts["gamma"], opts["delta"],
                                  C=opts["bigc"], K=opts["bigk"])
    elif variant == "multiclass":
        k = bd.sufficient_k_multiclass(opts["width"], opts["m"], opts["gamma"],
                                       opts["delta"], C=opts["bigc"], K=opts["bigk"],
                                       scheme=opts["scheme"])
    else:
        raise UsageError(f"unknown suffk variant {variant!r}")
    _emit({"k": k, "variant": variant}, opts["out"])


# --------------------------------------------------------------- train

_TRAIN_OPTS = _COMMON + _DATA_OPTS + [
    Opt("k", str, "5", help="projection dimension of the loss, or 'cv'"),
    Opt("restarts", int, 3),
    Opt("max_iters", int, 300),
    Opt("grad_tol", float, 1e-6),
    Opt("r_shift", float, -1.0, help="shift ball radius; negative means auto"),
]


def _cmd_train(opts):
    dataset = _load_dataset(opts)
    r_shift = None if opts["r_shift"] < 0 else opts["r_shift"]
    if opts["k"] == "cv":
        from .estimators import FlipLossClassifier

        clf = FlipLossClassifier(k="cv", max_iters=opts["max_iters"],
                                 grad_tol=opts["grad_tol"], restarts=opts["restarts"],
                                 r_shift=r_shift, random_state=opts["seed"])
        clf.fit(dataset.X, dataset.y)
        model = clf.model_
    else:
        config = TrainConfig(k=_convert(opts["k"], int, "k"), max_iters=opts["max_iters"],
                             grad_tol=opts["grad_tol"], restarts=opts["restarts"],
                             r_shift=r_shift, seed=opts["seed"])
        model = train_bound_minimizer(dataset.X, dataset.y, config)
    if opts["out"]:
        save_model(model, opts["out"])
    train_err = float(np.mean(model.predict(dataset.X) != dataset.y))
    print(json.dumps({"k": model.k, "objective": model.meta["objective"],
                      "iterations": model.meta["iterations"],
                      "train_error": train_err, "out": opts["out"]}, sort_keys=True))


# ----------------------------------------------------------------- erm

_ERM_OPTS = _COMMON + _DATA_OPTS + [
    Opt("mode", str, "exact", choices=("exact", "surrogate")),
    Opt("surrogate_k", int, 5),
]


def _cmd_erm(opts):
    dataset = _load_dataset(opts)
    model = train_erm_lowdim(dataset.X, dataset.y, mode=opts["mode"],
                             surrogate_k=opts["surrogate_k"], seed=opts["seed"])
    if opts["out"]:
        save_model(model, opts["out"])
    print(json.dumps({"mode": opts["mode"],
                      "train_errors": model.meta["train_errors"],
                      "train_error_rate": model.meta["train_error_rate"],
                      "out": opts["out"]}, sort_keys=True))


# ---------------------------------------------------------- experiment

_EXPERIMENT_OPTS = _COMMON + [
    Opt("data", str, None),
    Opt("label_column", str, "label"),
    Opt("positive_label", str, "1"),
    Opt("n", int, 5000),
    Opt("cos_sigma", float, 1.0 / 3.0),
    Opt("k_max", int, 200),
    Opt("k_grid", str, "1,2,3"),
    Opt("q_grid", str, ",".join(str(q) for q in DEFAULT_Q_GRID)),
    Opt("lambda_grid", str, ",".join(str(l) for l in DEFAULT_LAMBDA_GRID)),
    Opt("reps", int, 5),
    Opt("k", int, 10),
    Opt("distribution", str, "gaussian", choices=("gaussian", "rademacher")),
    Opt("n_per_class", int, 140),
    Opt("d", int, 20),
    Opt("center", float, 0.5),
]


def _cmd_experiment(variant, opts):
    if variant == "twogauss":
        dataset = gen_two_gaussians(opts["n_per_class"], opts["d"], opts["center"],
                                    seed=opts["seed"])
        if not opts["out"]:
            raise UsageError("experiment twogauss requires --out for the CSV")
        save_csv(dataset, opts["out"], label_column=opts["label_column"])
        print(json.dumps({"n": dataset.n, "d": dataset.d, "out": opts["out"]},
                         sort_keys=True))
        return
    if variant == "tradeoff":
        report = experiment_tradeoff(N=opts["n"], cos_sigma=opts["cos_sigma"],
                                     delta=opts["delta"],
                                     k_grid=range(1, opts["k_max"] + 1),
                                     seed=opts["seed"])
    elif variant == "modelselect":
        report = experiment_modelselect(q_grid=_floatlist(opts["q_grid"]),
                                        lambda_grid=_floatlist(opts["lambda_grid"]),
                                        seeds=range(opts["seed"], opts["seed"] + opts["reps"]),
                                        k=opts["k"], delta=opts["delta"],
                                        n_per_class=opts["n_per_class"], d=opts["d"],
                                        center_scale=opts["center"])
    elif variant == "compressive":
        if not opts["data"]:
            raise UsageError("experiment compressive requires --data")
        dataset = load_csv(opts["data"], opts["label_column"], opts["positive_label"])
        report = experiment_compressive(dataset, k_grid=_intlist(opts["k_grid"]),
                                        distribution=opts["distribution"],
                                        delta=opts["delta"],
                                        seeds=range(opts["seed"], opts["seed"] + opts["reps"]))
    else:
        raise UsageError(f"unknown experiment {variant!r}")
    if opts["out"]:
        save_report(report, opts["out"])
    print(json.dumps({"name": report.name, "rows": len(report.rows),
                      "summary": report.summary, "out": opts["out"]}, sort_keys=True))


# ---------------------------------------------------------------- main

_SUBCOMMANDS = {
    "flip": (_FLIP_OPTS, _cmd_flip, None),
    "project": (_PROJECT_OPTS, _cmd_project, None),
    "bound": (_BOUND_OPTS, _cmd_bound,
              ("dataspace", "compressive", "margin", "exact", "ldm", "ensemble")),
    "width": (_WIDTH_OPTS, _cmd_width, None),
    "suffk": (_SUFFK_OPTS, _cmd_suffk, ("margin", "width", "multiclass")),
    "train": (_TRAIN_OPTS, _cmd_train, None),
    "erm": (_ERM_OPTS, _cmd_erm, None),
    "experiment": (_EXPERIMENT_OPTS, _cmd_experiment,
                   ("tradeoff", "modelselect", "compressive", "twogauss")),
}


def _build_parser():
    parser = _Parser(prog="flipbound", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    for name, (opts, _, variants) in _SUBCOMMANDS.items():
        p = sub.add_parser(name, add_help=True)
        if variants:
            p.add_argument("variant", choices=variants)
        _add_opts(p, opts)
    return parser


def run(argv) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError("a subcommand is required (see --help)")
    opt_specs, handler, variants = _SUBCOMMANDS[ns.command]
    config = {}
    given = vars(ns)
    if given.get("config"):
        config = _parse_config(given["config"])
        unknown = set(config) - {o.name for o in opt_specs}
        if unknown:
            raise UsageError(f"unknown config key(s): {sorted(unknown)}")
    opts = _resolve(ns, config, opt_specs)
    if variants:
        handler(ns.variant, opts)
    else:
        handler(opts)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(argv)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 1
    except InvalidParameterError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 1
    except (DataError, DegenerateInputError, UnboundedConditionError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2
    except FlipboundError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
