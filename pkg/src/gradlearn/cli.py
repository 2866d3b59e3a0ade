"""Command line interface: ``gradlearn {fit,reduce,simulate,evaluate,pipeline}``.

Exit codes: 0 success, 2 usage error, 3 data-format error, 4 numerical
failure. Failures print one JSON object ``{"error": <category>,
"message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .archive import load_model, save_model
from .classification import (
    DEFAULT_LAMBDA1,
    DEFAULT_LAMBDA2,
    ClassGradientModel,
    fit_gradient_classification,
)
from .data import Dataset
from .errors import DataFormatError, DegenerateDataError, NumericalError
from .io import load_csv, read_matrix, write_dataset, write_matrix
from .kernels import KernelSpec, WeightFactor, WeightSpec, default_bandwidths
from .metrics import error_rate, knn_classify, loo_error, principal_angles
from .regression import DEFAULT_LAMBDA, fit_gradient_regression
from .simulate import Design, SimConfig
from .spectral import edr_estimate, egcm, gradient_outer_product, project, top_eigen

EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 2, 3, 4


class UsageError(ValueError):
    pass


@dataclass
class FitConfig:
    task: str = "classify"
    lam: float = DEFAULT_LAMBDA
    lambda1: float = DEFAULT_LAMBDA1
    lambda2: float = DEFAULT_LAMBDA2
    s: float | None = None  # None: median pairwise distance
    sigma: float | None = None  # None: 0.2 * median pairwise distance
    weight_factor: int = 1

    def validate(self):
        if self.task not in ("regress", "classify"):
            raise UsageError(f"task must be 'regress' or 'classify', got {self.task!r}")
        for name in ("lam", "lambda1", "lambda2"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        for name in ("s", "sigma"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise UsageError(f"{name} must be positive")
        if self.weight_factor not in (1, 2):
            raise UsageError("weight factor must be 1 or 2")


@dataclass
class PipelineConfig:
    """Everything a pipeline run depends on. Unknown keys are rejected."""

    design: str = "linear"
    n_per_class: int = 20
    n_test_per_class: int = 20
    p: int = 100
    d: int = 2
    r: float = 3.0
    noise: float = 0.5
    seed: int = 0
    method: str = "egcm"
    k: int = 1
    knn_k: int = 5
    fit: FitConfig = field(default_factory=FitConfig)

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        doc = dict(doc)
        fit_doc = doc.pop("fit", {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        fit_known = {f.name for f in dataclasses.fields(FitConfig)}
        unknown += sorted(f"fit.{k}" for k in set(fit_doc) - fit_known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        try:
            cfg = cls(**doc, fit=FitConfig(**fit_doc))
        except TypeError as exc:
            raise UsageError(str(exc)) from exc
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def sim_config(self, n_per_class: int) -> SimConfig:
        p = 100 if self.design == "linear" else self.p
        return SimConfig(Design(self.design), n_per_class, p, self.d, self.r, self.noise, self.seed)

    def validate(self):
        if self.design not in ("linear", "hypersphere"):
            raise UsageError(f"unknown design {self.design!r}")
        if self.method not in ("gop", "egcm"):
            raise UsageError(f"method must be 'gop' or 'egcm', got {self.method!r}")
        if self.n_per_class < 1 or self.n_test_per_class < 0:
            raise UsageError("sample counts must be positive")
        if self.k < 0 or self.knn_k < 1:
            raise UsageError("k must be >= 0 and knn_k >= 1")
        try:
            self.sim_config(self.n_per_class + self.n_test_per_class)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        self.fit.validate()


def fit_model(data: Dataset, cfg: FitConfig):
    s, sigma = cfg.s, cfg.sigma
    if s is None or sigma is None:
        s_med, sigma_med = default_bandwidths(data.X)
        s = s_med if s is None else s
        sigma = sigma_med if sigma is None else sigma
    kernel = KernelSpec(sigma)
    weight = WeightSpec(s, WeightFactor(cfg.weight_factor))
    if cfg.task == "classify":
        if not data.is_binary():
            raise DataFormatError("classification needs labels in {-1, +1}")
        return fit_gradient_classification(data, kernel, weight, cfg.lambda1, cfg.lambda2)
    return fit_gradient_regression(data, kernel, weight, cfg.lam)


def spectrum(model, method: str, k: int):
    gram = egcm(model) if method == "egcm" else gradient_outer_product(model)
    spec = top_eigen(gram)
    if k > spec.k:
        raise NumericalError(f"requested k={k} but only {spec.k} nonzero eigenvalues")
    return spec, edr_estimate(spec, k)


def versions() -> dict:
    return {
        "gradlearn": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def run_pipeline(cfg: PipelineConfig, out_dir=None) -> dict:
    """simulate -> fit -> reduce -> evaluate; returns the manifest."""
    cfg.validate()
    n_tr, n_te = cfg.n_per_class, cfg.n_test_per_class
    full, truth = cfg.sim_config(n_tr + n_te).generate()
    # rows are class -1 then class +1; the first n_tr of each class train
    per = n_tr + n_te
    tr_idx = np.r_[0:n_tr, per : per + n_tr]
    te_idx = np.r_[n_tr:per, per + n_tr : 2 * per]
    train, test = full.subset(tr_idx), full.subset(te_idx)

    model = fit_model(train, cfg.fit)
    spec, edr = spectrum(model, cfg.method, cfg.k)
    manifest = {
        "schema_version": 1,
        "config": cfg.to_dict(),
        "versions": versions(),
        "digests": {"train": train.digest(), "test": test.digest()},
        "model": {
            "kind": "classification" if isinstance(model, ClassGradientModel) else "regression",
            "objective_value": model.objective_value,
            "kernel_sigma": model.kernel.sigma,
            "weight_s": model.weight.s,
        },
        "eigenvalues": spec.eigenvalues.tolist(),
    }
    if isinstance(model, ClassGradientModel):
        manifest["model"].update(iterations=model.iterations, converged=model.converged)
    if cfg.k > 0:
        sub = principal_angles(edr.B_hat, truth.directions)
        manifest["subspace"] = sub.as_dict()
        manifest["alignment"] = sub.alignment
    if n_te > 0 and cfg.k > 0:
        pred = knn_classify(Dataset(project(train.X, edr), train.y), project(test.X, edr), cfg.knn_k)
        full_pred = knn_classify(train, test.X, cfg.knn_k)
        manifest["errors"] = {
            "reduced": error_rate(pred, test.y, f"{cfg.method}+knn", cfg.k).as_dict(),
            "full": error_rate(full_pred, test.y, "knn", train.p).as_dict(),
        }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_dataset(out / "train.csv", train)
        write_dataset(out / "test.csv", test)
        write_matrix(out / "truth.csv", truth.directions)
        save_model(out / "model.json", model, {"seed": cfg.seed, "dataset_digest": train.digest()})
        write_matrix(out / "eigenvalues.csv", spec.eigenvalues[:, None])
        write_matrix(out / "eigenvectors.csv", edr.B_hat)
        with open(out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
    return manifest


# -- command handlers ---------------------------------------------------------


def _fit_config(args) -> FitConfig:
    cfg = FitConfig(
        task=args.task,
        lam=args.lam,
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        s=args.s,
        sigma=args.sigma,
        weight_factor=args.weight_factor,
    )
    cfg.validate()
    return cfg


def _label_column(value: str):
    try:
        return int(value)
    except ValueError:
        return value


def cmd_fit(args):
    cfg = _fit_config(args)
    data = load_csv(args.data, _label_column(args.label_column), args.header, cfg.task == "classify")
    model = fit_model(data, cfg)
    save_model(args.out, model, {"seed": args.seed, "dataset_digest": data.digest(), "source": str(args.data)})


def cmd_reduce(args):
    if args.k < 0:
        raise UsageError("k must be nonnegative")
    model = load_model(args.model)
    spec, edr = spectrum(model, args.method, args.k)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "eigenvalues.csv", spec.eigenvalues[:, None], ["eigenvalue"])
    write_matrix(out / "eigenvectors.csv", edr.B_hat, [f"u{i + 1}" for i in range(edr.k)])
    projections = {}
    for name, path in (("train", args.data), ("test", args.test)):
        if path is None:
            continue
        ds = load_csv(path, -1, args.header)
        Z = project(ds.X, edr)
        target = out / f"{name}_projections.csv"
        write_matrix(target, np.column_stack([Z, ds.y]), [f"z{i + 1}" for i in range(edr.k)] + ["y"])
        projections[name] = str(target)
    if args.data is None:
        Z = project(model.train_points, edr)
        write_matrix(out / "train_projections.csv", Z, [f"z{i + 1}" for i in range(edr.k)])
    summary = {
        "method": args.method,
        "k": edr.k,
        "n_eigenvalues": spec.k,
        "eigenvalues": spec.eigenvalues.tolist(),
        "degenerate_cluster": spec.degenerate,
        "p": int(model.train_points.shape[1]),
        "n_train": int(model.train_points.shape[0]),
        "projections": projections,
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)


def cmd_simulate(args):
    if args.n_test_per_class < 0:
        raise UsageError("n-test-per-class must be nonnegative")
    try:
        cfg = SimConfig(
            Design(args.design),
            args.n_per_class + args.n_test_per_class,
            100 if args.design == "linear" else args.p,
            args.d,
            args.r,
            args.noise,
            args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    full, truth = cfg.generate()
    per, n_tr = cfg.n_per_class, args.n_per_class
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_dataset(out / "train.csv", full.subset(np.r_[0:n_tr, per : per + n_tr]))
    write_dataset(out / "test.csv", full.subset(np.r_[n_tr:per, per + n_tr : 2 * per]))
    write_matrix(out / "truth.csv", truth.directions)


def cmd_evaluate(args):
    train = load_csv(args.train, -1, args.header, classification=True)
    test = load_csv(args.test, -1, args.header, classification=True)
    if train.p != test.p:
        raise DataFormatError("train and test projections have different widths")
    pred = knn_classify(train, test.X, args.knn_k)
    report = {"test": error_rate(pred, test.y, f"knn(k={args.knn_k})", train.p).as_dict()}
    if args.loo:
        report["loo_errors"] = loo_error(train, lambda tr, x: knn_classify(tr, x, args.knn_k))
    if args.truth is not None and args.directions is not None:
        truth, _ = read_matrix(args.truth)
        dirs, _ = read_matrix(args.directions, header=True)
        report["subspace"] = principal_angles(dirs, truth).as_dict()
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)


def cmd_pipeline(args):
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        cfg = PipelineConfig.from_dict(doc.get("config", doc))
    else:
        cfg = PipelineConfig(
            design=args.design,
            n_per_class=args.n_per_class,
            n_test_per_class=args.n_test_per_class,
            p=args.p,
            d=args.d,
            r=args.r,
            noise=args.noise,
            seed=args.seed,
            method=args.method,
            k=args.k,
            knn_k=args.knn_k,
            fit=_fit_config(args),
        )
    manifest = run_pipeline(cfg, args.out_dir)
    print(json.dumps({k: manifest[k] for k in ("alignment", "errors") if k in manifest}))


# -- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _report("usage", message)
        sys.exit(EXIT_USAGE)


def _report(category: str, message: str):
    print(json.dumps({"error": category, "message": message}), file=sys.stderr)


def _add_fit_options(p):
    p.add_argument("--task", choices=("regress", "classify"), default="classify")
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--lambda1", type=float, default=DEFAULT_LAMBDA1)
    p.add_argument("--lambda2", type=float, default=DEFAULT_LAMBDA2)
    p.add_argument("--s", type=float, default=None, help="weight bandwidth (default: median distance)")
    p.add_argument("--sigma", type=float, default=None, help="kernel width (default: 0.2 * median distance)")
    p.add_argument("--weight-factor", type=int, choices=(1, 2), default=1)


def _add_sim_options(p):
    p.add_argument("--design", choices=[d.value for d in Design], default="linear")
    p.add_argument("--n-per-class", type=int, default=20)
    p.add_argument("--n-test-per-class", type=int, default=20)
    p.add_argument("--p", type=int, default=100)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--r", type=float, default=3.0)
    p.add_argument("--noise", type=float, default=0.5, help="noise standard deviation")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gradlearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    header = dict(action=argparse.BooleanOptionalAction, default=True, help="CSV files have a header row")

    p = sub.add_parser("fit", help="fit a gradient model to a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="-1")
    p.add_argument("--header", **header)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_fit_options(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("reduce", help="spectral decomposition of a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=("gop", "egcm"), default="egcm")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--data", default=None, help="labelled CSV to project")
    p.add_argument("--test", default=None, help="second labelled CSV to project")
    p.add_argument("--header", **header)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("simulate", help="write simulated train/test data")
    _add_sim_options(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="kNN error and subspace angles")
    p.add_argument("--train", required=True, help="labelled projections used as kNN reference")
    p.add_argument("--test", required=True)
    p.add_argument("--header", **header)
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--loo", action="store_true")
    p.add_argument("--truth", default=None)
    p.add_argument("--directions", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="simulate, fit, reduce and evaluate in one run")
    _add_sim_options(p)
    _add_fit_options(p)
    p.add_argument("--method", choices=("gop", "egcm"), default="egcm")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--config", default=None, help="replay a manifest or config JSON")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        _report("usage", str(exc))
        return EXIT_USAGE
    except (DataFormatError, FileNotFoundError, json.JSONDecodeError) as exc:
        _report("data_format", str(exc))
        return EXIT_DATA
    except (NumericalError, DegenerateDataError, np.linalg.LinAlgError) as exc:
        _report("numerical", str(exc))
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
