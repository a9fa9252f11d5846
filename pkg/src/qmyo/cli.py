"""Command-line interface.

Subcommands: synth, train, decode, evaluate, learning-curve,
inspect-model. Exit codes: 0 success, 1 usage error (bad flags, missing
files), 2 data error, 3 numeric/model error.

Numeric options resolve as CLI flag > config file > built-in default;
the config file is flat ``key = value`` lines with ``#`` comments.
"""

import argparse
import os
import sys

import numpy as np

from . import datasets, experiment, features, operators, synthetic
from .control import decode_features
from .errors import DataError, ModelError
from .operators import DecodeConfig, Dof

_DEFAULTS = {
    "window_ms": 100.0,
    "sample_rate": 1024.0,
    "rest_threshold": 0.05,
    "overlap_epsilon": 1e-6,
    "block_vote": "majority",
    "seed": 0,
    "channels": 8,
    "noise_sigma": 0.0,
    "per_action": 500,
    "angle_min": 5.0,
    "angle_max": 40.0,
    "blocks": 55,
    "windows": 8216,
    "geometry": "masking",
    "sizes": (500, 2000),
    "dofs": (Dof.FLEXION_EXTENSION, Dof.PRONATION_SUPINATION),
}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_dofs(raw: str) -> tuple[Dof, ...]:
    return tuple(Dof(part.strip()) for part in raw.split(",") if part.strip())


def _parse_sizes(raw: str) -> tuple[int, ...]:
    return tuple(int(part) for part in raw.split(",") if part.strip())


_FILE_CASTS = {
    "window_ms": float,
    "sample_rate": float,
    "rest_threshold": float,
    "overlap_epsilon": float,
    "block_vote": str,
    "seed": int,
    "channels": int,
    "noise_sigma": float,
    "per_action": int,
    "angle_min": float,
    "angle_max": float,
    "blocks": int,
    "windows": int,
    "geometry": str,
    "sizes": _parse_sizes,
    "dofs": _parse_dofs,
}


def load_config_file(path) -> dict:
    """Parse flat ``key = value`` lines into typed settings."""
    settings = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _FILE_CASTS:
                raise DataError(f"{path}:{lineno}: unknown setting {key!r}")
            try:
                settings[key] = _FILE_CASTS[key](raw.strip())
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return settings


class _Settings:
    """CLI > config file > defaults resolution for one invocation."""

    def __init__(self, args):
        self.args = args
        self.file_cfg = load_config_file(args.config) if getattr(args, "config", None) else {}

    def get(self, name):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        if name in self.file_cfg:
            return self.file_cfg[name]
        return _DEFAULTS[name]

    def decode_config(self) -> DecodeConfig:
        return DecodeConfig(
            rest_threshold=self.get("rest_threshold"),
            overlap_epsilon=self.get("overlap_epsilon"),
            block_vote=self.get("block_vote"),
        )


def _require_file(parser: _Parser, path):
    if not os.path.isfile(path):
        parser.error(f"file not found: {path}")
    return path


def _add_config_options(sub: _Parser):
    sub.add_argument("--config", metavar="FILE", help="flat key=value settings file")
    sub.add_argument("--rest-threshold", dest="rest_threshold", type=float)
    sub.add_argument("--overlap-epsilon", dest="overlap_epsilon", type=float)
    sub.add_argument("--block-vote", dest="block_vote", choices=["majority", "any", "all"])


def _cmd_synth(parser: _Parser, args) -> int:
    settings = _Settings(args)
    dofs = tuple(args.dofs) if args.dofs else tuple(settings.get("dofs"))
    builder = (
        synthetic.orthogonal_mixing_model
        if settings.get("geometry") == "orthogonal"
        else synthetic.default_mixing_model
    )
    model = builder(
        n_channels=settings.get("channels"),
        dofs=dofs,
        noise_sigma=settings.get("noise_sigma"),
        seed=settings.get("seed"),
    )
    angle_range = (settings.get("angle_min"), settings.get("angle_max"))
    samples = synthetic.generate_training_set(
        model, settings.get("per_action"), angle_range
    )
    train_ds = datasets.from_training_samples(samples, model.n_channels, source="synthetic")
    datasets.save_feature_dataset(train_ds, args.train_out)
    print(f"wrote {train_ds.n_rows} training rows to {args.train_out}")

    scenario = synthetic.default_scenario(
        dofs=dofs,
        n_blocks=settings.get("blocks"),
        total_windows=settings.get("windows"),
        angle_max=settings.get("angle_max"),
    )
    test_set = synthetic.generate_test_scenario(model, scenario)
    test_ds = datasets.from_test_set(test_set, source="synthetic")
    datasets.save_feature_dataset(test_ds, args.test_out)
    print(
        f"wrote {test_ds.n_rows} test windows in {len(test_set.blocks)} blocks "
        f"to {args.test_out}"
    )
    return 0


def _cmd_train(parser: _Parser, args) -> int:
    _require_file(parser, args.data)
    settings = _Settings(args)
    ds = datasets.load_feature_dataset(args.data)
    samples = datasets.to_training_samples(ds)
    if args.size is not None:
        samples = experiment.subset_per_action(samples, args.size)
    dofs = list(args.dofs) if args.dofs else None
    model = operators.train(
        samples, ds.n_channels, dofs=dofs, config=settings.decode_config()
    )
    operators.save_model(model, args.out)
    print(f"trained {len(model.dofs)} DOF(s) on {len(samples)} samples -> {args.out}")
    for dof in model.sorted_dofs():
        print(f"  {dof.value}: overlap {model.dofs[dof].overlap!r}")
    return 0


def _feature_windows(parser: _Parser, args, settings: _Settings):
    if args.data:
        _require_file(parser, args.data)
        ds = datasets.load_feature_dataset(args.data)
        return ds.feature_vectors()
    _require_file(parser, args.raw)
    rec = features.load_recording(args.raw, sample_rate=settings.get("sample_rate"))
    windows = features.segment_windows(rec, settings.get("window_ms"))
    return [features.mav(w) for w in windows]


def _cmd_decode(parser: _Parser, args) -> int:
    _require_file(parser, args.model)
    settings = _Settings(args)
    model = operators.load_model(args.model)
    if args.rest_threshold is not None or args.overlap_epsilon is not None or args.block_vote:
        model = operators.with_decode_config(model, settings.decode_config())
    windows = _feature_windows(parser, args, settings)
    actions = [decode_features(fv, model) for fv in windows]
    datasets.save_decode_csv(actions, model.sorted_dofs(), args.out)
    print(f"decoded {len(actions)} windows -> {args.out}")
    return 0


def _cmd_evaluate(parser: _Parser, args) -> int:
    _require_file(parser, args.test)
    settings = _Settings(args)
    test_ds = datasets.load_feature_dataset(args.test)
    if args.model:
        _require_file(parser, args.model)
        model = operators.load_model(args.model)
        if args.rest_threshold is not None or args.overlap_epsilon is not None or args.block_vote:
            model = operators.with_decode_config(model, settings.decode_config())
        report = experiment.report_for_model(model, test_ds)
    else:
        _require_file(parser, args.train_data)
        train_ds = datasets.load_feature_dataset(args.train_data)
        cfg = experiment.ExperimentConfig(
            window_ms=settings.get("window_ms"),
            sample_rate=settings.get("sample_rate"),
            rest_threshold=settings.get("rest_threshold"),
            overlap_epsilon=settings.get("overlap_epsilon"),
            block_vote=settings.get("block_vote"),
            training_sizes=tuple(args.sizes) if args.sizes else tuple(settings.get("sizes")),
            seed=settings.get("seed"),
            dofs=tuple(args.dofs) if args.dofs else None,
        )
        report = experiment.run_experiment(cfg, train_ds, test_ds)
    text = experiment.render_report_text(report)
    if args.report_out:
        with open(args.report_out, "w") as fh:
            fh.write(text)
    print(text, end="")
    if args.csv_out:
        with open(args.csv_out, "w") as fh:
            fh.write(experiment.render_report_csv(report))
    if args.decode_out:
        datasets.save_decode_csv(
            report.results[-1].actions, report.dofs, args.decode_out
        )
    return 0


def _cmd_learning_curve(parser: _Parser, args) -> int:
    _require_file(parser, args.data)
    ds = datasets.load_feature_dataset(args.data)
    samples = datasets.to_training_samples(ds)
    dofs = list(args.dofs) if args.dofs else None
    curves = operators.overlap_curve(samples, list(args.sizes), ds.n_channels, dofs=dofs)
    ordered = sorted(curves)
    header = ["samples"] + [f"overlap_{dof.value}" for dof in ordered]
    rows = [header] + [
        [str(size)] + [repr(curves[dof][i]) for dof in ordered]
        for i, size in enumerate(args.sizes)
    ]
    text = "\n".join(",".join(row) for row in rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def _cmd_inspect_model(parser: _Parser, args) -> int:
    _require_file(parser, args.model)
    model = operators.load_model(args.model)
    cfg = model.decode_config
    print(f"channels: {model.n_channels}")
    print(
        f"decode_config: rest_threshold={cfg.rest_threshold!r} "
        f"overlap_epsilon={cfg.overlap_epsilon!r} block_vote={cfg.block_vote}"
    )
    for dof in model.sorted_dofs():
        ops = model.dofs[dof]
        print(f"[{dof.value}]")
        print(f"  theta_positive_max: {ops.theta_pos_max!r}")
        print(f"  theta_negative_max: {ops.theta_neg_max!r}")
        print(f"  overlap: {ops.overlap!r}")
        for name, op in (("p_positive", ops.p_pos), ("p_negative", ops.p_neg), ("p_zero", ops.p_zero)):
            spectrum = np.linalg.eigvalsh(op.matrix)
            rendered = ", ".join(f"{v:.6g}" for v in spectrum)
            print(f"  {name} spectrum: [{rendered}]")
        print(f"  p_zero min eigenvalue: {ops.min_zero_eigenvalue()!r}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="qmyo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic train/test datasets")
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.add_argument("--channels", type=int)
    p.add_argument("--dofs", nargs="+", type=Dof)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--per-action", dest="per_action", type=int)
    p.add_argument("--angle-min", dest="angle_min", type=float)
    p.add_argument("--angle-max", dest="angle_max", type=float)
    p.add_argument("--blocks", type=int)
    p.add_argument("--windows", type=int)
    p.add_argument("--geometry", choices=["masking", "orthogonal"])
    p.add_argument("--config")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="learn measurement operators from a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dofs", nargs="+", type=Dof)
    p.add_argument("--size", type=int, help="samples per action (default: all)")
    _add_config_options(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("decode", help="decode feature windows or a raw recording")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--data", help="feature dataset CSV")
    group.add_argument("--raw", help="raw recording CSV (ch1..chN)")
    p.add_argument("--out", required=True)
    p.add_argument("--sample-rate", dest="sample_rate", type=float)
    p.add_argument("--window-ms", dest="window_ms", type=float)
    _add_config_options(p)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("evaluate", help="score a model or run a sized experiment")
    p.add_argument("--test", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--model")
    group.add_argument("--train-data", dest="train_data")
    p.add_argument("--sizes", nargs="+", type=int)
    p.add_argument("--dofs", nargs="+", type=Dof)
    p.add_argument("--seed", type=int)
    p.add_argument("--report-out", dest="report_out")
    p.add_argument("--csv-out", dest="csv_out")
    p.add_argument("--decode-out", dest="decode_out")
    _add_config_options(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("learning-curve", help="prototype overlap vs training size")
    p.add_argument("--data", required=True)
    p.add_argument("--sizes", nargs="+", type=int, required=True)
    p.add_argument("--dofs", nargs="+", type=Dof)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_learning_curve)

    p = sub.add_parser("inspect-model", help="print operator spectra and overlaps")
    p.add_argument("--model", required=True)
    p.set_defaults(func=_cmd_inspect_model)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except DataError as exc:
        print(f"qmyo: data error: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"qmyo: model error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"qmyo: file not found: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
