"""Command-line entry point: data fetching, training, evaluation, sweeps,
conventional baselines, result merging and plotting.

Every flag overrides the matching config key; `--config` points at a
YAML/JSON file with the section.key layout described in `config.py`.
"""

import json
from pathlib import Path

import click
import numpy as np

from . import conventional, data, models, results, sweep as sweep_mod
from .config import ExperimentConfig, apply_overrides, load_config
from .errors import SenseCommError
from .plotting import plot as plot_records


def _load_base_config(config_path, overrides):
    cfg = load_config(config_path) if config_path else ExperimentConfig()
    return apply_overrides(cfg, overrides)


def _load_split(cfg):
    return data.load_cifar10(
        cfg.data.dir, subset_size=cfg.data.subset_size, seed=cfg.data.seed
    )


def _eval_subset(cfg, split):
    test = split.test
    if cfg.eval.subset_size is not None:
        test = test.subset(range(min(cfg.eval.subset_size, len(test))))
    return test


def _fail(exc):
    raise click.ClickException(str(exc))


@click.group()
def main():
    """Joint sensing and semantic communication experiments."""


# ---------------------------------------------------------------------- data

@main.command("fetch-data")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--data-dir", default=None, help="override data.dir")
@click.option("--synthetic", is_flag=True,
              help="generate seeded synthetic data instead of downloading")
@click.option("--n-train", default=50000, show_default=True)
@click.option("--n-test", default=10000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def fetch_data(config_path, data_dir, synthetic, n_train, n_test, seed):
    """Download CIFAR-10 binaries, or write synthetic files in that format."""
    try:
        cfg = _load_base_config(config_path, {"data.dir": data_dir})
        target = Path(cfg.data.dir)
        if synthetic:
            data.write_synthetic_cifar10(target, n_train, n_test, seed)
        else:
            data.fetch_cifar10(target)
        click.echo(f"data ready in {target}")
    except SenseCommError as exc:
        _fail(exc)


# --------------------------------------------------------------------- train

_TRAIN_OVERRIDES = [
    ("--data-dir", "data.dir", str),
    ("--subset-size", "data.subset_size", int),
    ("--data-seed", "data.seed", int),
    ("--channel", "channel.kind", str),
    ("--comm-snr-db", "channel.comm_snr_db", float),
    ("--sense-snr-db", "channel.sense_snr_db", float),
    ("--num-ranges", "sensing.num_ranges", int),
    ("--range-step-db", "sensing.range_step_db", float),
    ("--latent-size", "model.latent_size", int),
    ("--semantic-classes", "model.semantic_classes", int),
    ("--mode", "train.mode", str),
    ("--w-rec", "train.w_rec", float),
    ("--w-sen", "train.w_sen", float),
    ("--w-sem", "train.w_sem", float),
    ("--epochs", "train.epochs", int),
    ("--batch-size", "train.batch_size", int),
    ("--learning-rate", "train.learning_rate", float),
    ("--seed", "train.seed", int),
    ("--eval-seed", "eval.seed", int),
    ("--eval-subset", "eval.subset_size", int),
]


def _override_options(command):
    for flag, dotted, caster in reversed(_TRAIN_OVERRIDES):
        command = click.option(
            flag, dotted.replace(".", "__"), type=caster, default=None,
            help=f"override {dotted}",
        )(command)
    return command


def _collect_overrides(kwargs):
    return {
        dotted: kwargs.pop(dotted.replace(".", "__"))
        for _, dotted, _ in _TRAIN_OVERRIDES
    }


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True,
              help="checkpoint directory")
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="write the per-epoch training log as JSONL")
@_override_options
def train(config_path, out_dir, log_path, **kwargs):
    """Train the four networks jointly and save a checkpoint."""
    try:
        cfg = _load_base_config(config_path, _collect_overrides(kwargs))
        split = _load_split(cfg)
        estimator = cfg.make_transceiver()
        estimator.fit(split.train.images, split.train.class_ids)
        models.save_bundle(estimator.bundle_, out_dir)
        (Path(out_dir) / "experiment.json").write_text(
            json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
        )
        if log_path:
            Path(log_path).parent.mkdir(parents=True, exist_ok=True)
            with open(log_path, "w") as fh:
                for row in estimator.history_:
                    fh.write(json.dumps(row, sort_keys=True) + "\n")
        click.echo(f"checkpoint written to {out_dir}")
    except SenseCommError as exc:
        _fail(exc)


# ---------------------------------------------------------------------- eval

@main.command("eval")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--model", "model_dir", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), default="results.jsonl",
              show_default=True)
@_override_options
def eval_cmd(config_path, model_dir, out_path, **kwargs):
    """Evaluate a checkpoint on the test split and append a result record."""
    try:
        overrides = _collect_overrides(kwargs)
        exp_path = Path(model_dir) / "experiment.json"
        if config_path is None and exp_path.is_file():
            from .config import config_from_dict

            cfg = apply_overrides(
                config_from_dict(json.loads(exp_path.read_text())), overrides
            )
        else:
            cfg = _load_base_config(config_path, overrides)
        split = _load_split(cfg)
        test = _eval_subset(cfg, split)
        bundle = models.load_bundle(model_dir)

        from .estimator import evaluate_bundle
        from .channel import ChannelSpec, SensingScenarioSpec

        report = evaluate_bundle(
            bundle,
            test.images,
            test.class_ids,
            ChannelSpec(cfg.channel.kind, cfg.channel.comm_snr_db),
            ChannelSpec(cfg.channel.kind, cfg.channel.sense_snr_db, role="sensing"),
            SensingScenarioSpec(
                num_ranges=cfg.sensing.num_ranges,
                base_sense_snr_db=cfg.channel.sense_snr_db,
                range_step_db=cfg.sensing.range_step_db,
                absent_prior=cfg.sensing.absent_prior,
            ),
            seed=cfg.eval.seed,
            batch_size=cfg.eval.batch_size,
        )
        if sweep_mod.record_mode(cfg.train.mode) == "jsc":
            report = dict(report, semantic_accuracy=None)
        record = sweep_mod._record_for_point(cfg, report, len(split.train))
        results.persist([record], out_path)
        click.echo(json.dumps(record.to_dict(), sort_keys=True))
    except SenseCommError as exc:
        _fail(exc)


# --------------------------------------------------------------------- sweep

@main.command("sweep")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--param", "parameter", required=True,
              type=click.Choice(sweep_mod.SWEEP_PARAMETERS))
@click.option("--from", "start", type=float, default=None)
@click.option("--to", "stop", type=float, default=None)
@click.option("--step", type=float, default=None)
@click.option("--values", default=None, help="comma-separated explicit values")
@click.option("--retrain/--no-retrain", "retrain", default=None,
              help="retrain per point (default depends on the parameter)")
@click.option("--out", "out_path", type=click.Path(), default="results.jsonl",
              show_default=True)
@_override_options
def sweep(config_path, parameter, start, stop, step, values, retrain, out_path,
          **kwargs):
    """Sweep one system parameter, holding the rest at their defaults."""
    try:
        cfg = _load_base_config(config_path, _collect_overrides(kwargs))
        if values is not None:
            point_list = [float(v) for v in values.split(",") if v.strip()]
        elif start is not None and stop is not None:
            width = step or 1.0
            count = int(round((stop - start) / width)) + 1
            point_list = [start + i * width for i in range(count)]
        else:
            raise click.ClickException(
                "provide either --values or --from/--to/--step"
            )
        if parameter in ("latent_size", "num_ranges"):
            point_list = [int(v) for v in point_list]
        spec = sweep_mod.SweepSpec(
            parameter=parameter,
            values=point_list,
            base_config=cfg,
            retrain_per_point=retrain,
        )
        records = sweep_mod.run_sweep(spec)
        results.persist(records, out_path)
        click.echo(f"{len(records)} records appended to {out_path}")
    except SenseCommError as exc:
        _fail(exc)


# ------------------------------------------------------------------ baseline

@main.group()
def baseline():
    """Conventional communication and sensing baselines."""


@baseline.command("comm")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--channel", "kind", type=click.Choice(["awgn", "rayleigh"]),
              default="awgn", show_default=True)
@click.option("--snr-from", type=float, default=-10.0, show_default=True)
@click.option("--snr-to", type=float, default=10.0, show_default=True)
@click.option("--snr-step", type=float, default=1.0, show_default=True)
@click.option("--images", "n_images", type=int, default=200, show_default=True,
              help="test images to score per point")
@click.option("--csi/--no-csi", default=True, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--data-dir", default=None, help="override data.dir")
@click.option("--out", "out_path", type=click.Path(), default="results.jsonl",
              show_default=True)
def baseline_comm(config_path, kind, snr_from, snr_to, snr_step, n_images,
                  csi, seed, data_dir, out_path):
    """JPEG-2000 + RS(255,152) + 16-QAM link across an SNR range."""
    try:
        cfg = _load_base_config(config_path, {"data.dir": data_dir})
        split = _load_split(cfg)
        images = split.test.images[:n_images]
        frames = [conventional.encode_image(img) for img in images]
        count = int(round((snr_to - snr_from) / snr_step)) + 1
        records = []
        for i in range(count):
            snr = snr_from + i * snr_step
            report = conventional.run_conventional_comm(
                images, kind, snr, seed=seed, csi=csi, frames=frames
            )
            records.append(
                results.build_record(
                    method="conventional",
                    mode="jsc",
                    seed=seed,
                    weights={"w_rec": 1.0, "w_sen": 0.0, "w_sem": 0.0},
                    comm_snr_db=snr,
                    sense_snr_db=cfg.channel.sense_snr_db,
                    latent_size=cfg.model.latent_size,
                    num_ranges=cfg.sensing.num_ranges,
                    channel_kind=kind,
                    metrics={
                        "psnr_db": report["psnr_db"],
                        "ssim": report["ssim"],
                    },
                    train_meta={
                        "n_images": report["n_images"],
                        "decode_failure_rate": report["decode_failure_rate"],
                        "csi": csi,
                    },
                )
            )
        results.persist(records, out_path)
        click.echo(f"{len(records)} records appended to {out_path}")
    except SenseCommError as exc:
        _fail(exc)


@baseline.command("sense")
@click.option("--snr", "sense_snr_db", type=float, default=3.0, show_default=True)
@click.option("--nc", "n_symbols", type=int, default=10, show_default=True,
              help="echo length in complex symbols")
@click.option("--channel", "kind", type=click.Choice(["awgn", "rayleigh"]),
              default="awgn", show_default=True)
@click.option("--num-ranges", type=int, default=1, show_default=True)
@click.option("--trials", type=int, default=100000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default="results.jsonl",
              show_default=True)
def baseline_sense(sense_snr_db, n_symbols, kind, num_ranges, trials, seed,
                   out_path):
    """Energy-detector sensing baseline at one SNR point."""
    try:
        detector = conventional.EnergyDetector(
            sense_snr_db=sense_snr_db,
            n_symbols=n_symbols,
            kind=kind,
            num_ranges=num_ranges,
            calibration_trials=trials,
            seed=seed,
        ).fit()
        acc = detector.measure_accuracy(trials=trials, seed=seed + 1)
        record = results.build_record(
            method="conventional",
            mode="jsc",
            seed=seed,
            weights={"w_rec": 0.0, "w_sen": 1.0, "w_sem": 0.0},
            comm_snr_db=float("nan"),
            sense_snr_db=sense_snr_db,
            latent_size=2 * n_symbols,
            num_ranges=num_ranges,
            channel_kind=kind,
            metrics={"sensing_accuracy": acc},
            train_meta={
                "detector": "energy",
                "threshold": detector.threshold_,
                "trials": trials,
            },
        )
        results.persist([record], out_path)
        click.echo(json.dumps(record.to_dict(), sort_keys=True))
    except SenseCommError as exc:
        _fail(exc)


# ------------------------------------------------------------- plot / merge

@main.command("plot")
@click.option("--results", "results_path", type=click.Path(), required=True)
@click.option("--x", "x_field", required=True)
@click.option("--y", "y_field", required=True)
@click.option("--group-by", multiple=True)
@click.option("--out", "out_path", type=click.Path(), default="figure.svg",
              show_default=True)
def plot_cmd(results_path, x_field, y_field, group_by, out_path):
    """Render a line plot from persisted result records."""
    try:
        records = results.load_results(results_path)
        plot_records(records, x_field, y_field, group_by=list(group_by),
                     out=out_path)
        click.echo(f"figure written to {out_path}")
    except SenseCommError as exc:
        _fail(exc)


@main.command("merge")
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@click.option("--out", "out_path", type=click.Path(), required=True)
def merge(inputs, out_path):
    """Validate and concatenate result files from distinct runs."""
    try:
        merged = results.merge_results(inputs, out_path)
        click.echo(f"{len(merged)} records merged into {out_path}")
    except SenseCommError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
