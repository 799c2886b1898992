"""One-parameter-at-a-time experiment sweeps.

Unswept parameters keep their defaults. SNR sweeps evaluate one trained
model across points (the model itself does not depend on the evaluation
SNR); weight, latent-size and range-count sweeps retrain per point
because they change the optimization target or the architecture.
`joint_snr_db` moves communication and sensing SNR together.
"""

import copy
from dataclasses import dataclass

from .data import load_cifar10
from .errors import ConfigError, SenseCommError
from .results import build_record

SWEEP_PARAMETERS = (
    "task_weight_sen",
    "comm_snr_db",
    "sense_snr_db",
    "latent_size",
    "num_ranges",
    "joint_snr_db",
)

RETRAIN_DEFAULTS = {
    "task_weight_sen": True,
    "latent_size": True,
    "num_ranges": True,
    "comm_snr_db": False,
    "sense_snr_db": False,
    "joint_snr_db": False,
}


@dataclass
class SweepSpec:
    parameter: str
    values: list
    base_config: object  # ExperimentConfig
    retrain_per_point: bool | None = None  # None = parameter default

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(
                f"unknown sweep parameter {self.parameter!r}; "
                f"expected one of {SWEEP_PARAMETERS}"
            )
        if not self.values:
            raise ConfigError("sweep values must be non-empty")

    @property
    def retrain(self):
        if self.retrain_per_point is None:
            return RETRAIN_DEFAULTS[self.parameter]
        return self.retrain_per_point


def _point_config(base, parameter, value):
    """Base config with one swept parameter applied (training-time view)."""
    cfg = copy.deepcopy(base)
    if parameter == "task_weight_sen":
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"task_weight_sen must be in [0, 1], got {value}")
        cfg.train.w_sen = float(value)
        cfg.train.w_rec = 1.0 - float(value)
        cfg.train.w_sem = 0.0
        if value == 0.0:
            cfg.train.mode = "comm_only"
        elif value == 1.0:
            cfg.train.mode = "sense_only"
        else:
            cfg.train.mode = "jsc"
    elif parameter == "comm_snr_db":
        cfg.channel.comm_snr_db = float(value)
    elif parameter == "sense_snr_db":
        cfg.channel.sense_snr_db = float(value)
    elif parameter == "joint_snr_db":
        cfg.channel.comm_snr_db = float(value)
        cfg.channel.sense_snr_db = float(value)
    elif parameter == "latent_size":
        cfg.model.latent_size = int(value)
    elif parameter == "num_ranges":
        cfg.sensing.num_ranges = int(value)
    return cfg


def method_for_mode(mode):
    return {"comm_only": "comm_only", "sense_only": "sense_only"}.get(mode, "mtl")


def record_mode(mode):
    """ResultRecord mode field collapses training modes to jsc/jssc."""
    return "jssc" if mode == "jssc" else "jsc"


def _evaluate_point(estimator, cfg, test_images, test_classes):
    report = estimator.evaluate(
        test_images,
        test_classes,
        seed=cfg.eval.seed,
        batch_size=cfg.eval.batch_size,
        comm_snr_db=cfg.channel.comm_snr_db,
        sense_snr_db=cfg.channel.sense_snr_db,
    )
    if record_mode(cfg.train.mode) == "jsc":
        report = dict(report, semantic_accuracy=None)
    return report


def _record_for_point(cfg, metrics, n_train, status="ok"):
    return build_record(
        method=method_for_mode(cfg.train.mode),
        mode=record_mode(cfg.train.mode),
        seed=cfg.train.seed,
        weights={
            "w_rec": cfg.train.w_rec,
            "w_sen": cfg.train.w_sen,
            "w_sem": cfg.train.w_sem,
        },
        comm_snr_db=cfg.channel.comm_snr_db,
        sense_snr_db=cfg.channel.sense_snr_db,
        latent_size=cfg.model.latent_size,
        num_ranges=cfg.sensing.num_ranges,
        channel_kind=cfg.channel.kind,
        metrics=metrics,
        train_meta={
            "epochs": cfg.train.epochs,
            "samples": n_train,
            "eval_seed": cfg.eval.seed,
            "eval_subset": cfg.eval.subset_size,
        },
        status=status,
    )


def run_sweep(spec, split=None):
    """Train/evaluate one record per swept value; failed points are recorded
    with status='failed' and the sweep continues."""
    base = spec.base_config
    if split is None:
        split = load_cifar10(
            base.data.dir, subset_size=base.data.subset_size, seed=base.data.seed
        )
    test = split.test
    if base.eval.subset_size is not None:
        test = test.subset(range(min(base.eval.subset_size, len(test))))

    shared_estimator = None
    if not spec.retrain:
        shared_estimator = base.make_transceiver()
        shared_estimator.fit(split.train.images, split.train.class_ids)

    records = []
    for value in spec.values:
        cfg = _point_config(base, spec.parameter, value)
        try:
            if spec.retrain:
                estimator = cfg.make_transceiver()
                estimator.fit(split.train.images, split.train.class_ids)
            else:
                estimator = shared_estimator
            metrics = _evaluate_point(estimator, cfg, test.images, test.class_ids)
            records.append(_record_for_point(cfg, metrics, len(split.train)))
        except SenseCommError:
            records.append(
                _record_for_point(cfg, None, len(split.train), status="failed")
            )
    return records
