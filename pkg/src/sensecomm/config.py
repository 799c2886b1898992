"""Experiment configuration: defaults, file loading, dotted-key overrides.

Files are YAML (JSON is a YAML subset, so either works) with one section
per subsystem: `data`, `channel`, `sensing`, `model`, `train`,
`baseline`, `eval`. CLI flags override individual dotted keys, e.g.
``train.seed``.
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError

# default task weights per training mode
MODE_WEIGHTS = {
    "jsc": (0.95, 0.05, 0.0),
    "jssc": (0.95, 0.025, 0.025),
    "comm_only": (1.0, 0.0, 0.0),
    "sense_only": (0.0, 1.0, 0.0),
}


@dataclass
class DataSection:
    dir: str = "data"
    subset_size: int | None = None
    seed: int = 0


@dataclass
class ChannelSection:
    kind: str = "awgn"
    comm_snr_db: float = 3.0
    sense_snr_db: float = 3.0


@dataclass
class SensingSection:
    num_ranges: int = 1
    range_step_db: float = 3.0
    absent_prior: float = 0.5


@dataclass
class ModelSection:
    latent_size: int = 20
    semantic_classes: int = 2
    dropout_rate: float = 0.1


@dataclass
class TrainSection:
    mode: str = "jsc"
    w_rec: float = 0.95
    w_sen: float = 0.05
    w_sem: float = 0.0
    epochs: int = 10
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0
    validation_fraction: float = 0.1


@dataclass
class BaselineSection:
    csi: bool = True
    target_bytes: int = 152


@dataclass
class EvalSection:
    seed: int = 0
    batch_size: int = 256
    subset_size: int | None = None  # None = full test split


@dataclass
class ExperimentConfig:
    data: DataSection = field(default_factory=DataSection)
    channel: ChannelSection = field(default_factory=ChannelSection)
    sensing: SensingSection = field(default_factory=SensingSection)
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainSection = field(default_factory=TrainSection)
    baseline: BaselineSection = field(default_factory=BaselineSection)
    eval: EvalSection = field(default_factory=EvalSection)

    def to_dict(self):
        return dataclasses.asdict(self)

    def make_transceiver(self):
        from .estimator import MultiTaskTransceiver

        return MultiTaskTransceiver(
            mode=self.train.mode,
            w_rec=self.train.w_rec,
            w_sen=self.train.w_sen,
            w_sem=self.train.w_sem,
            latent_size=self.model.latent_size,
            num_ranges=self.sensing.num_ranges,
            semantic_classes=self.model.semantic_classes,
            dropout_rate=self.model.dropout_rate,
            channel_kind=self.channel.kind,
            comm_snr_db=self.channel.comm_snr_db,
            sense_snr_db=self.channel.sense_snr_db,
            range_step_db=self.sensing.range_step_db,
            absent_prior=self.sensing.absent_prior,
            epochs=self.train.epochs,
            batch_size=self.train.batch_size,
            learning_rate=self.train.learning_rate,
            validation_fraction=self.train.validation_fraction,
            seed=self.train.seed,
        )


_SECTIONS = {
    "data": DataSection,
    "channel": ChannelSection,
    "sensing": SensingSection,
    "model": ModelSection,
    "train": TrainSection,
    "baseline": BaselineSection,
    "eval": EvalSection,
}


def _build_section(cls, values, where):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    return cls(**values)


def config_from_dict(raw):
    raw = dict(raw or {})
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    sections = {}
    for name, cls in _SECTIONS.items():
        values = dict(raw.get(name) or {})
        if name == "train" and "mode" in values:
            mode = values["mode"]
            if mode not in MODE_WEIGHTS:
                raise ConfigError(f"unknown train.mode {mode!r}")
            # a mode choice implies its default weights unless given explicitly
            defaults = MODE_WEIGHTS[mode]
            for key, default in zip(("w_rec", "w_sen", "w_sem"), defaults):
                values.setdefault(key, default)
        sections[name] = _build_section(cls, values, name)
    return ExperimentConfig(**sections)


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must contain a mapping at the top level")
    return config_from_dict(raw)


def apply_overrides(config, overrides):
    """Apply {'section.key': value} overrides; None values are ignored."""
    for dotted, value in overrides.items():
        if value is None:
            continue
        try:
            section_name, key = dotted.split(".", 1)
        except ValueError:
            raise ConfigError(f"override key {dotted!r} must look like 'section.key'")
        if section_name not in _SECTIONS:
            raise ConfigError(f"unknown config section {section_name!r}")
        section = getattr(config, section_name)
        if not hasattr(section, key):
            raise ConfigError(f"unknown config key {dotted!r}")
        setattr(section, key, value)
        if dotted == "train.mode":
            for wkey, default in zip(
                ("w_rec", "w_sen", "w_sem"), MODE_WEIGHTS[_require_mode(value)]
            ):
                if f"train.{wkey}" not in overrides or overrides[f"train.{wkey}"] is None:
                    setattr(config.train, wkey, default)
    return config


def _require_mode(mode):
    if mode not in MODE_WEIGHTS:
        raise ConfigError(f"unknown train.mode {mode!r}")
    return mode
