"""The four networks: convolutional encoder, convolutional reconstruction
decoder, and feedforward sensing/semantic decoders.

Activations follow the system contract: ReLU hidden everywhere, linear
heads on the encoder (followed by structural power normalization) and the
reconstruction decoder, softmax heads on the two classifiers. Images cross
the API boundary as (B, 32, 32, 3); channel-first layout is internal.
"""

import copy
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import NamedTuple

import numpy as np
import torch
from torch import nn

from .channel import (
    ChannelSpec,
    SensingScenarioSpec,
    apply_awgn,
    apply_rayleigh,
    apply_sensing_channel,
    complex_to_real,
    normalize_power,
    real_to_complex,
    sample_scenario,
    _as_generator,
)
from .errors import CheckpointError, ConfigError, ContractError

CHECKPOINT_FORMAT = 1


@dataclass
class ModelConfig:
    latent_size: int = 20
    num_ranges: int = 1
    semantic_classes: int = 2
    dropout_rate: float = 0.1
    encoder_filters: tuple = (32, 32, 64)
    encoder_dense: int = 256
    decoder_filters: tuple = (64, 32, 32)
    decoder_dense: int = 256
    sensing_hidden: tuple = (64, 32)
    semantic_hidden: tuple = (128, 64)

    def __post_init__(self):
        if self.latent_size % 2 != 0 or self.latent_size < 2:
            raise ConfigError(
                f"latent_size must be a positive even integer (complex "
                f"pairing), got {self.latent_size}"
            )
        if self.num_ranges < 1:
            raise ConfigError(f"num_ranges must be >= 1, got {self.num_ranges}")
        if self.semantic_classes < 2:
            raise ConfigError(
                f"semantic_classes must be >= 2, got {self.semantic_classes}"
            )
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate outside [0, 1): {self.dropout_rate}")
        self.encoder_filters = tuple(self.encoder_filters)
        self.decoder_filters = tuple(self.decoder_filters)
        self.sensing_hidden = tuple(self.sensing_hidden)
        self.semantic_hidden = tuple(self.semantic_hidden)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


class ImageEncoder(nn.Module):
    """CNN image -> unit-power latent of `latent_size` real values."""

    def __init__(self, config):
        super().__init__()
        f1, f2, f3 = config.encoder_filters
        self.conv = nn.Sequential(
            nn.Conv2d(3, f1, 3, padding=1), nn.ReLU(),
            nn.Conv2d(f1, f2, 3, padding=1), nn.ReLU(),
            nn.MaxPool2d(2),
            nn.Dropout(config.dropout_rate),
            nn.Conv2d(f2, f3, 3, padding=1), nn.ReLU(),
            nn.MaxPool2d(2),
        )
        self.head = nn.Sequential(
            nn.Flatten(),
            nn.Linear(f3 * 8 * 8, config.encoder_dense), nn.ReLU(),
            nn.Linear(config.encoder_dense, config.latent_size),
        )

    def forward(self, images):
        x = images.permute(0, 3, 1, 2)
        latent = self.head(self.conv(x))
        return normalize_power(latent)


class ReconstructionDecoder(nn.Module):
    """Latent-sized channel observation -> linear 32x32x3 reconstruction."""

    def __init__(self, config):
        super().__init__()
        f1, f2, f3 = config.decoder_filters
        self.f1 = f1
        self.fc = nn.Sequential(
            nn.Linear(config.latent_size, config.decoder_dense), nn.ReLU(),
            nn.Linear(config.decoder_dense, f1 * 8 * 8), nn.ReLU(),
        )
        self.conv = nn.Sequential(
            nn.Upsample(scale_factor=2), nn.Conv2d(f1, f2, 3, padding=1), nn.ReLU(),
            nn.Upsample(scale_factor=2), nn.Conv2d(f2, f3, 3, padding=1), nn.ReLU(),
            nn.Conv2d(f3, 3, 3, padding=1),
        )

    def forward(self, received):
        x = self.fc(received).view(-1, self.f1, 8, 8)
        return self.conv(x).permute(0, 2, 3, 1)


def _mlp_classifier(in_width, hidden, out_width):
    layers = []
    width = in_width
    for h in hidden:
        layers += [nn.Linear(width, h), nn.ReLU()]
        width = h
    layers += [nn.Linear(width, out_width), nn.Softmax(dim=-1)]
    return nn.Sequential(*layers)


class SensingDecoder(nn.Module):
    """Echo observation -> softmax over {absent, range 0..R-1}."""

    def __init__(self, config):
        super().__init__()
        self.net = _mlp_classifier(
            config.latent_size, config.sensing_hidden, config.num_ranges + 1
        )

    def forward(self, echo):
        return self.net(echo)


class SemanticDecoder(nn.Module):
    """Channel observation -> softmax over the semantic classes."""

    def __init__(self, config):
        super().__init__()
        self.net = _mlp_classifier(
            config.latent_size, config.semantic_hidden, config.semantic_classes
        )

    def forward(self, received):
        return self.net(received)


def _seeded_build(factory, seed):
    with torch.random.fork_rng():
        torch.manual_seed(int(seed))
        return factory()


def build_encoder(config, seed):
    return _seeded_build(lambda: ImageEncoder(config), seed)


def build_reconstruction_decoder(config, seed):
    return _seeded_build(lambda: ReconstructionDecoder(config), seed)


def build_sensing_decoder(config, seed):
    return _seeded_build(lambda: SensingDecoder(config), seed)


def build_semantic_decoder(config, seed):
    return _seeded_build(lambda: SemanticDecoder(config), seed)


@dataclass
class TrainingFingerprint:
    seed: int
    epochs: int
    data_hash: str

    def to_dict(self):
        return asdict(self)


@dataclass
class ModelBundle:
    """The four networks plus the configuration that produced them."""

    encoder: nn.Module
    reconstruction_decoder: nn.Module
    sensing_decoder: nn.Module
    semantic_decoder: nn.Module
    config: ModelConfig
    seed: int = 0
    fingerprint: TrainingFingerprint | None = None

    def networks(self):
        return {
            "encoder": self.encoder,
            "reconstruction_decoder": self.reconstruction_decoder,
            "sensing_decoder": self.sensing_decoder,
            "semantic_decoder": self.semantic_decoder,
        }

    def parameters(self):
        for net in self.networks().values():
            yield from net.parameters()

    def train(self):
        for net in self.networks().values():
            net.train()

    def eval(self):
        for net in self.networks().values():
            net.eval()

    def state_dicts(self):
        return {
            name: copy.deepcopy(net.state_dict())
            for name, net in self.networks().items()
        }

    def load_state_dicts(self, states):
        for name, net in self.networks().items():
            net.load_state_dict(states[name])


def build_bundle(config, seed):
    """Deterministically initialized bundle; same seed, same parameters."""
    return ModelBundle(
        encoder=build_encoder(config, seed),
        reconstruction_decoder=build_reconstruction_decoder(config, seed + 1),
        sensing_decoder=build_sensing_decoder(config, seed + 2),
        semantic_decoder=build_semantic_decoder(config, seed + 3),
        config=config,
        seed=int(seed),
    )


class ForwardOutput(NamedTuple):
    reconstruction: torch.Tensor   # (B, 32, 32, 3), linear head
    sensing_probs: torch.Tensor    # (B, R+1), rows sum to 1
    semantic_probs: torch.Tensor   # (B, semantic_classes)
    latent: torch.Tensor           # (B, n), unit average complex power
    scenario_classes: torch.Tensor  # (B,), 0 = absent


def _comm_channel(symbols, spec, rng):
    if spec.kind == "awgn":
        return apply_awgn(symbols, spec.snr_db, rng)
    return apply_rayleigh(symbols, spec.snr_db, rng)


def forward_jssc(
    bundle,
    images,
    comm_spec,
    sense_spec,
    scenario,
    rng=None,
    scenario_classes=None,
):
    """End-to-end pass: encode once, then decode over two channels.

    The receiver-side decoders share one communication-channel
    realization (they observe the same physical signal); the sensing
    decoder sees an independent round-trip echo. Fresh draws happen per
    call; pass a seeded generator for reproducibility.
    """
    rng = _as_generator(rng)
    if not isinstance(images, torch.Tensor):
        images = torch.as_tensor(np.asarray(images), dtype=torch.float32)
    if images.ndim != 4 or images.shape[1:] != (32, 32, 3):
        raise ContractError(f"expected images (B, 32, 32, 3), got {tuple(images.shape)}")
    batch = images.shape[0]
    if scenario_classes is None:
        scenario_classes = sample_scenario(scenario, batch, rng)
    elif not isinstance(scenario_classes, torch.Tensor):
        scenario_classes = torch.as_tensor(np.asarray(scenario_classes)).long()

    latent = bundle.encoder(images)
    symbols = real_to_complex(latent)

    received = complex_to_real(_comm_channel(symbols, comm_spec, rng))
    reconstruction = bundle.reconstruction_decoder(received)
    semantic_probs = bundle.semantic_decoder(received)

    echo = apply_sensing_channel(
        symbols, scenario, scenario_classes, sense_spec.kind, rng
    )
    sensing_probs = bundle.sensing_decoder(complex_to_real(echo))

    return ForwardOutput(
        reconstruction, sensing_probs, semantic_probs, latent, scenario_classes
    )


# ---------------------------------------------------------------------------
# checkpoints: manifest.json + one flat named-tensor file per network
# ---------------------------------------------------------------------------

def save_bundle(bundle, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    shapes = {}
    for name, net in bundle.networks().items():
        tensors = {k: v.detach().cpu().numpy() for k, v in net.state_dict().items()}
        np.savez(directory / f"{name}.npz", **tensors)
        shapes[name] = {k: list(v.shape) for k, v in tensors.items()}
    manifest = {
        "format_version": CHECKPOINT_FORMAT,
        "config": bundle.config.to_dict(),
        "seed": bundle.seed,
        "fingerprint": bundle.fingerprint.to_dict() if bundle.fingerprint else None,
        "shapes": shapes,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return directory


def load_bundle(directory):
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise CheckpointError(f"no manifest.json in {directory}")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("format_version") != CHECKPOINT_FORMAT:
        raise CheckpointError(
            f"unsupported checkpoint format {manifest.get('format_version')}"
        )
    config = ModelConfig.from_dict(manifest["config"])
    bundle = build_bundle(config, manifest["seed"])
    if manifest["fingerprint"] is not None:
        bundle.fingerprint = TrainingFingerprint(**manifest["fingerprint"])
    for name, net in bundle.networks().items():
        path = directory / f"{name}.npz"
        if not path.is_file():
            raise CheckpointError(f"missing parameter file {path}")
        with np.load(path) as data:
            expected = manifest["shapes"][name]
            state = {}
            for key, shape in expected.items():
                if key not in data:
                    raise CheckpointError(f"{path}: missing tensor {key!r}")
                arr = data[key]
                if list(arr.shape) != shape:
                    raise CheckpointError(
                        f"{path}: tensor {key!r} has shape {list(arr.shape)}, "
                        f"manifest says {shape}"
                    )
                state[key] = torch.from_numpy(arr)
        net.load_state_dict(state)
    return bundle
