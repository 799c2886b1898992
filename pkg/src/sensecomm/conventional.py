"""Conventional baselines: the JPEG-2000 / RS(255,152) / 16-QAM link and
the threshold energy detector.

Each image becomes one 152-byte payload, one 255-byte codeword and 510
unit-energy 16-QAM symbols. On decode failure (the dominant outcome at
low SNR) the link scores a mid-gray fallback image so PSNR stays
well-defined. The Rayleigh receiver coherently removes the per-frame
fading (CSI on, the conventional default); the learned system never sees
CSI, an asymmetry that favors the baseline.
"""

from dataclasses import dataclass

import numpy as np
import torch
from sklearn.base import BaseEstimator, ClassifierMixin

from .channel import (
    SensingScenarioSpec,
    apply_awgn,
    apply_rayleigh,
    apply_sensing_channel,
    noise_generator,
    sample_scenario,
)
from .errors import ConfigError, ContractError, DecodeFailure
from .jpeg2000 import JPEG2000_TARGET_BYTES, jpeg2000_compress, jpeg2000_decompress
from .metrics import psnr, ssim
from .qam import bits_to_bytes, bytes_to_bits, qam16_demodulate, qam16_modulate
from .rs import RS_K, RS_N, rs_decode, rs_encode
from .validation import check_seed

FALLBACK_PIXEL = 0.5
SYMBOLS_PER_IMAGE = RS_N * 8 // 4  # 510


@dataclass
class CodedFrame:
    """One image after source and channel encoding."""

    payload: bytes              # 152 bytes of padded JPEG-2000 codestream
    codeword: bytes             # 255-byte systematic RS codeword
    symbols: np.ndarray         # 510 complex 16-QAM symbols

    def __post_init__(self):
        if len(self.payload) != RS_K or len(self.codeword) != RS_N:
            raise ContractError("frame sizes violate the RS(255,152) layout")
        if self.symbols.shape != (SYMBOLS_PER_IMAGE,):
            raise ContractError(
                f"expected {SYMBOLS_PER_IMAGE} symbols, got {self.symbols.shape}"
            )


def fallback_image():
    return np.full((32, 32, 3), FALLBACK_PIXEL)


def encode_image(image, target_bytes=JPEG2000_TARGET_BYTES):
    """Deterministic transmit side: compress, RS-encode, modulate."""
    payload = jpeg2000_compress(image, target_bytes)
    codeword = rs_encode(payload)
    symbols = qam16_modulate(bytes_to_bits(codeword))
    return CodedFrame(payload=payload, codeword=codeword, symbols=symbols)


def conventional_link(image, kind, snr_db, rng=None, csi=True, frame=None):
    """Full chain over one image; returns (reconstruction, info dict).

    `frame` lets callers reuse the deterministic encode across SNR points.
    """
    if kind not in ("awgn", "rayleigh"):
        raise ConfigError(f"unknown channel kind {kind!r}")
    if frame is None:
        frame = encode_image(image)
    if kind == "awgn":
        received = apply_awgn(frame.symbols, snr_db, rng)
    else:
        received, h = apply_rayleigh(frame.symbols, snr_db, rng, return_h=True)
        if csi:
            received = received / h
    raw = bits_to_bytes(qam16_demodulate(np.asarray(received)))
    byte_errors = int(
        np.count_nonzero(
            np.frombuffer(raw, np.uint8) != np.frombuffer(frame.codeword, np.uint8)
        )
    )
    info = {"byte_errors": byte_errors, "decode_failed": False}
    try:
        payload = rs_decode(raw)
        recon = jpeg2000_decompress(payload)
        info["payload_matched"] = payload == frame.payload
    except DecodeFailure:
        recon = fallback_image()
        info["decode_failed"] = True
        info["payload_matched"] = False
    return recon, info


def run_conventional_comm(images, kind, snr_db, seed=0, csi=True, frames=None):
    """Score the conventional link over a test set at one SNR point."""
    images = np.asarray(images)
    if frames is None:
        frames = [encode_image(img) for img in images]
    rng = noise_generator(check_seed(seed))
    psnrs, ssims, failures = [], [], 0
    for img, frame in zip(images, frames):
        recon, info = conventional_link(
            img, kind, snr_db, rng=rng, csi=csi, frame=frame
        )
        psnrs.append(psnr(img, recon))
        ssims.append(ssim(img, recon))
        failures += info["decode_failed"]
    return {
        "psnr_db": float(np.mean(psnrs)),
        "ssim": float(np.mean(ssims)),
        "decode_failure_rate": failures / len(images),
        "n_images": int(len(images)),
    }


def codec_only_psnr(image, target_bytes=JPEG2000_TARGET_BYTES):
    """Oracle: PSNR of the codec round trip with no channel."""
    frame = jpeg2000_compress(image, target_bytes)
    return psnr(image, jpeg2000_decompress(frame))


# ---------------------------------------------------------------------------
# conventional sensing: threshold test on the average echo energy
# ---------------------------------------------------------------------------

def energy_statistic(echo):
    """T = (1/n_c) * sum |y_i|^2 along the last axis."""
    if isinstance(echo, torch.Tensor):
        echo = echo.numpy()
    echo = np.asarray(echo)
    if echo.shape[-1] < 1:
        raise ContractError("echo must contain at least one symbol")
    return np.mean(np.abs(echo) ** 2, axis=-1)


@dataclass
class DetectorCalibration:
    threshold: float
    snr_db: float
    trials: int

    def __post_init__(self):
        if self.threshold <= 0:
            raise ConfigError(f"threshold must be positive, got {self.threshold}")


def _draw_echoes(scenario, n_symbols, classes, kind, rng):
    """Round-trip echoes for unit-power Gaussian transmit signals."""
    n = len(classes)
    re = torch.randn((n, n_symbols), generator=rng)
    im = torch.randn((n, n_symbols), generator=rng)
    x = torch.complex(re, im) * np.sqrt(0.5)
    return apply_sensing_channel(x, scenario, classes, kind, rng).numpy()


def calibrate_threshold(scenario, n_symbols, kind="awgn", trials=100_000, seed=0):
    """Pick the energy threshold maximizing balanced accuracy by Monte Carlo
    sweep at the configured sensing SNR."""
    rng = noise_generator(check_seed(seed))
    half = trials // 2
    absent = torch.zeros(half, dtype=torch.long)
    present = torch.randint(
        scenario.num_ranges, (trials - half,), generator=rng
    ) + 1
    t_absent = energy_statistic(_draw_echoes(scenario, n_symbols, absent, kind, rng))
    t_present = energy_statistic(_draw_echoes(scenario, n_symbols, present, kind, rng))

    pooled = np.concatenate([t_absent, t_present])
    labels = np.concatenate([np.zeros(half), np.ones(trials - half)])
    order = np.argsort(pooled, kind="stable")
    pooled, labels = pooled[order], labels[order]
    # balanced accuracy of "present iff T > tau" for tau between sorted stats
    tnr = np.cumsum(labels == 0) / max((labels == 0).sum(), 1)
    tpr = 1.0 - np.cumsum(labels == 1) / max((labels == 1).sum(), 1)
    balanced = 0.5 * (tnr + tpr)
    best = int(np.argmax(balanced))
    upper = pooled[best + 1] if best + 1 < len(pooled) else pooled[best] * 1.01
    threshold = 0.5 * (pooled[best] + upper)
    return DetectorCalibration(
        threshold=float(threshold),
        snr_db=scenario.base_sense_snr_db,
        trials=trials,
    )


def energy_detect(echo, calibration):
    """1 (present) iff the echo energy statistic exceeds the threshold."""
    return (energy_statistic(echo) > calibration.threshold).astype(np.int64)


class EnergyDetector(BaseEstimator, ClassifierMixin):
    """Threshold detector on average reflected power, calibrated by
    Monte Carlo sweep at the configured sensing SNR."""

    def __init__(
        self,
        sense_snr_db=3.0,
        n_symbols=10,
        kind="awgn",
        num_ranges=1,
        range_step_db=3.0,
        absent_prior=0.5,
        calibration_trials=100_000,
        seed=0,
    ):
        self.sense_snr_db = sense_snr_db
        self.n_symbols = n_symbols
        self.kind = kind
        self.num_ranges = num_ranges
        self.range_step_db = range_step_db
        self.absent_prior = absent_prior
        self.calibration_trials = calibration_trials
        self.seed = seed

    def scenario_spec(self):
        return SensingScenarioSpec(
            num_ranges=self.num_ranges,
            base_sense_snr_db=self.sense_snr_db,
            range_step_db=self.range_step_db,
            absent_prior=self.absent_prior,
        )

    def fit(self, X=None, y=None):
        self.calibration_ = calibrate_threshold(
            self.scenario_spec(),
            self.n_symbols,
            kind=self.kind,
            trials=self.calibration_trials,
            seed=self.seed,
        )
        self.threshold_ = self.calibration_.threshold
        return self

    def predict(self, echoes):
        if not hasattr(self, "calibration_"):
            raise ConfigError("detector is not calibrated; call fit() first")
        return energy_detect(np.atleast_2d(np.asarray(echoes)), self.calibration_)

    def measure_accuracy(self, trials=100_000, seed=1):
        """Detection accuracy on fresh scenario draws (presence vs absence)."""
        if not hasattr(self, "calibration_"):
            raise ConfigError("detector is not calibrated; call fit() first")
        rng = noise_generator(check_seed(seed))
        scenario = self.scenario_spec()
        classes = sample_scenario(scenario, trials, rng)
        echoes = _draw_echoes(scenario, self.n_symbols, classes, self.kind, rng)
        decisions = energy_detect(echoes, self.calibration_)
        truth = (classes.numpy() > 0).astype(np.int64)
        return float(np.mean(decisions == truth))
