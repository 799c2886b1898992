"""Reconstruction-fidelity and classification metrics.

PSNR uses MAX=1 on unit-range images and is capped at 100 dB when the MSE
is zero. SSIM is the windowed form with an 11x11 Gaussian window
(sigma=1.5), C1=0.01^2, C2=0.03^2 at dynamic range 1, computed per channel
and averaged. Both expect images already clipped to [0, 1]; model outputs
are clipped by the caller (`clip_unit`), never inside the network.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import correlate2d

from .errors import ContractError

PSNR_CAP_DB = 100.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


@dataclass
class MetricReport:
    psnr_db: float
    ssim: float
    sensing_accuracy: float
    semantic_accuracy: float | None


def clip_unit(image):
    """Clip to [0, 1]; applied to linear-head predictions before scoring."""
    return np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)


def psnr(reference, prediction):
    """Peak signal-to-noise ratio in dB, 10*log10(1/MSE), capped at 100 dB."""
    ref = np.asarray(reference, dtype=np.float64)
    pred = np.asarray(prediction, dtype=np.float64)
    if ref.shape != pred.shape:
        raise ContractError(f"shape mismatch: {ref.shape} vs {pred.shape}")
    mse = float(np.mean((ref - pred) ** 2))
    if mse <= 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)


def _gaussian_window():
    half = (SSIM_WINDOW - 1) // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * SSIM_SIGMA**2))
    g /= g.sum()
    return np.outer(g, g)


_WINDOW = _gaussian_window()


def _ssim_single(a, b):
    # Weighted local moments on the fully-covered ('valid') interior.
    mu_a = correlate2d(a, _WINDOW, mode="valid")
    mu_b = correlate2d(b, _WINDOW, mode="valid")
    maa = correlate2d(a * a, _WINDOW, mode="valid")
    mbb = correlate2d(b * b, _WINDOW, mode="valid")
    mab = correlate2d(a * b, _WINDOW, mode="valid")
    var_a = maa - mu_a**2
    var_b = mbb - mu_b**2
    cov = mab - mu_a * mu_b
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a**2 + mu_b**2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(np.mean(num / den))


def ssim(reference, prediction):
    """Mean structural similarity between two unit-range images."""
    ref = np.asarray(reference, dtype=np.float64)
    pred = np.asarray(prediction, dtype=np.float64)
    if ref.shape != pred.shape:
        raise ContractError(f"shape mismatch: {ref.shape} vs {pred.shape}")
    if ref.ndim == 2:
        ref = ref[..., None]
        pred = pred[..., None]
    if ref.ndim != 3:
        raise ContractError(f"expected (H, W) or (H, W, C) image, got {ref.shape}")
    if ref.shape[0] < SSIM_WINDOW or ref.shape[1] < SSIM_WINDOW:
        raise ContractError(
            f"image {ref.shape[:2]} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    vals = [_ssim_single(ref[..., c], pred[..., c]) for c in range(ref.shape[2])]
    return float(np.mean(vals))


def accuracy(predicted_scores, true_classes):
    """Fraction of argmax matches; ties break toward the lowest class index."""
    scores = np.asarray(predicted_scores)
    labels = np.asarray(true_classes)
    if scores.ndim != 2 or scores.shape[0] != labels.shape[0]:
        raise ContractError(
            f"scores {scores.shape} not aligned with labels {labels.shape}"
        )
    if labels.size == 0:
        raise ContractError("accuracy of an empty batch is undefined")
    return float(np.mean(np.argmax(scores, axis=1) == labels))
