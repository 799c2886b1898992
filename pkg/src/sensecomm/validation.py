"""Input validation helpers used at the public API boundaries."""

import numpy as np

from .errors import ContractError

IMAGE_SHAPE = (32, 32, 3)


def check_images(X, name="X"):
    """Coerce to a float32 (N, 32, 32, 3) array of unit-range pixels."""
    X = np.asarray(X)
    if X.ndim == 3:
        X = X[None]
    if X.ndim != 4 or X.shape[1:] != IMAGE_SHAPE:
        raise ContractError(
            f"{name} must have shape (N, 32, 32, 3), got {X.shape}"
        )
    X = X.astype(np.float32, copy=False)
    if not np.isfinite(X).all():
        raise ContractError(f"{name} contains non-finite pixel values")
    if X.min() < -1e-6 or X.max() > 1 + 1e-6:
        raise ContractError(
            f"{name} pixels must lie in [0, 1]; got range "
            f"[{X.min():.4f}, {X.max():.4f}]"
        )
    return X


def check_class_ids(y, n_samples, name="y"):
    """Coerce to an int64 vector of CIFAR-10 class indices."""
    y = np.asarray(y)
    if y.shape != (n_samples,):
        raise ContractError(f"{name} must have shape ({n_samples},), got {y.shape}")
    y = y.astype(np.int64, copy=False)
    if y.size and (y.min() < 0 or y.max() > 9):
        raise ContractError(f"{name} entries must be class ids in [0, 9]")
    return y


def check_seed(seed, name="seed"):
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ContractError(f"{name} must be an integer, got {seed!r}")
    return int(seed)
