"""CIFAR-10 ingest in its binary-record form, plus batching utilities.

Record layout: byte 0 is the label (0-9), bytes 1-3072 are pixels as
row-major planes (1024 R, 1024 G, 1024 B). Pixels are normalized to
[0, 1] on load; `round(pixel * 255)` recovers the source byte exactly.

A seeded synthetic generator writes files in the identical layout for
offline or desk-scale runs (`write_synthetic_cifar10`); every class gets
a distinct spatial pattern so the semantic task is learnable.
"""

import hashlib
import os
import tarfile
import tempfile
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, IngestError
from .validation import check_seed

CLASS_NAMES = (
    "airplane", "automobile", "bird", "cat", "deer",
    "dog", "frog", "horse", "ship", "truck",
)
# bird, cat, deer, dog, frog, horse
ANIMAL_CLASS_IDS = frozenset({2, 3, 4, 5, 6, 7})

TRAIN_FILES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))
TEST_FILE = "test_batch.bin"
RECORD_BYTES = 1 + 32 * 32 * 3

CIFAR10_URL = "https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz"
CIFAR10_TGZ_MD5 = "c32a1d4ab5d03f1284b67883e8d87530"


def semantic_label(class_id):
    """1 for the six animal classes, 0 otherwise."""
    if not isinstance(class_id, (int, np.integer)) or isinstance(class_id, bool):
        raise FormatError(f"class id must be an integer, got {class_id!r}")
    if not 0 <= class_id <= 9:
        raise FormatError(f"class id {class_id} outside [0, 9]")
    return 1 if class_id in ANIMAL_CLASS_IDS else 0


@dataclass
class ImageSet:
    """Images with their class and semantic labels, aligned by index."""

    images: np.ndarray      # (N, 32, 32, 3) float32 in [0, 1]
    class_ids: np.ndarray   # (N,) int64 in [0, 9]
    semantic_ids: np.ndarray  # (N,) int64 in {0, 1}

    def __len__(self):
        return self.images.shape[0]

    def subset(self, indices):
        idx = np.asarray(indices)
        return ImageSet(self.images[idx], self.class_ids[idx], self.semantic_ids[idx])

    def content_hash(self):
        """Stable digest of the pixel bytes and labels."""
        h = hashlib.sha256()
        h.update(np.round(self.images * 255).astype(np.uint8).tobytes())
        h.update(self.class_ids.astype(np.int64).tobytes())
        return h.hexdigest()


@dataclass
class DatasetSplit:
    train: ImageSet
    test: ImageSet


@dataclass
class ImageBatch:
    images: np.ndarray
    class_ids: np.ndarray
    semantic_ids: np.ndarray
    indices: np.ndarray = field(default=None)

    def __len__(self):
        return self.images.shape[0]


def _read_batch_file(path):
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"missing CIFAR-10 batch file: {path}")
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0 or raw.size % RECORD_BYTES != 0:
        raise FormatError(
            f"{path}: size {raw.size} is not a whole number of "
            f"{RECORD_BYTES}-byte records"
        )
    records = raw.reshape(-1, RECORD_BYTES)
    labels = records[:, 0].astype(np.int64)
    if labels.max() > 9:
        raise FormatError(f"{path}: label byte {labels.max()} outside [0, 9]")
    # planes to HWC
    pixels = records[:, 1:].reshape(-1, 3, 32, 32).transpose(0, 2, 3, 1)
    return pixels, labels


def _to_image_set(pixels_u8, labels):
    images = pixels_u8.astype(np.float32) / 255.0
    semantic = np.fromiter(
        (semantic_label(int(c)) for c in labels), dtype=np.int64, count=len(labels)
    )
    return ImageSet(images, labels, semantic)


def load_cifar10(directory, subset_size=None, seed=0):
    """Load the six binary batch files and return a normalized split.

    If `subset_size` is given, the train part is a seeded uniform
    subsample; the test part is kept full.
    """
    seed = check_seed(seed)
    directory = Path(directory)
    train_parts = [_read_batch_file(directory / name) for name in TRAIN_FILES]
    test_pixels, test_labels = _read_batch_file(directory / TEST_FILE)

    train_pixels = np.concatenate([p for p, _ in train_parts])
    train_labels = np.concatenate([l for _, l in train_parts])

    train = _to_image_set(train_pixels, train_labels)
    test = _to_image_set(test_pixels, test_labels)

    if subset_size is not None:
        if not 1 <= subset_size <= len(train):
            raise IngestError(
                f"subset_size {subset_size} outside [1, {len(train)}]"
            )
        rng = np.random.default_rng(seed)
        idx = rng.choice(len(train), size=subset_size, replace=False)
        train = train.subset(np.sort(idx))
    return DatasetSplit(train=train, test=test)


def batches(part, batch_size, shuffle=False, seed=0, epoch=0):
    """Yield ImageBatch covering `part` exactly once; last batch may be short.

    The shuffle permutation is a pure function of (seed, epoch).
    """
    if batch_size < 1:
        raise FormatError(f"batch_size must be >= 1, got {batch_size}")
    n = len(part)
    order = np.arange(n)
    if shuffle:
        rng = np.random.default_rng([check_seed(seed), check_seed(epoch)])
        order = rng.permutation(n)
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        yield ImageBatch(
            part.images[idx], part.class_ids[idx], part.semantic_ids[idx], idx
        )


# ---------------------------------------------------------------------------
# seeded synthetic data in the same binary layout (for offline runs)
# ---------------------------------------------------------------------------

# per-class spatial frequency (cycles over the 32px extent) and RGB tint
_CLASS_FREQS = (
    (1, 0), (0, 1), (2, 1), (1, 2), (3, 0),
    (0, 3), (2, 2), (3, 2), (2, 3), (4, 1),
)
_CLASS_TINTS = (
    (1.00, 0.55, 0.55), (0.55, 1.00, 0.55), (0.55, 0.55, 1.00),
    (1.00, 1.00, 0.50), (1.00, 0.55, 1.00), (0.50, 1.00, 1.00),
    (1.00, 0.80, 0.55), (0.65, 0.85, 1.00), (0.85, 1.00, 0.65),
    (0.95, 0.95, 0.95),
)


def _synthesize_records(n, rng):
    """Class-stamped sinusoidal images, returned as (n, 3073) uint8 records."""
    labels = rng.integers(0, 10, size=n)
    yy, xx = np.meshgrid(np.arange(32), np.arange(32), indexing="ij")
    phase = rng.uniform(0, 2 * np.pi, size=(n, 1, 1))
    contrast = rng.uniform(0.25, 0.45, size=(n, 1, 1))
    brightness = rng.uniform(0.40, 0.60, size=(n, 1, 1))
    freqs = np.asarray(_CLASS_FREQS, dtype=np.float64)[labels]
    fx = freqs[:, 0].reshape(-1, 1, 1)
    fy = freqs[:, 1].reshape(-1, 1, 1)
    wave = np.sin(2 * np.pi * (fx * xx + fy * yy) / 32.0 + phase)
    gray = brightness + contrast * wave
    tints = np.asarray(_CLASS_TINTS, dtype=np.float64)[labels]
    img = gray[..., None] * tints[:, None, None, :]
    img = img + rng.normal(0.0, 0.02, size=img.shape)
    img_u8 = (np.clip(img, 0.0, 1.0) * 255.0).round().astype(np.uint8)

    records = np.empty((n, RECORD_BYTES), dtype=np.uint8)
    records[:, 0] = labels
    records[:, 1:] = img_u8.transpose(0, 3, 1, 2).reshape(n, -1)
    return records


def write_synthetic_cifar10(directory, n_train=50000, n_test=10000, seed=0):
    """Write synthetic data in the standard six-file binary layout."""
    seed = check_seed(seed)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    per_file = [n_train // 5] * 5
    per_file[-1] += n_train - sum(per_file)
    for name, count in zip(TRAIN_FILES, per_file):
        _synthesize_records(count, rng).tofile(directory / name)
    _synthesize_records(n_test, rng).tofile(directory / TEST_FILE)
    return directory


def fetch_cifar10(directory):
    """Download and unpack the canonical binary distribution into `directory`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    wanted = set(TRAIN_FILES) | {TEST_FILE}
    if all((directory / name).is_file() for name in wanted):
        return directory
    try:
        with urllib.request.urlopen(CIFAR10_URL, timeout=60) as resp:
            payload = resp.read()
    except (urllib.error.URLError, OSError) as exc:
        raise IngestError(
            f"could not download CIFAR-10 from {CIFAR10_URL}: {exc}. "
            "On an offline machine, generate data with "
            "`sensecomm fetch-data --synthetic` instead."
        ) from exc
    digest = hashlib.md5(payload).hexdigest()
    if digest != CIFAR10_TGZ_MD5:
        raise IngestError(
            f"downloaded archive checksum {digest} != expected {CIFAR10_TGZ_MD5}"
        )
    with tempfile.NamedTemporaryFile(suffix=".tar.gz", delete=False) as tmp:
        tmp.write(payload)
        tmp_path = tmp.name
    try:
        _extract_batches(tmp_path, directory, wanted)
    finally:
        os.unlink(tmp_path)
    return directory


def _extract_batches(tar_path, directory, wanted):
    found = set()
    with tarfile.open(tar_path, "r:gz") as tar:
        for member in tar.getmembers():
            base = os.path.basename(member.name)
            if base in wanted and member.isfile():
                with tar.extractfile(member) as fh:
                    (Path(directory) / base).write_bytes(fh.read())
                found.add(base)
    missing = wanted - found
    if missing:
        raise IngestError(f"archive did not contain: {sorted(missing)}")
