"""Result records and their append-only JSONL persistence.

One record per evaluation point. `config_hash` is a stable digest of
every field that affects the outcome, so identical configurations are
identifiable across files; `timestamp` is bookkeeping and excluded from
all determinism comparisons.
"""

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import ResultSchemaError

SCHEMA_VERSION = 1
METHODS = ("mtl", "comm_only", "sense_only", "conventional")
MODES = ("jsc", "jssc")

_METRIC_RANGES = {
    "psnr_db": (0.0, 100.0),
    "ssim": (-1.0, 1.0),
    "sensing_accuracy": (0.0, 1.0),
    "semantic_accuracy": (0.0, 1.0),
}


def config_hash(payload):
    """Stable digest of a JSON-serializable description of a run."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _utcnow():
    return datetime.now(timezone.utc).isoformat()


@dataclass
class ResultRecord:
    run_id: str
    method: str
    mode: str
    seed: int
    weights: dict
    comm_snr_db: float
    sense_snr_db: float
    latent_size: int
    num_ranges: int
    channel_kind: str
    psnr_db: float | None
    ssim: float | None
    sensing_accuracy: float | None
    semantic_accuracy: float | None
    train_meta: dict
    config_hash: str
    timestamp: str = field(default_factory=_utcnow)
    status: str = "ok"
    schema: int = SCHEMA_VERSION

    def to_dict(self):
        return dataclasses.asdict(self)

    def comparable(self):
        """All fields that participate in determinism comparisons."""
        d = self.to_dict()
        d.pop("timestamp")
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ResultSchemaError(f"unknown record fields: {sorted(unknown)}")
        missing = {f.name for f in dataclasses.fields(cls) if
                   f.default is dataclasses.MISSING and
                   f.default_factory is dataclasses.MISSING} - set(d)
        if missing:
            raise ResultSchemaError(f"missing record fields: {sorted(missing)}")
        record = cls(**d)
        record.validate()
        return record

    def validate(self):
        if self.schema != SCHEMA_VERSION:
            raise ResultSchemaError(
                f"unknown schema version {self.schema!r} (supported: {SCHEMA_VERSION})"
            )
        if self.method not in METHODS:
            raise ResultSchemaError(f"unknown method {self.method!r}")
        if self.mode not in MODES:
            raise ResultSchemaError(f"unknown mode {self.mode!r}")
        if self.status not in ("ok", "failed"):
            raise ResultSchemaError(f"unknown status {self.status!r}")
        for name, (low, high) in _METRIC_RANGES.items():
            value = getattr(self, name)
            if value is None:
                continue
            if not low <= value <= high:
                raise ResultSchemaError(
                    f"{name}={value} outside [{low}, {high}]"
                )
        return self


def build_record(
    *,
    method,
    mode,
    seed,
    weights,
    comm_snr_db,
    sense_snr_db,
    latent_size,
    num_ranges,
    channel_kind,
    metrics=None,
    train_meta=None,
    status="ok",
):
    """Assemble a validated record; run_id derives from the config hash."""
    train_meta = dict(train_meta or {})
    digest = config_hash(
        {
            "method": method,
            "mode": mode,
            "seed": seed,
            "weights": weights,
            "comm_snr_db": comm_snr_db,
            "sense_snr_db": sense_snr_db,
            "latent_size": latent_size,
            "num_ranges": num_ranges,
            "channel_kind": channel_kind,
            "train_meta": train_meta,
        }
    )
    metrics = metrics or {}
    return ResultRecord(
        run_id=f"{method}-{digest[:12]}",
        method=method,
        mode=mode,
        seed=seed,
        weights=dict(weights),
        comm_snr_db=comm_snr_db,
        sense_snr_db=sense_snr_db,
        latent_size=latent_size,
        num_ranges=num_ranges,
        channel_kind=channel_kind,
        psnr_db=metrics.get("psnr_db"),
        ssim=metrics.get("ssim"),
        sensing_accuracy=metrics.get("sensing_accuracy"),
        semantic_accuracy=metrics.get("semantic_accuracy"),
        train_meta=train_meta,
        config_hash=digest,
        status=status,
    ).validate()


def persist(records, path):
    """Append records as JSONL, one line each; prior lines are untouched."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
    return path


def load_results(path):
    path = Path(path)
    if not path.is_file():
        raise ResultSchemaError(f"results file not found: {path}")
    records = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ResultSchemaError(
                f"{path}:{lineno}: malformed JSON ({exc.msg})"
            ) from exc
        try:
            records.append(ResultRecord.from_dict(payload))
        except ResultSchemaError as exc:
            raise ResultSchemaError(f"{path}:{lineno}: {exc}") from exc
    return records


def merge_results(inputs, out):
    """Validate and concatenate result files produced by distinct runs."""
    merged = []
    for path in inputs:
        merged.extend(load_results(path))
    persist(merged, out)
    return merged
