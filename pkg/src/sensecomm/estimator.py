"""Multi-task training of the transceiver and evaluation on held-out data.

`MultiTaskTransceiver` is the sklearn-style face of the system: construct
with hyperparameters, `fit(X, y)` on unit-range images and class ids,
then `evaluate` / `predict`. The combined objective is the weighted sum
of the per-task losses (pixel MSE, scenario cross-entropy, semantic
cross-entropy); a fresh channel realization and scenario draw is made for
every sample in every epoch.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import torch
from sklearn.base import BaseEstimator

from .channel import ChannelSpec, SensingScenarioSpec, noise_generator
from .data import ANIMAL_CLASS_IDS, batches, ImageSet
from .errors import ConfigError, TrainingDiverged
from .metrics import accuracy, clip_unit, psnr, ssim
from .models import ModelConfig, TrainingFingerprint, build_bundle, forward_jssc
from .validation import check_class_ids, check_images, check_seed

TRAIN_MODES = ("jsc", "jssc", "comm_only", "sense_only")
_PROB_FLOOR = 1e-7


@dataclass
class TaskWeights:
    w_rec: float = 0.95
    w_sen: float = 0.05
    w_sem: float = 0.0

    def __post_init__(self):
        for name in ("w_rec", "w_sen", "w_sem"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.w_rec + self.w_sen + self.w_sem <= 0:
            raise ConfigError("at least one task weight must be positive")

    def check_mode(self, mode):
        if mode not in TRAIN_MODES:
            raise ConfigError(f"unknown mode {mode!r}; expected one of {TRAIN_MODES}")
        if mode == "jsc" and self.w_sem != 0:
            raise ConfigError("jsc mode requires w_sem = 0")
        if mode == "comm_only" and (self.w_sen != 0 or self.w_sem != 0):
            raise ConfigError("comm_only mode requires w_sen = w_sem = 0")
        if mode == "sense_only" and (self.w_rec != 0 or self.w_sem != 0):
            raise ConfigError("sense_only mode requires w_rec = w_sem = 0")

    def to_dict(self):
        return {"w_rec": self.w_rec, "w_sen": self.w_sen, "w_sem": self.w_sem}


class LossTargets(NamedTuple):
    pixels: torch.Tensor    # (B, 32, 32, 3)
    scenario: torch.Tensor  # (B,) int64, 0 = absent
    semantic: torch.Tensor  # (B,) int64


def _cross_entropy(probs, targets):
    picked = probs.gather(1, targets.view(-1, 1)).clamp(min=_PROB_FLOOR)
    return -torch.log(picked).mean()


def combined_loss(reconstruction, sensing_probs, semantic_probs, targets, weights):
    """Weighted sum of task losses; components returned unweighted."""
    mse = ((reconstruction - targets.pixels) ** 2).mean()
    ce_sen = _cross_entropy(sensing_probs, targets.scenario)
    ce_sem = _cross_entropy(semantic_probs, targets.semantic)
    total = weights.w_rec * mse + weights.w_sen * ce_sen + weights.w_sem * ce_sem
    components = {
        "reconstruction": float(mse.detach()),
        "sensing": float(ce_sen.detach()),
        "semantic": float(ce_sem.detach()),
    }
    return total, components


def semantic_targets(class_ids, semantic_classes):
    """Task labels for the semantic head: animal membership, or raw classes
    for the 10-way variant."""
    class_ids = np.asarray(class_ids)
    if semantic_classes == 10:
        return class_ids.astype(np.int64)
    if semantic_classes == 2:
        return np.isin(class_ids, sorted(ANIMAL_CLASS_IDS)).astype(np.int64)
    raise ConfigError(f"no semantic labeling rule for {semantic_classes} classes")


def evaluate_bundle(
    bundle,
    images,
    class_ids,
    comm_spec,
    sense_spec,
    scenario,
    seed=0,
    batch_size=256,
):
    """Score a bundle on images: PSNR/SSIM (per-image means), sensing and
    semantic accuracies, and the unweighted loss components.

    Channel realizations and scenario draws come from a generator seeded
    with `seed`, so results are reproducible and independent of training.
    """
    images = check_images(images)
    class_ids = check_class_ids(class_ids, images.shape[0])
    sem_ids = semantic_targets(class_ids, bundle.config.semantic_classes)
    part = ImageSet(images, class_ids, sem_ids)
    rng = noise_generator(check_seed(seed))

    bundle.eval()
    psnrs, ssims = [], []
    sen_hits = sem_hits = total = 0
    mse_sum = ce_sen_sum = ce_sem_sum = 0.0
    with torch.no_grad():
        for batch in batches(part, batch_size):
            x = torch.as_tensor(batch.images)
            out = forward_jssc(bundle, x, comm_spec, sense_spec, scenario, rng=rng)
            targets = LossTargets(
                x,
                out.scenario_classes,
                torch.as_tensor(batch.semantic_ids),
            )
            _, comps = combined_loss(
                out.reconstruction, out.sensing_probs, out.semantic_probs,
                targets, TaskWeights(1.0, 1.0, 1.0),
            )
            n = len(batch)
            mse_sum += comps["reconstruction"] * n
            ce_sen_sum += comps["sensing"] * n
            ce_sem_sum += comps["semantic"] * n

            recon = clip_unit(out.reconstruction.numpy())
            for i in range(n):
                psnrs.append(psnr(batch.images[i], recon[i]))
                ssims.append(ssim(batch.images[i], recon[i]))
            sen_hits += accuracy(
                out.sensing_probs.numpy(), out.scenario_classes.numpy()
            ) * n
            sem_hits += accuracy(out.semantic_probs.numpy(), batch.semantic_ids) * n
            total += n

    return {
        "psnr_db": float(np.mean(psnrs)),
        "ssim": float(np.mean(ssims)),
        "sensing_accuracy": sen_hits / total,
        "semantic_accuracy": sem_hits / total,
        "loss_rec": mse_sum / total,
        "loss_sen": ce_sen_sum / total,
        "loss_sem": ce_sem_sum / total,
        "n_images": total,
    }


class MultiTaskTransceiver(BaseEstimator):
    """Jointly trained encoder + three decoders over simulated channels.

    Parameters mirror the experiment configuration: task weights, channel
    kind and SNRs, sensing scenario, architecture knobs, and the Adam
    loop settings. All randomness derives from `seed`.
    """

    def __init__(
        self,
        mode="jsc",
        w_rec=0.95,
        w_sen=0.05,
        w_sem=0.0,
        latent_size=20,
        num_ranges=1,
        semantic_classes=2,
        dropout_rate=0.1,
        channel_kind="awgn",
        comm_snr_db=3.0,
        sense_snr_db=3.0,
        range_step_db=3.0,
        absent_prior=0.5,
        epochs=10,
        batch_size=64,
        learning_rate=1e-3,
        validation_fraction=0.1,
        seed=0,
    ):
        self.mode = mode
        self.w_rec = w_rec
        self.w_sen = w_sen
        self.w_sem = w_sem
        self.latent_size = latent_size
        self.num_ranges = num_ranges
        self.semantic_classes = semantic_classes
        self.dropout_rate = dropout_rate
        self.channel_kind = channel_kind
        self.comm_snr_db = comm_snr_db
        self.sense_snr_db = sense_snr_db
        self.range_step_db = range_step_db
        self.absent_prior = absent_prior
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.validation_fraction = validation_fraction
        self.seed = seed

    # -- configuration views -------------------------------------------------

    def task_weights(self):
        weights = TaskWeights(self.w_rec, self.w_sen, self.w_sem)
        weights.check_mode(self.mode)
        return weights

    def model_config(self):
        return ModelConfig(
            latent_size=self.latent_size,
            num_ranges=self.num_ranges,
            semantic_classes=self.semantic_classes,
            dropout_rate=self.dropout_rate,
        )

    def comm_spec(self, snr_db=None):
        return ChannelSpec(
            kind=self.channel_kind,
            snr_db=self.comm_snr_db if snr_db is None else snr_db,
        )

    def sense_spec(self):
        return ChannelSpec(
            kind=self.channel_kind, snr_db=self.sense_snr_db, role="sensing"
        )

    def scenario_spec(self, sense_snr_db=None):
        return SensingScenarioSpec(
            num_ranges=self.num_ranges,
            base_sense_snr_db=(
                self.sense_snr_db if sense_snr_db is None else sense_snr_db
            ),
            range_step_db=self.range_step_db,
            absent_prior=self.absent_prior,
        )

    # -- training ------------------------------------------------------------

    def fit(self, X, y):
        """Adam-optimize all four networks jointly on the combined loss."""
        X = check_images(X)
        y = check_class_ids(y, X.shape[0])
        weights = self.task_weights()
        seed = check_seed(self.seed)
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ConfigError(
                f"validation_fraction outside [0, 1): {self.validation_fraction}"
            )

        sem_ids = semantic_targets(y, self.semantic_classes)
        n_val = int(round(self.validation_fraction * X.shape[0]))
        perm = np.random.default_rng(seed).permutation(X.shape[0])
        val_idx, fit_idx = perm[:n_val], perm[n_val:]
        if fit_idx.size == 0:
            raise ConfigError("validation split leaves no training samples")
        train_part = ImageSet(X[fit_idx], y[fit_idx], sem_ids[fit_idx])

        torch.manual_seed(seed)
        torch.set_flush_denormal(True)
        bundle = build_bundle(self.model_config(), seed)
        optimizer = torch.optim.Adam(bundle.parameters(), lr=self.learning_rate)
        comm = self.comm_spec()
        sense = self.sense_spec()
        scenario = self.scenario_spec()

        history = []
        best = {"score": math.inf, "state": None, "epoch": -1}
        for epoch in range(self.epochs):
            bundle.train()
            sums = {"total": 0.0, "rec": 0.0, "sen": 0.0, "sem": 0.0}
            seen = 0
            for batch in batches(
                train_part, self.batch_size, shuffle=True, seed=seed, epoch=epoch
            ):
                x = torch.as_tensor(batch.images)
                out = forward_jssc(bundle, x, comm, sense, scenario, rng=None)
                targets = LossTargets(
                    x, out.scenario_classes, torch.as_tensor(batch.semantic_ids)
                )
                total, comps = combined_loss(
                    out.reconstruction, out.sensing_probs, out.semantic_probs,
                    targets, weights,
                )
                if not torch.isfinite(total):
                    raise TrainingDiverged(
                        f"non-finite loss at epoch {epoch} "
                        f"(learning_rate={self.learning_rate})"
                    )
                optimizer.zero_grad()
                total.backward()
                optimizer.step()
                n = len(batch)
                sums["total"] += float(total.detach()) * n
                sums["rec"] += comps["reconstruction"] * n
                sums["sen"] += comps["sensing"] * n
                sums["sem"] += comps["semantic"] * n
                seen += n

            record = {
                "epoch": epoch,
                "loss_total": sums["total"] / seen,
                "loss_rec": sums["rec"] / seen,
                "loss_sen": sums["sen"] / seen,
                "loss_sem": sums["sem"] / seen,
            }
            if val_idx.size:
                report = evaluate_bundle(
                    bundle, X[val_idx], y[val_idx], comm, sense, scenario,
                    seed=seed * 100003 + epoch + 1,
                )
                record.update(
                    val_psnr=report["psnr_db"],
                    val_ssim=report["ssim"],
                    val_sens_acc=report["sensing_accuracy"],
                    val_sem_acc=report["semantic_accuracy"],
                )
                score = (
                    weights.w_rec * report["loss_rec"]
                    + weights.w_sen * report["loss_sen"]
                    + weights.w_sem * report["loss_sem"]
                )
            else:
                record.update(
                    val_psnr=None, val_ssim=None, val_sens_acc=None, val_sem_acc=None
                )
                score = record["loss_total"]
            if score < best["score"]:
                best = {"score": score, "state": bundle.state_dicts(), "epoch": epoch}
            history.append(record)

        if best["state"] is not None:
            bundle.load_state_dicts(best["state"])
        bundle.fingerprint = TrainingFingerprint(
            seed=seed,
            epochs=self.epochs,
            data_hash=train_part.content_hash(),
        )
        bundle.eval()
        self.bundle_ = bundle
        self.history_ = history
        self.best_epoch_ = best["epoch"]
        return self

    # -- inference -----------------------------------------------------------

    def _require_fitted(self):
        if not hasattr(self, "bundle_"):
            raise ConfigError("estimator is not fitted; call fit(X, y) first")

    def predict(self, X, seed=0):
        """Reconstructions through a fresh seeded channel, clipped to [0, 1]."""
        self._require_fitted()
        X = check_images(X)
        rng = noise_generator(check_seed(seed))
        self.bundle_.eval()
        outs = []
        with torch.no_grad():
            for start in range(0, X.shape[0], 256):
                x = torch.as_tensor(X[start:start + 256])
                out = forward_jssc(
                    self.bundle_, x, self.comm_spec(), self.sense_spec(),
                    self.scenario_spec(), rng=rng,
                )
                outs.append(clip_unit(out.reconstruction.numpy()))
        return np.concatenate(outs)

    def evaluate(
        self, X, y, seed=0, batch_size=256, comm_snr_db=None, sense_snr_db=None
    ):
        """Metric report on held-out data; SNR overrides support sweeps that
        reuse one trained model across evaluation points."""
        self._require_fitted()
        return evaluate_bundle(
            self.bundle_,
            X,
            y,
            self.comm_spec(snr_db=comm_snr_db),
            self.sense_spec(),
            self.scenario_spec(sense_snr_db=sense_snr_db),
            seed=seed,
            batch_size=batch_size,
        )
