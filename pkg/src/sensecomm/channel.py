"""Complex-baseband signal conventions and channel transforms.

The power convention is unit average energy per complex symbol, enforced
by `normalize_power` at the encoder output; `snr_db_to_noise_var` then
gives the complex noise variance N0 = 10^(-snr_db/10) directly.

All transforms are written on torch tensors so they stay differentiable
inside training, and accept/return numpy arrays transparently for the
conventional baseline and Monte Carlo tests. Randomness comes from an
optional `torch.Generator` (or int seed); None uses torch's global RNG.
"""

import math
from dataclasses import dataclass

import numpy as np
import torch

from .errors import ConfigError, ContractError

POWER_EPS = 1e-12


@dataclass
class ChannelSpec:
    """One point-to-point channel: fading kind and SNR, fixed per run."""

    kind: str  # "awgn" | "rayleigh"
    snr_db: float
    role: str = "communication"  # "communication" | "sensing"

    def __post_init__(self):
        if self.kind not in ("awgn", "rayleigh"):
            raise ConfigError(f"unknown channel kind {self.kind!r}")
        if self.role not in ("communication", "sensing"):
            raise ConfigError(f"unknown channel role {self.role!r}")
        if not math.isfinite(self.snr_db):
            raise ConfigError(f"snr_db must be finite, got {self.snr_db}")


@dataclass
class SensingScenarioSpec:
    """Round-trip sensing geometry: R range bins plus target absence.

    Per-range SNR(r) = base_sense_snr_db - r * range_step_db for
    r = 0..R-1; class index 0 means absent, k in 1..R means range k-1.
    """

    num_ranges: int = 1
    base_sense_snr_db: float = 3.0
    range_step_db: float = 3.0
    absent_prior: float = 0.5

    def __post_init__(self):
        if self.num_ranges < 1:
            raise ConfigError(f"num_ranges must be >= 1, got {self.num_ranges}")
        if not 0.0 < self.absent_prior < 1.0:
            raise ConfigError(
                f"absent_prior must be in (0, 1), got {self.absent_prior}"
            )

    @property
    def num_classes(self):
        return self.num_ranges + 1

    def range_snr_db(self, r):
        if not 0 <= r < self.num_ranges:
            raise ContractError(f"range index {r} >= num_ranges {self.num_ranges}")
        return self.base_sense_snr_db - r * self.range_step_db


def noise_generator(seed):
    """A seeded torch.Generator for reproducible channel draws."""
    g = torch.Generator()
    g.manual_seed(int(seed))
    return g


def _as_generator(rng):
    if rng is None or isinstance(rng, torch.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return noise_generator(int(rng))
    raise ContractError(f"rng must be a torch.Generator, int seed or None: {rng!r}")


def _ingest(x, complex_ok=False):
    """Return (tensor, was_numpy)."""
    if isinstance(x, torch.Tensor):
        return x, False
    arr = np.asarray(x)
    if np.iscomplexobj(arr) and not complex_ok:
        raise ContractError("expected a real-valued array")
    return torch.from_numpy(np.ascontiguousarray(arr)), True


def _egress(t, was_numpy):
    return t.numpy() if was_numpy else t


def real_to_complex(latent):
    """Pack a length-n real vector as n/2 complex symbols (I then Q halves)."""
    x, was_np = _ingest(latent)
    n = x.shape[-1]
    if n % 2 != 0:
        raise ContractError(f"latent length must be even, got {n}")
    half = n // 2
    return _egress(torch.complex(x[..., :half], x[..., half:]), was_np)


def complex_to_real(signal):
    """Exact inverse layout of `real_to_complex`."""
    x, was_np = _ingest(signal, complex_ok=True)
    if not x.is_complex():
        raise ContractError("expected a complex-valued signal")
    return _egress(torch.cat([x.real, x.imag], dim=-1), was_np)


def normalize_power(latent, eps=POWER_EPS):
    """Scale so the implied complex symbols have unit average energy.

    The floor `eps` keeps the op defined (and ~zero-valued) on an all-zero
    latent; the op is differentiable, idempotent and scale invariant.
    """
    x, was_np = _ingest(latent)
    n = x.shape[-1]
    if n % 2 != 0:
        raise ContractError(f"latent length must be even, got {n}")
    m = n // 2
    energy = (x * x).sum(dim=-1, keepdim=True) / m
    return _egress(x * torch.rsqrt(energy + eps), was_np)


def snr_db_to_noise_var(snr_db):
    """Complex noise variance N0 for a unit-power signal (N0/2 per real dim)."""
    return 10.0 ** (-snr_db / 10.0)


def _complex_noise(shape, variance, dtype, rng):
    real_dtype = torch.float64 if dtype == torch.complex128 else torch.float32
    scale = math.sqrt(variance / 2.0)
    re = torch.randn(shape, generator=rng, dtype=real_dtype)
    im = torch.randn(shape, generator=rng, dtype=real_dtype)
    return torch.complex(re * scale, im * scale)


def _unit_fading(shape, dtype, rng):
    """Circularly-symmetric complex Gaussian with E|h|^2 = 1."""
    return _complex_noise(shape, 1.0, dtype, rng)


def apply_awgn(signal, snr_db, rng=None):
    """y = x + w with w circularly-symmetric complex Gaussian, var N0."""
    x, was_np = _ingest(signal, complex_ok=True)
    rng = _as_generator(rng)
    n0 = snr_db_to_noise_var(snr_db)
    w = _complex_noise(x.shape, n0, x.dtype, rng)
    return _egress(x + w, was_np)


def apply_rayleigh(signal, snr_db, rng=None, h=None, return_h=False):
    """Block Rayleigh fading plus AWGN: y = h*x + w, one h per sample.

    `h` may be forced for tests; no channel-state information is appended
    to the output (pass return_h=True to obtain the realization, as the
    coherent conventional receiver does).
    """
    x, was_np = _ingest(signal, complex_ok=True)
    rng = _as_generator(rng)
    head = x.shape[:-1] + (1,)
    if h is None:
        h_t = _unit_fading(head, x.dtype, rng)
    else:
        h_t, _ = _ingest(h, complex_ok=True)
        h_t = torch.as_tensor(h_t, dtype=x.dtype).reshape(head)
    w = _complex_noise(x.shape, snr_db_to_noise_var(snr_db), x.dtype, rng)
    y = h_t * x + w
    if return_h:
        return _egress(y, was_np), _egress(h_t, was_np)
    return _egress(y, was_np)


def sample_scenario(scenario, batch_size, rng=None):
    """Draw per-sample scenario labels: absent with `absent_prior`, else a
    uniformly random range bin. Returns int64 class indices (0 = absent)."""
    rng = _as_generator(rng)
    u = torch.rand(batch_size, generator=rng)
    ranges = torch.randint(scenario.num_ranges, (batch_size,), generator=rng)
    return torch.where(u < scenario.absent_prior, torch.zeros_like(ranges), ranges + 1)


def apply_sensing_channel(signal, scenario, true_class, kind, rng=None):
    """Round-trip echo: attenuated (and possibly double-faded) signal or noise.

    true_class uses the scenario-label encoding: 0 = absent, k in 1..R =
    range k-1. Absent echoes are pure noise at the base-SNR variance; a
    target at range r returns y = alpha_r * g * x + w with
    alpha_r = 10^(-r*range_step_db/20), g = 1 for AWGN kind and
    g = h1*h2 (independent unit-power coefficients) for Rayleigh kind.
    """
    if kind not in ("awgn", "rayleigh"):
        raise ConfigError(f"unknown channel kind {kind!r}")
    x, was_np = _ingest(signal, complex_ok=True)
    rng = _as_generator(rng)

    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    cls, _ = _ingest(np.asarray(true_class) if not isinstance(true_class, torch.Tensor) else true_class)
    cls = cls.reshape(-1).long()
    if cls.shape[0] == 1 and x.shape[0] > 1:
        cls = cls.expand(x.shape[0]).clone()
    if cls.shape[0] != x.shape[0]:
        raise ContractError(
            f"{cls.shape[0]} scenario labels for a batch of {x.shape[0]}"
        )
    if cls.min() < 0 or cls.max() > scenario.num_ranges:
        raise ContractError(
            f"scenario class outside [0, {scenario.num_ranges}] "
            "(0 = absent, k = range k-1)"
        )

    present = (cls > 0).to(x.real.dtype).unsqueeze(-1)
    rank = torch.clamp(cls - 1, min=0).to(x.real.dtype).unsqueeze(-1)
    alpha = 10.0 ** (-rank * scenario.range_step_db / 20.0)
    gain = (present * alpha).to(x.dtype)
    if kind == "rayleigh":
        head = (x.shape[0], 1)
        g = _unit_fading(head, x.dtype, rng) * _unit_fading(head, x.dtype, rng)
        gain = gain * g
    w = _complex_noise(x.shape, snr_db_to_noise_var(scenario.base_sense_snr_db), x.dtype, rng)
    y = gain * x + w
    if squeeze:
        y = y[0]
    return _egress(y, was_np)
