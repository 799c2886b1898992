"""Multi-task learned transceiver for joint sensing and semantic image
communication, with conventional link and energy-detector baselines."""

from .channel import (
    ChannelSpec,
    SensingScenarioSpec,
    apply_awgn,
    apply_rayleigh,
    apply_sensing_channel,
    complex_to_real,
    noise_generator,
    normalize_power,
    real_to_complex,
    sample_scenario,
    snr_db_to_noise_var,
)
from .config import ExperimentConfig, load_config
from .conventional import (
    CodedFrame,
    EnergyDetector,
    calibrate_threshold,
    conventional_link,
    encode_image,
    energy_detect,
    energy_statistic,
    run_conventional_comm,
)
from .data import (
    DatasetSplit,
    ImageSet,
    batches,
    fetch_cifar10,
    load_cifar10,
    semantic_label,
    write_synthetic_cifar10,
)
from .estimator import (
    MultiTaskTransceiver,
    TaskWeights,
    combined_loss,
    evaluate_bundle,
)
from .jpeg2000 import jpeg2000_compress, jpeg2000_decompress
from .metrics import MetricReport, accuracy, clip_unit, psnr, ssim
from .models import (
    ModelBundle,
    ModelConfig,
    build_bundle,
    forward_jssc,
    load_bundle,
    save_bundle,
)
from .qam import qam16_demodulate, qam16_modulate
from .results import ResultRecord, build_record, load_results, merge_results, persist
from .rs import rs_decode, rs_encode
from .sweep import SweepSpec, run_sweep

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec",
    "SensingScenarioSpec",
    "apply_awgn",
    "apply_rayleigh",
    "apply_sensing_channel",
    "complex_to_real",
    "noise_generator",
    "normalize_power",
    "real_to_complex",
    "sample_scenario",
    "snr_db_to_noise_var",
    "ExperimentConfig",
    "load_config",
    "CodedFrame",
    "EnergyDetector",
    "calibrate_threshold",
    "conventional_link",
    "encode_image",
    "energy_detect",
    "energy_statistic",
    "run_conventional_comm",
    "DatasetSplit",
    "ImageSet",
    "batches",
    "fetch_cifar10",
    "load_cifar10",
    "semantic_label",
    "write_synthetic_cifar10",
    "MultiTaskTransceiver",
    "TaskWeights",
    "combined_loss",
    "evaluate_bundle",
    "jpeg2000_compress",
    "jpeg2000_decompress",
    "MetricReport",
    "accuracy",
    "clip_unit",
    "psnr",
    "ssim",
    "ModelBundle",
    "ModelConfig",
    "build_bundle",
    "forward_jssc",
    "load_bundle",
    "save_bundle",
    "qam16_demodulate",
    "qam16_modulate",
    "ResultRecord",
    "build_record",
    "load_results",
    "merge_results",
    "persist",
    "rs_decode",
    "rs_encode",
    "SweepSpec",
    "run_sweep",
]
