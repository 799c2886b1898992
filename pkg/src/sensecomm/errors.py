"""Exception types shared across the package."""


class SenseCommError(Exception):
    """Base class for all package errors."""


class ConfigError(SenseCommError):
    """Invalid configuration value or combination."""


class ContractError(SenseCommError):
    """Caller violated a shape/range contract of an operation."""


class IngestError(SenseCommError):
    """Dataset file missing or unreadable."""


class FormatError(SenseCommError):
    """Dataset file present but structurally invalid."""


class CompressionError(SenseCommError):
    """Source codec cannot meet the requested byte budget."""


class DecodeFailure(SenseCommError):
    """Channel-coded frame could not be decoded (expected at low SNR)."""


class TrainingDiverged(SenseCommError):
    """Loss became non-finite during optimization."""


class CheckpointError(SenseCommError):
    """Checkpoint directory is missing pieces or inconsistent with its manifest."""


class ResultSchemaError(SenseCommError):
    """Results file contains a malformed or unknown-schema record."""
