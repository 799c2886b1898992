"""Gray-mapped square 16-QAM at unit average symbol energy.

Constellation points are {+-1, +-3} x {+-1, +-3} / sqrt(10); each symbol
carries 4 bits (first two select the in-phase level, last two the
quadrature level, each pair Gray-coded so axis-adjacent points differ in
exactly one bit). Demodulation is hard nearest-neighbor.
"""

import numpy as np

from .errors import ContractError

QAM_BITS_PER_SYMBOL = 4
_SCALE = 1.0 / np.sqrt(10.0)
_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) * _SCALE
# position on the axis for each 2-bit value (00, 01, 10, 11) -> Gray order
_BITS_TO_POS = np.array([0, 1, 3, 2])
_POS_TO_BITS = np.array([0, 1, 3, 2])  # self-inverse


def bytes_to_bits(data):
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_bytes(bits):
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def qam16_modulate(bits):
    """Map a bit vector (length divisible by 4) to complex symbols."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size % QAM_BITS_PER_SYMBOL != 0:
        raise ContractError(
            f"bit count must be a positive multiple of 4, got {bits.shape}"
        )
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise ContractError("bits must be 0/1")
    nibbles = bits.reshape(-1, 4)
    i_pos = _BITS_TO_POS[nibbles[:, 0] * 2 + nibbles[:, 1]]
    q_pos = _BITS_TO_POS[nibbles[:, 2] * 2 + nibbles[:, 3]]
    return _LEVELS[i_pos] + 1j * _LEVELS[q_pos]


def qam16_demodulate(symbols):
    """Nearest-neighbor hard decisions back to a bit vector."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.ndim != 1:
        raise ContractError(f"expected a 1-D symbol vector, got {symbols.shape}")

    def axis_positions(vals):
        return np.clip(np.round((vals / _SCALE + 3.0) / 2.0), 0, 3).astype(np.int64)

    i_bits2 = _POS_TO_BITS[axis_positions(symbols.real)]
    q_bits2 = _POS_TO_BITS[axis_positions(symbols.imag)]
    bits = np.empty((symbols.size, 4), dtype=np.uint8)
    bits[:, 0] = i_bits2 >> 1
    bits[:, 1] = i_bits2 & 1
    bits[:, 2] = q_bits2 >> 1
    bits[:, 3] = q_bits2 & 1
    return bits.reshape(-1)


def constellation():
    """All 16 points indexed by their 4-bit label (MSB first)."""
    nibbles = np.unpackbits(
        np.arange(16, dtype=np.uint8)[:, None], axis=1
    )[:, 4:].reshape(-1)
    return qam16_modulate(nibbles)
