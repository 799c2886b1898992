"""Systematic Reed-Solomon (255, 152) over GF(2^8).

Field built on the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11D)
with generator element 2 and first consecutive root alpha^0, so codewords
are bit-exact reproducible. The 103 parity bytes correct up to 51 byte
errors under bounded-distance decoding; beyond that `rs_decode` raises
`DecodeFailure` (or, rarely, miscorrects - the caller's codec stage
absorbs both outcomes).
"""

import numpy as np

from .errors import ContractError, DecodeFailure

RS_N = 255
RS_K = 152
RS_PARITY = RS_N - RS_K  # 103
RS_RADIUS = RS_PARITY // 2  # 51
PRIMITIVE_POLY = 0x11D

_EXP = np.zeros(512, dtype=np.int64)
_LOG = np.zeros(256, dtype=np.int64)


def _init_tables():
    x = 1
    for i in range(255):
        _EXP[i] = x
        _LOG[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIMITIVE_POLY
    for i in range(255, 512):
        _EXP[i] = _EXP[i - 255]


_init_tables()


def _mul(a, b):
    if a == 0 or b == 0:
        return 0
    return int(_EXP[_LOG[a] + _LOG[b]])


def _inv(a):
    return int(_EXP[255 - _LOG[a]])


def _poly_scale(p, s):
    return [_mul(c, s) for c in p]


def _poly_add(p, q):
    r = [0] * max(len(p), len(q))
    r[len(r) - len(p):] = p
    for i, c in enumerate(q):
        r[i + len(r) - len(q)] ^= c
    return r


def _poly_mul(p, q):
    r = [0] * (len(p) + len(q) - 1)
    for j, qj in enumerate(q):
        if qj:
            for i, pi in enumerate(p):
                r[i + j] ^= _mul(pi, qj)
    return r


def _poly_eval(p, x):
    y = p[0]
    for c in p[1:]:
        y = _mul(y, x) ^ c
    return y


def _generator_poly():
    g = [1]
    for i in range(RS_PARITY):
        g = _poly_mul(g, [1, int(_EXP[i])])
    return g


_GEN = _generator_poly()

# degree exponents for vectorized syndrome evaluation:
# codeword coefficient k has degree N-1-k, so S_j = xor_k c_k * alpha^(j*(N-1-k))
_DEGREES = np.arange(RS_N - 1, -1, -1, dtype=np.int64)
_SYN_POW = (np.arange(RS_PARITY)[:, None] * _DEGREES[None, :]) % 255


def rs_encode(payload):
    """152 payload bytes -> 255-byte systematic codeword."""
    payload = bytes(payload)
    if len(payload) != RS_K:
        raise ContractError(f"payload must be {RS_K} bytes, got {len(payload)}")
    remainder = [0] * RS_PARITY
    for byte in payload:
        factor = byte ^ remainder[0]
        remainder = remainder[1:] + [0]
        if factor:
            for i in range(RS_PARITY):
                remainder[i] ^= _mul(_GEN[i + 1], factor)
    return payload + bytes(remainder)


def _syndromes(codeword):
    logs = _LOG[codeword]
    terms = _EXP[logs[None, :] + _SYN_POW]
    terms = np.where(codeword[None, :] == 0, 0, terms)
    return np.bitwise_xor.reduce(terms, axis=1)


def _berlekamp_massey(synd):
    err_loc = [1]
    old_loc = [1]
    for i in range(RS_PARITY):
        delta = int(synd[i])
        for j in range(1, len(err_loc)):
            delta ^= _mul(err_loc[-(j + 1)], int(synd[i - j]))
        old_loc.append(0)
        if delta != 0:
            if len(old_loc) > len(err_loc):
                new_loc = _poly_scale(old_loc, delta)
                old_loc = _poly_scale(err_loc, _inv(delta))
                err_loc = new_loc
            err_loc = _poly_add(err_loc, _poly_scale(old_loc, delta))
    while err_loc and err_loc[0] == 0:
        err_loc.pop(0)
    return err_loc


def _find_error_positions(err_loc):
    # roots alpha^i of the reversed locator mark errors at position N-1-i
    positions = []
    for i in range(RS_N):
        if _poly_eval(err_loc, int(_EXP[i])) == 0:
            positions.append(RS_N - 1 - i)
    return positions


def _correct(codeword, synd, positions):
    coef_pos = [RS_N - 1 - p for p in positions]
    loc = [1]
    for cp in coef_pos:
        loc = _poly_mul(loc, _poly_add([1], [int(_EXP[cp]), 0]))
    # error evaluator: (synd * loc) mod x^(len(loc))
    synd_rev = list(synd[::-1]) + [0]
    eval_poly = _poly_mul(synd_rev, loc)
    eval_poly = eval_poly[len(eval_poly) - len(loc):]

    roots = [int(_EXP[255 - cp]) for cp in coef_pos]  # X_l^(-1)
    corrected = bytearray(codeword)
    for l, (pos, x_inv) in enumerate(zip(positions, roots)):
        denom = 1
        for j, other in enumerate(roots):
            if j != l:
                denom = _mul(denom, 1 ^ _mul(x_inv, _inv(other)))
        if denom == 0:
            raise DecodeFailure("degenerate error locator")
        num = _poly_eval(eval_poly, x_inv)
        magnitude = _mul(num, _mul(_inv(x_inv), _inv(denom)))
        corrected[pos] ^= magnitude
    return bytes(corrected)


def rs_decode(received):
    """Bounded-distance decode; returns the 152-byte payload.

    Raises
    ------
    DecodeFailure
        When more than 51 byte errors are present (detected case).
    """
    received = bytes(received)
    if len(received) != RS_N:
        raise ContractError(f"codeword must be {RS_N} bytes, got {len(received)}")
    codeword = np.frombuffer(received, dtype=np.uint8).astype(np.int64)
    synd = _syndromes(codeword)
    if not synd.any():
        return received[:RS_K]

    err_loc = _berlekamp_massey(synd)
    n_errors = len(err_loc) - 1
    if n_errors * 2 > RS_PARITY:
        raise DecodeFailure(f"{n_errors} errors exceeds the decoding radius")
    positions = _find_error_positions(err_loc[::-1])
    if len(positions) != n_errors:
        raise DecodeFailure("error locator roots do not match its degree")

    corrected = _correct(received, synd, positions)
    check = _syndromes(np.frombuffer(corrected, dtype=np.uint8).astype(np.int64))
    if check.any():
        raise DecodeFailure("residual syndromes after correction")
    return corrected[:RS_K]
