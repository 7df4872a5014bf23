"""Reduced-precision float conversions: fp16, bf16, and two fp8 variants.

All casts round to nearest, ties to even, and saturate at the target
format's largest finite magnitude (no infinities are ever produced).

    format     layout        bias  max finite  min subnormal
    fp16       1-5-10        15    65504       2**-24
    bf16       1-8-7         127   ~3.39e38    2**-133
    fp8_e4m3   1-4-3         7     448         2**-9   (NaN only at S.1111.111)
    fp8_e5m2   1-5-2         15    57344       2**-16  (IEEE inf/NaN codes unused)
"""

import numpy as np

FP16_MAX = 65504.0
BF16_MAX = float(np.array([0x7F7F0000], dtype=np.uint32).view(np.float32)[0])

FLOAT_FORMATS = ("fp16", "bf16", "fp8_e4m3", "fp8_e5m2")
FORMAT_BITS = {"fp16": 16, "bf16": 16, "fp8_e4m3": 8, "fp8_e5m2": 8}


def _fp8_positive_table(exp_bits: int, mant_bits: int, n_codes: int) -> np.ndarray:
    """Values of the non-negative finite codes 0..n_codes-1, ascending."""
    bias = (1 << (exp_bits - 1)) - 1
    vals = np.empty(n_codes, dtype=np.float64)
    for code in range(n_codes):
        e = code >> mant_bits
        m = code & ((1 << mant_bits) - 1)
        if e == 0:
            vals[code] = (m / (1 << mant_bits)) * 2.0 ** (1 - bias)
        else:
            vals[code] = (1.0 + m / (1 << mant_bits)) * 2.0 ** (e - bias)
    return vals


# e4m3: code 0x7F is NaN, everything below is finite -> 127 positive codes.
# e5m2: exponent 31 carries inf/NaN -> 124 positive codes (max 0x7B).
_E4M3_TABLE = _fp8_positive_table(4, 3, 127)
_E5M2_TABLE = _fp8_positive_table(5, 2, 124)
FP8_E4M3_MAX = float(_E4M3_TABLE[-1])  # 448.0
FP8_E5M2_MAX = float(_E5M2_TABLE[-1])  # 57344.0


def _encode_fp8(x: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Nearest-value rounding into fp8 codes, ties to even code (= even mantissa)."""
    x64 = np.asarray(x, dtype=np.float64)
    mag = np.minimum(np.abs(x64), table[-1])
    hi = np.searchsorted(table, mag, side="left")
    hi = np.minimum(hi, len(table) - 1)
    lo = np.maximum(hi - 1, 0)
    d_lo = mag - table[lo]
    d_hi = table[hi] - mag
    code = np.where(d_hi < d_lo, hi, lo)
    tie = d_hi == d_lo
    code = np.where(tie, np.where(lo % 2 == 0, lo, hi), code)
    code = code.astype(np.uint8)
    code |= np.where(x64 < 0, np.uint8(0x80), np.uint8(0))
    return code


def _decode_fp8(codes: np.ndarray, table: np.ndarray) -> np.ndarray:
    mag_codes = (codes & 0x7F).astype(np.int64)
    if mag_codes.size and int(mag_codes.max()) >= len(table):
        raise ValueError("invalid fp8 payload: non-finite code")
    out = table[mag_codes]
    return np.where(codes & 0x80, -out, out).astype(np.float32)


def _encode_bf16(x: np.ndarray) -> np.ndarray:
    clipped = np.clip(np.asarray(x, dtype=np.float32), -BF16_MAX, BF16_MAX)
    u = clipped.view(np.uint32)
    # round half to even on the truncated 16 mantissa bits
    rounded = u + np.uint32(0x7FFF) + ((u >> np.uint32(16)) & np.uint32(1))
    return (rounded >> np.uint32(16)).astype(np.uint16)


def _decode_bf16(codes: np.ndarray) -> np.ndarray:
    return (codes.astype(np.uint32) << np.uint32(16)).view(np.float32)


def cast_encode(x: np.ndarray, fmt: str) -> np.ndarray:
    """Encode float32 values into the raw bit pattern of ``fmt``.

    Returns uint16 for 16-bit formats, uint8 for fp8.
    """
    if fmt == "fp16":
        return np.clip(x, -FP16_MAX, FP16_MAX).astype("<f2").view(np.uint16)
    if fmt == "bf16":
        return _encode_bf16(x)
    if fmt == "fp8_e4m3":
        return _encode_fp8(x, _E4M3_TABLE)
    if fmt == "fp8_e5m2":
        return _encode_fp8(x, _E5M2_TABLE)
    raise ValueError(f"unknown float format {fmt!r}")


def cast_decode(codes: np.ndarray, fmt: str) -> np.ndarray:
    """Exact widening of stored bit patterns back to float32."""
    if fmt == "fp16":
        return codes.view("<f2").astype(np.float32)
    if fmt == "bf16":
        return _decode_bf16(codes)
    if fmt == "fp8_e4m3":
        return _decode_fp8(codes, _E4M3_TABLE)
    if fmt == "fp8_e5m2":
        return _decode_fp8(codes, _E5M2_TABLE)
    raise ValueError(f"unknown float format {fmt!r}")
