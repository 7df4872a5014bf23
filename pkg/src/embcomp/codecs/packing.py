"""Row-wise bit packing for sub-byte codes. Rows pad to byte boundaries."""

import numpy as np


def row_bytes(n_values: int, bits: int) -> int:
    return (n_values * bits + 7) // 8


def pack_rows(values: np.ndarray, bits: int) -> np.ndarray:
    """Pack a (count, n) array of unsigned ints < 2**bits into bytes.

    Each row becomes a contiguous MSB-first bitstream padded with zero bits
    to a byte boundary. Returns uint8 of shape (count, row_bytes(n, bits)).
    """
    if values.ndim != 2:
        raise ValueError("values must be 2-D")
    if not 1 <= bits <= 16:
        raise ValueError("bits must be in [1, 16]")
    v = values.astype(np.uint32)
    if v.size and int(v.max()) >= (1 << bits):
        raise ValueError(f"value out of range for {bits}-bit codes")
    count, n = v.shape
    shifts = np.arange(bits - 1, -1, -1, dtype=np.uint32)
    bitstream = ((v[:, :, None] >> shifts) & 1).astype(np.uint8)
    return np.packbits(bitstream.reshape(count, n * bits), axis=1)


def unpack_rows(packed: np.ndarray, n_values: int, bits: int) -> np.ndarray:
    """Inverse of pack_rows; returns uint32 of shape (count, n_values)."""
    if packed.ndim != 2:
        raise ValueError("packed must be 2-D")
    expected = row_bytes(n_values, bits)
    if packed.shape[1] != expected:
        raise ValueError(
            f"corrupt code length: expected {expected} bytes per row, got {packed.shape[1]}"
        )
    count = packed.shape[0]
    bitstream = np.unpackbits(packed, axis=1)[:, : n_values * bits]
    bitstream = bitstream.reshape(count, n_values, bits).astype(np.uint32)
    shifts = np.arange(bits - 1, -1, -1, dtype=np.uint32)
    return (bitstream << shifts).sum(axis=2, dtype=np.uint32)
