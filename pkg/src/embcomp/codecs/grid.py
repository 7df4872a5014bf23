"""The standard codec sweep used by the evaluation pipeline.

Targets the compression-ratio grid {4x, 8x, 16x, 32x} (relative to 32-bit
floats) wherever a family is parameterized by ratio, plus the per-family
fixed points (casts, scalar/binary quantization, truncation/PCA cutoffs).
"""

from .config import CodecConfig


def truncation_cutoffs(dim: int) -> list[int]:
    """Ascending kept-dimension grid: {32,...,768} at 1024, {24,...,384} at 768."""
    if dim == 1024:
        return [32, 64, 128, 256, 512, 768]
    if dim == 768:
        return [24, 48, 96, 192, 384]
    return sorted({max(1, dim // f) for f in (32, 16, 8, 4, 2)})


def lsh_bit_grid(dim: int) -> list[int]:
    """Hyperplane counts hitting ratios {4, 8, 16, 32} against 32-bit floats."""
    return sorted({max(1, (32 * dim) // r) for r in (4, 8, 16, 32)})


def pq_pair_grid(dim: int) -> list[tuple[int, int]]:
    """Six (n_subvectors, code_bits) pairs landing on the ratio grid.

    Subvector widths 1/2/4/8 at 8 code bits give 4x/8x/16x/32x; widths 2/4 at
    4 bits re-hit 16x/32x with coarser codes. Pairs whose width does not
    divide ``dim`` are dropped.
    """
    pairs = []
    for sub, bits in ((1, 8), (2, 8), (4, 8), (8, 8), (2, 4), (4, 4)):
        if dim % sub == 0 and dim // sub >= 1:
            pairs.append((dim // sub, bits))
    return pairs


def builtin_grid(dim: int, seed: int = 0) -> list[CodecConfig]:
    """Every codec the standard sweep evaluates, identity first."""
    grid: list[CodecConfig] = [CodecConfig.identity(seed=seed)]
    for fmt in ("fp16", "bf16", "fp8_e4m3", "fp8_e5m2"):
        grid.append(CodecConfig.float_cast(fmt, seed=seed))
    for bits in (8, 4, 2):
        for binning in ("equal_distance", "percentile"):
            grid.append(CodecConfig.scalar_quant(bits, binning, seed=seed))
    for threshold in ("zero", "median"):
        grid.append(CodecConfig.binary(threshold, seed=seed))
    for keep in truncation_cutoffs(dim):
        grid.append(CodecConfig.truncate(keep, seed=seed))
    for out in truncation_cutoffs(dim):
        grid.append(CodecConfig.pca(out, seed=seed))
    for n_bits in lsh_bit_grid(dim):
        grid.append(CodecConfig.lsh(n_bits, seed=seed))
    for m, bits in pq_pair_grid(dim):
        grid.append(CodecConfig.pq(m, bits, seed=seed))

    half, quarter = max(1, dim // 2), max(1, dim // 4)
    combos = [
        ("float_cast", {"fmt": "fp16"}, half),
        ("scalar_quant", {"bits": 8, "binning": "equal_distance"}, half),
        ("scalar_quant", {"bits": 8, "binning": "equal_distance"}, quarter),
        ("scalar_quant", {"bits": 4, "binning": "equal_distance"}, half),
        ("scalar_quant", {"bits": 4, "binning": "equal_distance"}, quarter),
        ("scalar_quant", {"bits": 2, "binning": "equal_distance"}, half),
    ]
    for method, params, pre in combos:
        if pre < dim:
            grid.append(
                CodecConfig(method, dict(params), pre_truncate=pre, seed=seed)
            )
    return grid
