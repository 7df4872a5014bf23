"""Codec configuration, labeling, JSON round-trip, and compression accounting."""

import json
from dataclasses import dataclass, field, replace
from typing import Any

from .floatcast import FLOAT_FORMATS, FORMAT_BITS

METHODS = (
    "identity",
    "float_cast",
    "scalar_quant",
    "binary",
    "truncate",
    "pca",
    "lsh",
    "pq",
)
SCALAR_BITS = (8, 4, 2)
BINNINGS = ("equal_distance", "percentile")
THRESHOLDS = ("zero", "median")
FIT_SCOPES = ("global", "per_batch")


@dataclass
class CodecConfig:
    """One compression technique plus its combination/fit options.

    ``pre_truncate`` keeps the leading dimensions before the method applies.
    ``fit_scope`` selects one calibration fit for the corpus ("global") or a
    refit per document batch ("per_batch").
    """

    method: str
    params: dict = field(default_factory=dict)
    pre_truncate: int | None = None
    fit_scope: str = "global"
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.fit_scope not in FIT_SCOPES:
            raise ValueError(f"unknown fit_scope {self.fit_scope!r}")
        if self.pre_truncate is not None and self.pre_truncate < 1:
            raise ValueError("pre_truncate must be >= 1")
        self._check_params()

    def _check_params(self) -> None:
        p = self.params
        m = self.method
        if m == "identity" and p:
            raise ValueError("identity takes no params")
        if m == "float_cast" and p.get("fmt") not in FLOAT_FORMATS:
            raise ValueError(f"float_cast fmt must be one of {FLOAT_FORMATS}")
        if m == "scalar_quant":
            if p.get("bits") not in SCALAR_BITS:
                raise ValueError(f"scalar_quant bits must be one of {SCALAR_BITS}")
            if p.get("binning") not in BINNINGS:
                raise ValueError(f"scalar_quant binning must be one of {BINNINGS}")
        if m == "binary" and p.get("threshold") not in THRESHOLDS:
            raise ValueError(f"binary threshold must be one of {THRESHOLDS}")
        if m == "truncate":
            if not isinstance(p.get("keep_dims"), int) or p["keep_dims"] < 1:
                raise ValueError("truncate keep_dims must be a positive int")
            if self.pre_truncate is not None:
                raise ValueError("pre_truncate is redundant with method=truncate")
        if m == "pca" and (not isinstance(p.get("out_dims"), int) or p["out_dims"] < 1):
            raise ValueError("pca out_dims must be a positive int")
        if m == "lsh" and (not isinstance(p.get("n_bits"), int) or p["n_bits"] < 1):
            raise ValueError("lsh n_bits must be a positive int")
        if m == "pq":
            if not isinstance(p.get("n_subvectors"), int) or p["n_subvectors"] < 1:
                raise ValueError("pq n_subvectors must be a positive int")
            bits = p.get("code_bits")
            if not isinstance(bits, int) or not 1 <= bits <= 16:
                raise ValueError("pq code_bits must be an int in [1, 16]")

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, **kw) -> "CodecConfig":
        return cls("identity", {}, **kw)

    @classmethod
    def float_cast(cls, fmt: str, **kw) -> "CodecConfig":
        return cls("float_cast", {"fmt": fmt}, **kw)

    @classmethod
    def scalar_quant(cls, bits: int, binning: str = "equal_distance", **kw) -> "CodecConfig":
        return cls("scalar_quant", {"bits": bits, "binning": binning}, **kw)

    @classmethod
    def binary(cls, threshold: str = "zero", **kw) -> "CodecConfig":
        return cls("binary", {"threshold": threshold}, **kw)

    @classmethod
    def truncate(cls, keep_dims: int, **kw) -> "CodecConfig":
        return cls("truncate", {"keep_dims": keep_dims}, **kw)

    @classmethod
    def pca(cls, out_dims: int, **kw) -> "CodecConfig":
        return cls("pca", {"out_dims": out_dims}, **kw)

    @classmethod
    def lsh(cls, n_bits: int, **kw) -> "CodecConfig":
        return cls("lsh", {"n_bits": n_bits}, **kw)

    @classmethod
    def pq(cls, n_subvectors: int, code_bits: int = 8, **kw) -> "CodecConfig":
        return cls("pq", {"n_subvectors": n_subvectors, "code_bits": code_bits}, **kw)

    # -- dimensional checks -------------------------------------------------

    def validate_for_dim(self, dim: int) -> None:
        """Raise if the config cannot apply to vectors of width ``dim``."""
        if self.pre_truncate is not None and self.pre_truncate > dim:
            raise ValueError(f"pre_truncate {self.pre_truncate} exceeds dim {dim}")
        eff = self.effective_dim(dim)
        if self.method == "truncate" and self.params["keep_dims"] > dim:
            raise ValueError(f"keep_dims {self.params['keep_dims']} exceeds dim {dim}")
        if self.method == "pca" and self.params["out_dims"] > eff:
            raise ValueError(f"out_dims {self.params['out_dims']} exceeds dim {eff}")
        if self.method == "pq" and eff % self.params["n_subvectors"] != 0:
            raise ValueError(
                f"n_subvectors {self.params['n_subvectors']} does not divide dim {eff}"
            )

    def effective_dim(self, dim: int) -> int:
        """Width the method sees after optional pre-truncation."""
        return dim if self.pre_truncate is None else min(self.pre_truncate, dim)

    def decoded_dim(self, dim: int) -> int:
        """Width of decoded vectors for inputs of width ``dim``."""
        eff = self.effective_dim(dim)
        if self.method == "truncate":
            return self.params["keep_dims"]
        if self.method == "pca":
            return self.params["out_dims"]
        if self.method == "lsh":
            return self.params["n_bits"]
        return eff

    # -- naming / serialization ---------------------------------------------

    @property
    def label(self) -> str:
        """Deterministic short name, safe for filenames and report rows."""
        m, p = self.method, self.params
        if m == "identity":
            core = "identity"
        elif m == "float_cast":
            core = p["fmt"]
        elif m == "scalar_quant":
            core = f"sq{p['bits']}_{'eq' if p['binning'] == 'equal_distance' else 'pct'}"
        elif m == "binary":
            core = f"bin_{p['threshold']}"
        elif m == "truncate":
            core = f"trunc{p['keep_dims']}"
        elif m == "pca":
            core = f"pca{p['out_dims']}"
        elif m == "lsh":
            core = f"lsh{p['n_bits']}"
        else:
            core = f"pq{p['n_subvectors']}x{p['code_bits']}"
        if self.pre_truncate is not None:
            core = f"trunc{self.pre_truncate}+{core}"
        if self.fit_scope == "per_batch":
            core += "_perbatch"
        return core

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "params": dict(self.params),
            "pre_truncate": self.pre_truncate,
            "fit_scope": self.fit_scope,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CodecConfig":
        return cls(
            method=d["method"],
            params=dict(d.get("params", {})),
            pre_truncate=d.get("pre_truncate"),
            fit_scope=d.get("fit_scope", "global"),
            seed=int(d.get("seed", 0)),
        )

    @classmethod
    def from_json(cls, s: str) -> "CodecConfig":
        return cls.from_dict(json.loads(s))

    def with_seed(self, seed: int) -> "CodecConfig":
        return replace(self, seed=seed)


def stored_bits_per_vector(config: CodecConfig, dim: int, native_bits: int = 32) -> int:
    """Accounting width of one encoded vector, in bits.

    Families that keep float values at native precision (identity, truncate,
    pca) count native_bits per kept value; casts count the target width;
    quantizers count their code bits.
    """
    config.validate_for_dim(dim)
    eff = config.effective_dim(dim)
    m, p = config.method, config.params
    if m == "identity":
        return native_bits * eff
    if m == "float_cast":
        return FORMAT_BITS[p["fmt"]] * eff
    if m == "scalar_quant":
        return p["bits"] * eff
    if m == "binary":
        return eff
    if m == "truncate":
        return native_bits * p["keep_dims"]
    if m == "pca":
        return native_bits * p["out_dims"]
    if m == "lsh":
        return p["n_bits"]
    return p["n_subvectors"] * p["code_bits"]


def compression_ratio(config: CodecConfig, dim: int, native_bits: int = 32) -> float:
    """(native_bits * dim) / stored bits per vector; combinations multiply."""
    return (native_bits * dim) / stored_bits_per_vector(config, dim, native_bits)
