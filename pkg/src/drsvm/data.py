"""Sparse classification data in LIBSVM text format, synthetic instance
generation, and the signed-sample form z_i = y_i * x_i consumed by the
solvers."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Sample",
    "Dataset",
    "ParseError",
    "DataError",
    "parse_libsvm",
    "write_libsvm",
    "signed_samples",
    "gen_synthetic",
    "load_dataset",
]


class ParseError(ValueError):
    """Malformed LIBSVM input; message carries the 1-based line number."""


class DataError(ValueError):
    """Structurally valid input that violates a dataset precondition."""


@dataclass(frozen=True)
class Sample:
    """One labeled sparse record: 1-based feature index -> value."""

    label: int
    features: dict[int, float]


@dataclass(frozen=True)
class Dataset:
    """Dense signed samples; row i is z_i = y_i * x_i."""

    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.ndim != 2 or z.shape[0] < 1 or z.shape[1] < 1:
            raise DataError("dataset needs an (n, d) array with n >= 1, d >= 1")
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def d(self) -> int:
        return self.z.shape[1]


def _parse_label(tok: str, lineno: int) -> int:
    if tok in ("+1", "1"):
        return 1
    if tok == "-1":
        return -1
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: bad label token {tok!r}") from None
    if v == 1.0:
        return 1
    if v == -1.0:
        return -1
    raise ParseError(f"line {lineno}: label {tok!r} is not +1/-1")


def parse_libsvm(source) -> tuple[list[Sample], int]:
    """Parse LIBSVM text into samples plus the inferred dimension (max
    feature index seen).  `source` may be a path or an open text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            return parse_libsvm(fh)
    samples: list[Sample] = []
    dim = 0
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        label = _parse_label(toks[0], lineno)
        feats: dict[int, float] = {}
        prev = 0
        for tok in toks[1:]:
            idx_s, _, val_s = tok.partition(":")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ParseError(f"line {lineno}: bad feature token {tok!r}") from None
            if idx < 1:
                raise ParseError(f"line {lineno}: feature index {idx} < 1")
            if idx <= prev:
                raise ParseError(
                    f"line {lineno}: feature index {idx} not increasing (after {prev})"
                )
            feats[idx] = val
            prev = idx
        dim = max(dim, prev)
        samples.append(Sample(label, feats))
    return samples, dim


def write_libsvm(samples: list[Sample], dest) -> None:
    """Serialize samples back to LIBSVM text (repr-exact float round trip)."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            write_libsvm(samples, fh)
            return
    for s in samples:
        parts = ["+1" if s.label > 0 else "-1"]
        parts.extend(f"{i}:{v!r}" for i, v in sorted(s.features.items()))
        dest.write(" ".join(parts) + "\n")


def signed_samples(samples: list[Sample], d: int | None = None) -> Dataset:
    """Densify to the (n, d) signed-sample matrix z with z_i = y_i * x_i."""
    if not samples:
        raise DataError("at least one sample is required")
    max_idx = max((max(s.features) for s in samples if s.features), default=0)
    if d is None:
        d = max_idx
    if d < 1:
        raise DataError("dimension must be >= 1")
    if max_idx > d:
        raise DataError(f"feature index {max_idx} exceeds declared dimension {d}")
    z = np.zeros((len(samples), d))
    for i, s in enumerate(samples):
        for j, v in s.features.items():
            z[i, j - 1] = s.label * v
    return Dataset(z)


def _gen_raw(n: int, d: int, noise_sigma: float, seed: int):
    if n < 1 or d < 1:
        raise DataError("n and d must be >= 1")
    if noise_sigma < 0:
        raise DataError("noise_sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    w_star = rng.standard_normal(d)
    X = rng.standard_normal((n, d))
    margins = X @ w_star + noise_sigma * rng.standard_normal(n)
    y = np.where(margins >= 0.0, 1.0, -1.0)
    return X, y, w_star


def gen_synthetic(n: int, d: int, noise_sigma: float, seed: int):
    """Planted-separator instance: standard normal w* and x_i, labels
    y_i = sign(<w*, x_i> + noise) with sign(0) -> +1.  Returns (Dataset, w*)."""
    X, y, w_star = _gen_raw(n, d, noise_sigma, seed)
    return Dataset(y[:, None] * X), w_star


def load_dataset(path: str | Path, d: int | None = None) -> Dataset:
    """Parse a LIBSVM file and densify it in one step."""
    samples, dim = parse_libsvm(path)
    return signed_samples(samples, d if d is not None else dim)
