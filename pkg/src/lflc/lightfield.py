"""Light-field data model, manifest I/O, view extraction, and PSNR.

A light field is stored as a dense float64 tensor indexed (c, t, s, v, u):
channel, vertical angular index, horizontal angular index, row, column.
All samples live in [0, 1]. On disk a light field is a plain-text manifest
listing one PGM/PPM file per view in row-major (t outer, s inner) order.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ManifestError, PnmError
from .pnm import image_to_unit, read_pnm, unit_to_image, write_pnm


def angular_offset(s: int, size: int) -> int:
    """Signed ray-direction coordinate for grid index `s` of `size` views.

    The grid is centered: for odd sizes the middle view maps to 0, for even
    sizes the range is asymmetric (e.g. size 4 -> -2..1).
    """
    if not 0 <= s < size:
        raise IndexError(f"angular index {s} out of range for {size} views")
    return s - size // 2


def _check_unit_samples(samples: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(samples)):
        raise ValueError(f"{what} contains non-finite samples")
    if samples.size and (samples.min() < 0.0 or samples.max() > 1.0):
        raise ValueError(f"{what} samples must lie in [0, 1]")


@dataclass(frozen=True)
class ViewImage:
    """One sub-aperture view: float64 samples in [0, 1], shape (C, H, W)."""

    samples: np.ndarray

    def __post_init__(self):
        samples = np.ascontiguousarray(np.asarray(self.samples, dtype=np.float64))
        if samples.ndim != 3:
            raise ValueError(f"view samples must be (C, H, W), got {samples.shape}")
        _check_unit_samples(samples, "view")
        object.__setattr__(self, "samples", samples)

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def spatial_dims(self) -> tuple[int, int]:
        """(W, H) pixel dimensions."""
        return self.samples.shape[2], self.samples.shape[1]


@dataclass(frozen=True)
class LightField:
    """Dense 4-D light field, samples indexed (c, t, s, v, u) in [0, 1]."""

    samples: np.ndarray

    def __post_init__(self):
        samples = np.ascontiguousarray(np.asarray(self.samples, dtype=np.float64))
        if samples.ndim != 5:
            raise ValueError(
                f"light-field samples must be (C, T, S, H, W), got {samples.shape}"
            )
        if samples.shape[0] not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {samples.shape[0]}")
        if min(samples.shape[1:]) < 1:
            raise ValueError(f"degenerate light-field shape {samples.shape}")
        _check_unit_samples(samples, "light field")
        object.__setattr__(self, "samples", samples)

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def angular_dims(self) -> tuple[int, int]:
        """(S, T) view-grid dimensions."""
        return self.samples.shape[2], self.samples.shape[1]

    @property
    def spatial_dims(self) -> tuple[int, int]:
        """(W, H) per-view pixel dimensions."""
        return self.samples.shape[4], self.samples.shape[3]

    def view_stack(self) -> np.ndarray:
        """All views as one (S*T, C, H, W) array, row-major (t outer)."""
        c, t, s, h, w = self.samples.shape
        return np.ascontiguousarray(
            self.samples.transpose(1, 2, 0, 3, 4).reshape(t * s, c, h, w)
        )


def extract_view(lf: LightField, s: int, t: int) -> ViewImage:
    """Return an independent copy of the view at grid position (s, t)."""
    S, T = lf.angular_dims
    if not (0 <= s < S and 0 <= t < T):
        raise IndexError(f"view ({s}, {t}) out of range for grid {S}x{T}")
    return ViewImage(lf.samples[:, t, s].copy())


@dataclass(frozen=True)
class Manifest:
    """Grid dimensions plus the row-major list of per-view file paths."""

    angular_dims: tuple[int, int]
    channels: int
    bit_depth: int
    paths: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        S, T = self.angular_dims
        if S < 1 or T < 1:
            raise ManifestError(f"bad grid dims {S}x{T}")
        if self.channels not in (1, 3):
            raise ManifestError(f"channels must be 1 or 3, got {self.channels}")
        if self.bit_depth not in (8, 16):
            raise ManifestError(f"bit depth must be 8 or 16, got {self.bit_depth}")
        if len(self.paths) != S * T:
            raise ManifestError(
                f"manifest lists {len(self.paths)} files, grid needs {S * T}"
            )


def read_manifest(path) -> Manifest:
    """Parse a manifest file: 'S T C BITDEPTH' then S*T relative paths."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh]
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}") from exc
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ManifestError(f"{path}: empty manifest")
    head = lines[0].split()
    if len(head) != 4:
        raise ManifestError(f"{path}: first line must be 'S T C BITDEPTH'")
    try:
        s, t, c, depth = (int(x) for x in head)
    except ValueError as exc:
        raise ManifestError(f"{path}: non-integer header field") from exc
    return Manifest((s, t), c, depth, tuple(lines[1:]))


def write_manifest(manifest: Manifest, path) -> None:
    S, T = manifest.angular_dims
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{S} {T} {manifest.channels} {manifest.bit_depth}\n")
        for rel in manifest.paths:
            fh.write(rel + "\n")


def load_light_field(manifest: Manifest, base_dir) -> LightField:
    """Load all views named by `manifest`, scaled to [0, 1].

    The view listed at line t*S + s lands at angular index (s, t). All files
    must share dimensions, channel count, and the declared bit depth.
    """
    S, T = manifest.angular_dims
    expect_maxval = (1 << manifest.bit_depth) - 1
    views = []
    for rel in manifest.paths:
        full = os.path.join(base_dir, rel)
        if not os.path.exists(full):
            raise ManifestError(f"missing view file: {full}")
        pixels = read_pnm(full)
        channels = 1 if pixels.ndim == 2 else 3
        maxval = 255 if pixels.dtype == np.uint8 else 65535
        if channels != manifest.channels:
            raise ManifestError(
                f"{full}: has {channels} channels, manifest declares {manifest.channels}"
            )
        if maxval != expect_maxval:
            raise PnmError(
                f"{full}: maxval {maxval} does not match declared "
                f"{manifest.bit_depth}-bit depth"
            )
        views.append(image_to_unit(pixels))
    first = views[0].shape
    for rel, img in zip(manifest.paths, views):
        if img.shape != first:
            raise ManifestError(
                f"{rel}: dimensions {img.shape} differ from first view {first}"
            )
    h, w = first[:2]
    samples = np.empty((manifest.channels, T, S, h, w), dtype=np.float64)
    for t in range(T):
        for s in range(S):
            img = views[t * S + s]
            samples[:, t, s] = img[None] if img.ndim == 2 else img.transpose(2, 0, 1)
    return LightField(samples)


def save_light_field(
    lf: LightField, base_dir, manifest_name: str = "manifest.txt", bit_depth: int = 8
) -> Manifest:
    """Write one PGM/PPM per view plus a manifest; returns the manifest.

    Round-trips bit-exactly for data loaded from sources of the same depth.
    """
    S, T = lf.angular_dims
    os.makedirs(base_dir, exist_ok=True)
    ext = "pgm" if lf.channels == 1 else "ppm"
    paths = []
    for t in range(T):
        for s in range(S):
            rel = f"view_{t:02d}_{s:02d}.{ext}"
            view = lf.samples[:, t, s]
            img = view[0] if lf.channels == 1 else view.transpose(1, 2, 0)
            write_pnm(os.path.join(base_dir, rel), unit_to_image(img, bit_depth))
            paths.append(rel)
    manifest = Manifest((S, T), lf.channels, bit_depth, tuple(paths))
    write_manifest(manifest, os.path.join(base_dir, manifest_name))
    return manifest


def _as_samples(x) -> np.ndarray:
    return x.samples if isinstance(x, (LightField, ViewImage)) else np.asarray(x)


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf when the inputs are identical.

    Accepts LightField, ViewImage, or plain arrays of identical shape. The
    mean squared error averages over every sample including channels.
    """
    xa, xb = _as_samples(a), _as_samples(b)
    if xa.shape != xb.shape:
        raise ValueError(f"shape mismatch {xa.shape} vs {xb.shape}")
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = float(np.mean(np.square(xa - xb)))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def psnr_masked(a, b, mask: np.ndarray, peak: float = 1.0) -> float:
    """PSNR restricted to samples where `mask` is true.

    The mask indexes (t, s, v, u) and is broadcast across channels.
    """
    xa, xb = _as_samples(a), _as_samples(b)
    if xa.shape != xb.shape:
        raise ValueError(f"shape mismatch {xa.shape} vs {xb.shape}")
    if not mask.any():
        raise ValueError("validity mask is empty")
    diff = np.square(xa - xb)[:, mask]
    mse = float(diff.mean())
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)
