"""Frame representation and the pixel level primitives of the pipeline.

Every stage stays in 8-bit space: outputs are rounded half up and clamped
to [0, 255]. Functions never modify their input frame.
"""
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from beam_tracker.exceptions import DegenerateImageError, FrameError

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _round_half_up(values: np.ndarray) -> np.ndarray:
    return np.floor(values + 0.5)


@dataclass(frozen=True, eq=False)
class Frame:
    """A grayscale intensity grid, indexed pixels[row, col]."""
    pixels: np.ndarray
    scale_nm_per_px: Optional[float] = None
    index: int = 0
    timestamp_s: float = 0.0
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2:
            raise FrameError(f"expected a 2D intensity grid, got shape {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise FrameError(f"frame must be at least 1x1, got {pixels.shape}")
        if pixels.dtype != np.uint8:
            if pixels.dtype.kind == "f":
                if not np.isfinite(pixels).all():
                    raise FrameError("intensities must be finite")
                pixels = _round_half_up(pixels)
            if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
                raise FrameError("intensities must lie in [0, 255]")
            pixels = pixels.astype(np.uint8)
        elif pixels.flags.writeable:
            pixels = pixels.copy()
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @classmethod
    def from_array(cls, pixels, index: int = 0, fps: Optional[float] = None,
                   **kwargs) -> "Frame":
        timestamp = index / fps if fps else 0.0
        return cls(pixels=pixels, index=index, timestamp_s=timestamp, **kwargs)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def with_pixels(self, pixels: np.ndarray) -> "Frame":
        """ same frame metadata, new intensities """
        return replace(self, pixels=pixels)


@dataclass(frozen=True, eq=False)
class BinaryImage:
    bits: np.ndarray

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class Region:
    """ rectangle in pixel coordinates, top left corner plus size """
    col: int
    row: int
    width: int
    height: int

    @classmethod
    def parse(cls, text: str) -> "Region":
        """ parse "col,row,width,height" """
        try:
            col, row, width, height = (int(v) for v in str(text).split(","))
        except ValueError:
            raise ValueError(f"expected 'col,row,width,height', got {text!r}")
        return cls(col, row, width, height)

    def offset_by(self, outer: "Region") -> "Region":
        """ express this region, given relative to `outer`, in the coordinates `outer` lives in """
        return Region(self.col + outer.col, self.row + outer.row,
                      self.width, self.height)

    def fits(self, width: int, height: int) -> bool:
        return (self.col >= 0 and self.row >= 0 and
                self.width >= 1 and self.height >= 1 and
                self.col + self.width <= width and
                self.row + self.height <= height)

    def __str__(self):
        return f"{self.col},{self.row},{self.width},{self.height}"


@dataclass(frozen=True)
class DenoiseConfig:
    kernel_rows: int = 7
    kernel_cols: int = 3
    mask_threshold: int = 20

    def __post_init__(self):
        for name in ("kernel_rows", "kernel_cols"):
            size = getattr(self, name)
            if size < 1 or size % 2 == 0:
                raise ValueError(f"{name} must be odd and positive, got {size}")
        if not 0 <= self.mask_threshold <= 255:
            raise ValueError(f"mask_threshold must be in [0, 255], "
                             f"got {self.mask_threshold}")

    @property
    def normalizer(self) -> int:
        return self.kernel_rows * self.kernel_cols


def to_grayscale(raw, **frame_kwargs) -> Frame:
    """
    Build a Frame from a 1 or 3 channel image array
    @param raw: array shaped (h, w), (h, w, 1) or (h, w, 3)
    @param frame_kwargs: passed through to Frame.from_array
    @return: single channel Frame
    """
    raw = np.asarray(raw)
    if raw.ndim == 3 and raw.shape[2] == 1:
        raw = raw[:, :, 0]
    if raw.ndim == 2:
        return Frame.from_array(raw, **frame_kwargs)
    if raw.ndim != 3 or raw.shape[2] != 3:
        raise FrameError(f"unsupported channel layout {raw.shape}, "
                         f"expected 1 or 3 channels")
    luma = raw.astype(np.float64) @ np.asarray(LUMA_WEIGHTS)
    gray = np.clip(_round_half_up(luma), 0, 255).astype(np.uint8)
    return Frame.from_array(gray, **frame_kwargs)


def crop(frame: Frame, roi: Region) -> Frame:
    if not roi.fits(frame.width, frame.height):
        raise FrameError(f"region {roi} outside {frame.width}x{frame.height} frame")
    pixels = frame.pixels[roi.row:roi.row + roi.height,
                          roi.col:roi.col + roi.width]
    return frame.with_pixels(pixels)


def median_blur(frame: Frame, window: int = 3) -> Frame:
    """
    Replace each pixel by the median of its window x window neighborhood.
    Border pixels use the part of the neighborhood inside the frame; when
    that part has an even count the two middle values are averaged.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"median window must be odd and positive, got {window}")
    if window == 1:
        return frame
    r = window // 2
    padded = np.pad(frame.pixels.astype(np.float64), r,
                    mode="constant", constant_values=np.nan)
    stacks = sliding_window_view(padded, (window, window))
    stacks = stacks.reshape(frame.height, frame.width, window * window)
    # NaN sorts last, so the valid values occupy the first `counts` slots
    ordered = np.sort(stacks, axis=-1)
    counts = np.count_nonzero(~np.isnan(stacks), axis=-1)
    lo = np.take_along_axis(ordered, ((counts - 1) // 2)[..., None], axis=-1)
    hi = np.take_along_axis(ordered, (counts // 2)[..., None], axis=-1)
    median = _round_half_up((lo[..., 0] + hi[..., 0]) / 2.0)
    return frame.with_pixels(median.astype(np.uint8))


def otsu_threshold(frame: Frame) -> int:
    """
    Exhaustive OTSU search: the threshold t in [1, 255] splitting pixels
    into {< t} and {>= t} with the smallest population weighted intra-class
    variance. The smallest t wins ties.

    Minimizing the pooled within-class sum of squares is the same as
    maximizing s0^2/n0 + s1^2/n1 (s = class sum, n = class size); the
    candidates are compared as exact fractions.
    """
    hist = np.bincount(frame.pixels.ravel(), minlength=256).astype(np.int64)
    if np.count_nonzero(hist) < 2:
        raise DegenerateImageError("constant image has no threshold")
    levels = np.arange(256, dtype=np.int64)
    counts = np.cumsum(hist)
    sums = np.cumsum(hist * levels)
    total_n, total_s = int(counts[-1]), int(sums[-1])

    best_t, best_score = 1, None
    for t in range(1, 256):
        n0, s0 = int(counts[t - 1]), int(sums[t - 1])
        n1, s1 = total_n - n0, total_s - s0
        score = Fraction(0)
        if n0:
            score += Fraction(s0 * s0, n0)
        if n1:
            score += Fraction(s1 * s1, n1)
        if best_score is None or score > best_score:
            best_t, best_score = t, score
    return best_t


def binarize(frame: Frame, t: int) -> BinaryImage:
    if not 1 <= t <= 255:
        raise ValueError(f"threshold must be in [1, 255], got {t}")
    return BinaryImage(bits=frame.pixels >= t)


def kernel_sums(frame: Frame, cfg: DenoiseConfig) -> np.ndarray:
    """
    Raw integer sums over the kernel_rows x kernel_cols neighborhood of each
    pixel, zero padded at the borders. No normalization, no clamping.
    """
    if frame.height < cfg.kernel_rows or frame.width < cfg.kernel_cols:
        raise FrameError(f"{frame.width}x{frame.height} frame is smaller than "
                         f"the {cfg.kernel_cols}x{cfg.kernel_rows} kernel")
    kernel = np.ones((cfg.kernel_rows, cfg.kernel_cols), dtype=np.int64)
    return ndimage.correlate(frame.pixels.astype(np.int64), kernel,
                             mode="constant", cval=0)


def neighborhood_sum(frame: Frame, cfg: DenoiseConfig = DenoiseConfig()) -> Frame:
    """ normalized neighborhood sum (the 1/21 all-ones kernel by default) """
    sums = kernel_sums(frame, cfg)
    n = cfg.normalizer
    # integer round half up of sums / n
    normalized = (2 * sums + n) // (2 * n)
    return frame.with_pixels(np.clip(normalized, 0, 255).astype(np.uint8))


def denoise_mask(frame: Frame, cfg: DenoiseConfig = DenoiseConfig()) -> Frame:
    """ keep pixels whose neighborhood is bright enough, zero the rest """
    support = neighborhood_sum(frame, cfg).pixels
    masked = np.where(support >= cfg.mask_threshold, frame.pixels, 0)
    return frame.with_pixels(masked.astype(np.uint8))
