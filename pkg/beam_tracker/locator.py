"""Locate the two clamp regions of the beam and build its central line."""
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from ovos_utils.log import LOG
from scipy import ndimage

from beam_tracker.exceptions import LocateError
from beam_tracker.imaging import (BinaryImage, Frame, binarize, median_blur,
                                  otsu_threshold)

# 8-connectivity
_CONNECTIVITY = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class Contour:
    """A connected foreground component, stored as its filled pixel set."""
    pixels: np.ndarray  # (n, 2) array of (row, col), row-major order

    @property
    def area(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def centroid(self) -> Tuple[float, float]:
        rows, cols = self.pixels[:, 0], self.pixels[:, 1]
        return float(rows.mean()), float(cols.mean())

    @property
    def bbox(self) -> Tuple[int, int, int, int]:
        """ (min_row, min_col, max_row, max_col), inclusive """
        mins = self.pixels.min(axis=0)
        maxs = self.pixels.max(axis=0)
        return int(mins[0]), int(mins[1]), int(maxs[0]), int(maxs[1])

    def coordinates(self) -> set:
        return {(int(r), int(c)) for r, c in self.pixels}


@dataclass(frozen=True)
class CentralLine:
    """
    Segment joining the top and bottom clamp centers, the datum every
    deflection is measured from.
    """
    top: Tuple[float, float]
    bottom: Tuple[float, float]
    # rows strictly between the clamp regions, inclusive bounds
    free_rows: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if not self.top[0] < self.bottom[0]:
            raise LocateError(f"top clamp row {self.top[0]} is not above "
                              f"bottom clamp row {self.bottom[0]}")

    @property
    def length_px(self) -> float:
        return math.hypot(self.bottom[0] - self.top[0],
                          self.bottom[1] - self.top[1])

    @property
    def row_span(self) -> float:
        return self.bottom[0] - self.top[0]

    @property
    def cos_tilt(self) -> float:
        """ cosine of the angle between the line and the image vertical """
        return self.row_span / self.length_px

    def col_at(self, row):
        """ column of the line at `row`, works on scalars and arrays """
        slope = (self.bottom[1] - self.top[1]) / self.row_span
        return self.top[1] + (np.asarray(row, dtype=np.float64) - self.top[0]) * slope

    @property
    def track_rows(self) -> Tuple[int, int]:
        if self.free_rows is not None:
            return self.free_rows
        return math.ceil(self.top[0]), math.floor(self.bottom[0])

    def translated(self, d_row: float, d_col: float) -> "CentralLine":
        free = None
        if self.free_rows is not None:
            # whole rows that stay inside the shifted range
            free = (math.ceil(self.free_rows[0] + d_row),
                    math.floor(self.free_rows[1] + d_row))
        return CentralLine((self.top[0] + d_row, self.top[1] + d_col),
                           (self.bottom[0] + d_row, self.bottom[1] + d_col),
                           free)


def find_contours(binary: BinaryImage) -> List[Contour]:
    """
    One Contour per 8-connected foreground component, sorted by area
    (largest first), ties by topmost then leftmost bounding box.
    """
    labels, count = ndimage.label(binary.bits, structure=_CONNECTIVITY)
    contours = []
    for label, window in enumerate(ndimage.find_objects(labels), start=1):
        if window is None:
            continue
        local = np.argwhere(labels[window] == label)
        local += (window[0].start, window[1].start)
        contours.append(Contour(pixels=local))
    contours.sort(key=lambda c: (-c.area, c.bbox[0], c.bbox[1]))
    LOG.debug(f"found {count} connected components")
    return contours


def select_clamps(contours: Sequence[Contour],
                  min_area: int = 1) -> Tuple[Contour, Contour]:
    """
    Pick the clamp regions: among contours of at least `min_area` pixels,
    the one with the highest centroid (top clamp) and the lowest (bottom).
    """
    candidates = [c for c in contours if c.area >= min_area]
    if len(candidates) < 2:
        raise LocateError(f"need two clamp regions of at least {min_area} px, "
                          f"found {len(candidates)}")
    top = min(candidates, key=lambda c: c.centroid[0])
    bottom = max(candidates, key=lambda c: c.centroid[0])
    return top, bottom


def central_line(top: Contour, bottom: Contour) -> CentralLine:
    if not top.centroid[0] < bottom.centroid[0]:
        raise LocateError("clamp centroids share a row, no central line")
    first, last = top.bbox[2] + 1, bottom.bbox[0] - 1
    free = (first, last) if first <= last else None
    return CentralLine(top=top.centroid, bottom=bottom.centroid, free_rows=free)


def min_clamp_area(frame: Frame, fraction: float) -> int:
    return max(1, math.ceil(fraction * frame.width * frame.height))


def locate(frame: Frame, blur_window: int = 3,
           min_area: Optional[int] = None,
           min_area_fraction: float = 0.02) -> CentralLine:
    """
    median blur -> OTSU -> binarize -> contours -> clamps -> central line
    @param frame: (cropped) frame showing both clamps
    @param blur_window: median blur window
    @param min_area: clamp area gate in pixels, overrides min_area_fraction
    @param min_area_fraction: clamp area gate as a fraction of the frame
    @return: CentralLine joining the clamp centers
    """
    blurred = median_blur(frame, blur_window)
    t = otsu_threshold(blurred)
    contours = find_contours(binarize(blurred, t))
    if min_area is None:
        min_area = min_clamp_area(frame, min_area_fraction)
    top, bottom = select_clamps(contours, min_area)
    line = central_line(top, bottom)
    LOG.debug(f"frame {frame.index}: OTSU t={t}, clamps at {line.top} and "
              f"{line.bottom}, L={line.length_px:.2f}px")
    return line
