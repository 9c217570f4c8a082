"""Per-row beam candidates and the two outlier filters applied to them.

Filters never move a point: they return the full point list, in row order,
with statuses updated. Points already removed by an earlier stage are
passed through untouched; "active" points are the ones still in play.
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from ovos_utils.log import LOG

from beam_tracker.imaging import Frame
from beam_tracker.locator import CentralLine


class PointStatus(str, Enum):
    CANDIDATE = "candidate"
    REMOVED_CONTINUITY = "removed-by-continuity"
    REMOVED_PARABOLA = "removed-by-parabola"
    KEPT = "kept"


@dataclass(frozen=True)
class TrackPoint:
    row: int
    col: float  # whole pixels from row_maxima
    intensity: int
    status: PointStatus = PointStatus.CANDIDATE

    @property
    def is_active(self) -> bool:
        return self.status in (PointStatus.CANDIDATE, PointStatus.KEPT)


@dataclass(frozen=True)
class ContinuityConfig:
    margin: int = 3
    doubling: bool = True

    def __post_init__(self):
        if self.margin < 1:
            raise ValueError(f"continuity margin must be >= 1, got {self.margin}")


@dataclass(frozen=True)
class ParabolaBandConfig:
    separation_d: float = 10.0
    bend_candidates: Tuple[float, ...] = (0.0,)
    vertex_row: Optional[float] = None

    def __post_init__(self):
        if self.separation_d <= 0:
            raise ValueError(f"separation_d must be positive, got {self.separation_d}")
        if not len(self.bend_candidates):
            raise ValueError("bend_candidates must not be empty")
        object.__setattr__(self, "bend_candidates",
                           tuple(float(a) for a in self.bend_candidates))

    @classmethod
    def for_patch(cls, width: int, line: CentralLine, count: int = 41,
                  separation_d: float = 10.0) -> "ParabolaBandConfig":
        return cls(separation_d=separation_d,
                   bend_candidates=default_bend_candidates(width, line, count))


@dataclass(frozen=True)
class BandSelection:
    bend: float
    inliers: int


def active(points: Iterable[TrackPoint]) -> List[TrackPoint]:
    return [p for p in points if p.is_active]


def default_bend_candidates(width: int, line: CentralLine,
                            count: int = 41) -> Tuple[float, ...]:
    """
    Quadratic coefficients whose band apex offsets are spread uniformly
    over [-width/2, +width/2].
    """
    if count < 1:
        raise ValueError(f"need at least one bend candidate, got {count}")
    half_span = line.row_span / 2.0
    apexes = np.linspace(-width / 2.0, width / 2.0, count) if count > 1 \
        else np.zeros(1)
    # apex offset = -a * half_span^2
    return tuple(float(-apex / half_span ** 2) + 0.0 for apex in apexes)


def row_maxima(frame: Frame, rows: Optional[Tuple[int, int]] = None) -> List[TrackPoint]:
    """
    Brightest column of every row (leftmost on ties). All-zero rows give no
    point.
    @param rows: optional inclusive (first, last) row range to search
    """
    first, last = rows if rows is not None else (0, frame.height - 1)
    first, last = max(first, 0), min(last, frame.height - 1)
    if first > last:
        return []
    block = frame.pixels[first:last + 1]
    cols = block.argmax(axis=1)
    peaks = block[np.arange(block.shape[0]), cols]
    return [TrackPoint(row=first + int(i), col=int(cols[i]), intensity=int(peaks[i]))
            for i in np.flatnonzero(peaks)]


def _cone_pass(points: Sequence[TrackPoint], cfg: ContinuityConfig) -> List[bool]:
    accepted = [False] * len(points)
    if not points:
        return accepted
    accepted[0] = True
    last = points[0]
    margin = cfg.margin
    for i in range(1, len(points)):
        point = points[i]
        gap = abs(point.row - last.row)
        if abs(point.col - last.col) <= margin * gap:
            accepted[i] = True
            last = point
            margin = cfg.margin
        elif cfg.doubling:
            margin *= 2
    return accepted


def continuity_filter(points: Sequence[TrackPoint],
                      cfg: ContinuityConfig = ContinuityConfig()) -> List[TrackPoint]:
    """
    Cone of safety elimination, run from the top and from the bottom row.
    A point survives a round when both directional passes accept it; rounds
    repeat until nothing more is removed.
    """
    ordered = sorted(points, key=lambda p: p.row)
    survivors = [i for i, p in enumerate(ordered) if p.is_active]
    removed = set()
    while survivors:
        chain = [ordered[i] for i in survivors]
        down = _cone_pass(chain, cfg)
        up = _cone_pass(chain[::-1], cfg)[::-1]
        keep = [i for i, d, u in zip(survivors, down, up) if d and u]
        if len(keep) == len(survivors):
            break
        removed.update(set(survivors) - set(keep))
        survivors = keep
    LOG.debug(f"continuity filter removed {len(removed)} points")
    return [replace(p, status=PointStatus.REMOVED_CONTINUITY) if i in removed else p
            for i, p in enumerate(ordered)]


def band_center(bend: float, rows, line: CentralLine,
                vertex_row: Optional[float] = None):
    """
    Column of the band's center parabola: vertex at `vertex_row` (mid-span by
    default), passing through both clamp centers of `line`.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if vertex_row is None:
        vertex_row = (line.top[0] + line.bottom[0]) / 2.0
    half_span = line.row_span / 2.0
    return line.col_at(rows) + bend * ((rows - vertex_row) ** 2 - half_span ** 2)


def _band_counts(points: Sequence[TrackPoint], cfg: ParabolaBandConfig,
                 line: CentralLine) -> np.ndarray:
    rows = np.array([p.row for p in points], dtype=np.float64)
    cols = np.array([p.col for p in points], dtype=np.float64)
    bends = np.asarray(cfg.bend_candidates)[:, None]
    centers = band_center(bends, rows[None, :], line, cfg.vertex_row)
    inside = np.abs(cols[None, :] - centers) <= cfg.separation_d / 2.0
    return inside.sum(axis=1)


def select_bend(points: Sequence[TrackPoint], cfg: ParabolaBandConfig,
                line: CentralLine) -> BandSelection:
    """
    Bend whose band holds the most active points; ties go to the smaller
    |bend|, then to the smaller bend.
    """
    candidates = active(points)
    if not candidates:
        raise ValueError("parabola band search needs at least one point")
    counts = _band_counts(candidates, cfg, line)
    best = min(range(len(cfg.bend_candidates)),
               key=lambda i: (-counts[i], abs(cfg.bend_candidates[i]),
                              cfg.bend_candidates[i]))
    return BandSelection(bend=cfg.bend_candidates[best], inliers=int(counts[best]))


def parabola_band_filter(points: Sequence[TrackPoint], cfg: ParabolaBandConfig,
                         line: CentralLine) -> List[TrackPoint]:
    """
    Keep the active points inside the best band of width separation_d,
    mark the others removed-by-parabola.
    """
    selection = select_bend(points, cfg, line)
    ordered = sorted(points, key=lambda p: p.row)
    rows = np.array([p.row for p in ordered], dtype=np.float64)
    cols = np.array([p.col for p in ordered], dtype=np.float64)
    centers = band_center(selection.bend, rows, line, cfg.vertex_row)
    inside = np.abs(cols - centers) <= cfg.separation_d / 2.0
    out = []
    for p, keep in zip(ordered, inside):
        if p.is_active:
            p = replace(p, status=PointStatus.KEPT if keep
                        else PointStatus.REMOVED_PARABOLA)
        out.append(p)
    LOG.debug(f"parabola band a={selection.bend:.3e} holds {selection.inliers} points")
    return out
