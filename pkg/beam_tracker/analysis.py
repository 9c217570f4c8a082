"""Physics facing outputs: deflection, nm conversion and well classification.

Sign convention: a positive deflection lies at larger column than the
central line, i.e. right of it in image coordinates.
"""
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
from ovos_utils.log import LOG

from beam_tracker.exceptions import (InsufficientDataError, MissingScaleError,
                                     NotConvergedError)
from beam_tracker.fitter import BeamFit
from beam_tracker.locator import CentralLine


class SampleStatus(str, Enum):
    OK = "ok"
    LOCATE_FAILED = "locate_failed"
    FIT_FAILED = "fit_failed"


class WellClass(str, Enum):
    INTRA_WELL = "intra-well"
    INTER_WELL = "inter-well"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class DeflectionSample:
    frame_index: int
    time_s: float
    status: SampleStatus
    deflection_px: Optional[float] = None
    deflection_nm: Optional[float] = None
    fit: Optional[BeamFit] = None
    point_count_kept: int = 0
    metadata: Mapping[str, str] = field(default_factory=dict)
    message: str = ""

    def __post_init__(self):
        if self.status == SampleStatus.OK and (self.fit is None or not self.fit.converged):
            raise ValueError("an ok sample needs a converged fit")

    @property
    def ok(self) -> bool:
        return self.status == SampleStatus.OK


@dataclass(frozen=True)
class WellDwell:
    sample_count: int = 0
    dwell_fraction: float = 0.0
    mean_deflection_px: float = 0.0
    mean_dwell_s: float = 0.0


@dataclass(frozen=True)
class WellReport:
    classification: WellClass
    crossing_count: int
    transition_rate_hz: float
    mean_abs_deflection_px: float
    peak_abs_deflection_px: float = 0.0
    duration_s: float = 0.0
    ok_sample_count: int = 0
    excluded_sample_count: int = 0
    wells: Dict[str, WellDwell] = field(default_factory=dict)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["classification"] = self.classification.value
        return data


def to_nm(px: float, scale: Optional[float]) -> float:
    if scale is None:
        raise MissingScaleError("no nm/px scale for this recording")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    return px * scale


def deflection(fit: BeamFit, line: Optional[CentralLine] = None) -> float:
    """
    Signed maximum orthogonal distance between the fitted beam and the
    central line, sampled once per pixel row over the line's span.
    """
    if not fit.converged:
        raise NotConvergedError("cannot measure deflection on an unconverged fit")
    line = line or fit.line
    rows = np.arange(math.ceil(line.top[0]), math.floor(line.bottom[0]) + 1,
                     dtype=np.float64)
    if not rows.size:
        return 0.0
    offsets = fit.offset(rows - line.top[0])
    # first of equal magnitudes wins, keeps the result deterministic
    peak = offsets[int(np.argmax(np.abs(offsets)))]
    return float(peak * line.cos_tilt) + 0.0


def _side(value: float) -> int:
    return 1 if value > 0 else -1


def classify_wells(samples: Sequence[DeflectionSample], fps: float,
                   hysteresis_px: float = 2.0) -> WellReport:
    """
    Count centerline crossings with hysteresis and classify the motion.
    A crossing registers once |deflection| exceeds hysteresis_px on the
    side opposite to the last registered one.
    """
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    ok = sorted((s for s in samples if s.ok), key=lambda s: s.frame_index)
    if len(ok) < 2:
        raise InsufficientDataError(f"need at least 2 ok samples, got {len(ok)}")
    values = np.array([s.deflection_px for s in ok], dtype=np.float64)
    times = np.array([s.time_s for s in ok], dtype=np.float64)
    duration = float(times[-1] - times[0]) + 1.0 / fps

    crossings = 0
    side = None
    for value in values:
        if abs(value) <= hysteresis_px:
            continue
        if side is None:
            side = _side(value)
        elif _side(value) != side:
            crossings += 1
            side = _side(value)

    mean_abs = float(np.mean(np.abs(values)))
    if crossings >= 2:
        classification = WellClass.INTER_WELL
    elif crossings == 0 and mean_abs > hysteresis_px:
        classification = WellClass.INTRA_WELL
    else:
        classification = WellClass.INDETERMINATE

    report = WellReport(classification=classification,
                        crossing_count=crossings,
                        transition_rate_hz=crossings / (2.0 * duration),
                        mean_abs_deflection_px=mean_abs,
                        peak_abs_deflection_px=float(np.max(np.abs(values))),
                        duration_s=duration,
                        ok_sample_count=len(ok),
                        excluded_sample_count=len(samples) - len(ok),
                        wells=_dwell_statistics(values, fps))
    LOG.info(f"{classification.value}: {crossings} crossings over "
             f"{duration:.2f}s ({report.transition_rate_hz:.3f} Hz)")
    return report


def _dwell_statistics(values: np.ndarray, fps: float) -> Dict[str, WellDwell]:
    """ per side of the central line: sample share, mean deflection, mean run length """
    wells = {}
    for name, mask in (("positive", values > 0), ("negative", values < 0)):
        count = int(mask.sum())
        if not count:
            wells[name] = WellDwell()
            continue
        # run lengths of consecutive samples on this side
        edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
        runs = np.flatnonzero(edges == -1) - np.flatnonzero(edges == 1)
        wells[name] = WellDwell(sample_count=count,
                                dwell_fraction=count / len(values),
                                mean_deflection_px=float(values[mask].mean()),
                                mean_dwell_s=float(runs.mean()) / fps)
    return wells


def amplitude_by_metadata(samples: Sequence[DeflectionSample],
                          key: str) -> Dict[str, float]:
    """
    Peak |deflection| of the ok samples grouped by a frame metadata value,
    e.g. a recorded drive voltage. Samples without the key are skipped.
    """
    peaks: Dict[str, float] = {}
    for s in samples:
        if not s.ok or key not in s.metadata:
            continue
        value = s.metadata[key]
        peaks[value] = max(peaks.get(value, 0.0), abs(s.deflection_px))
    return peaks
