"""Per-frame flow: crop, locate, denoise, track, filter, fit, measure."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from time import perf_counter
from typing import Dict, List, Optional, Sequence, Tuple

from ovos_utils.log import LOG

from beam_tracker.analysis import (DeflectionSample, SampleStatus, deflection,
                                   to_nm)
from beam_tracker.denoise import BeamDenoiserFactory
from beam_tracker.exceptions import (DegenerateImageError, FrameError,
                                     InsufficientDataError, LocateError,
                                     NotConvergedError, SingularSystemError)
from beam_tracker.imaging import Frame, crop
from beam_tracker.locator import CentralLine, locate
from beam_tracker.regression import BeamFitterFactory
from beam_tracker.tracker import (ContinuityConfig, ParabolaBandConfig,
                                  TrackPoint, active, continuity_filter,
                                  parabola_band_filter, row_maxima)
from beam_tracker.utils.config import PipelineConfig

STAGES = ("crop", "locate", "denoise", "track", "filter", "fit", "measure")
# a frame the roi does not fit counts as one the clamps cannot be located in
_LOCATE_ERRORS = (LocateError, DegenerateImageError, FrameError)
_FIT_ERRORS = (InsufficientDataError, SingularSystemError, NotConvergedError,
               ValueError)


@dataclass(frozen=True)
class FrameResult:
    """Everything one frame produced, in cropped frame coordinates."""
    sample: DeflectionSample
    points: Tuple[TrackPoint, ...] = ()
    line: Optional[CentralLine] = None
    timings: Dict[str, float] = field(default_factory=dict)


class _Stopwatch:
    def __init__(self):
        self.timings: Dict[str, float] = {}

    def time(self, stage: str, fn, *args, **kwargs):
        start = perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.timings[stage] = self.timings.get(stage, 0.0) + \
                perf_counter() - start


class BeamTracker:
    def __init__(self, config: Optional[PipelineConfig] = None):
        self.config = config or PipelineConfig()
        stage_config = self.config.as_dict()
        self.denoiser = BeamDenoiserFactory.create(stage_config)
        self.fitter = BeamFitterFactory.create(stage_config)
        self.continuity = ContinuityConfig(margin=self.config.continuity_margin,
                                           doubling=self.config.continuity_doubling)

    def crop(self, frame: Frame) -> Frame:
        if self.config.roi is None:
            return frame
        return crop(frame, self.config.roi)

    def locate(self, frame: Frame) -> CentralLine:
        """ central line of an already cropped frame """
        return locate(frame, blur_window=self.config.blur_window,
                      min_area_fraction=self.config.min_area_fraction)

    def find_line(self, frames: Sequence[Frame]) -> Optional[CentralLine]:
        """ central line of the first frame the clamps can be located in """
        for frame in frames:
            try:
                return self.locate(self.crop(frame))
            except _LOCATE_ERRORS as e:
                LOG.warning(f"frame {frame.index}: clamps not located ({e}), "
                            f"trying the next frame")
        return None

    def _sample(self, frame: Frame, status: SampleStatus, message: str = "",
                **kwargs) -> DeflectionSample:
        return DeflectionSample(frame_index=frame.index, time_s=frame.timestamp_s,
                                status=status, metadata=frame.metadata,
                                message=message, **kwargs)

    def process_frame(self, frame: Frame,
                      line: Optional[CentralLine] = None) -> FrameResult:
        """
        Run one frame through the pipeline. Failures become the sample
        status, they are never raised.
        @param frame: full frame as read from disk
        @param line: central line to reuse, located on this frame when None
        """
        watch = _Stopwatch()
        start = perf_counter()
        try:
            patch = watch.time("crop", self.crop, frame)
            if line is None:
                line = watch.time("locate", self.locate, patch)
        except _LOCATE_ERRORS as e:
            LOG.warning(f"frame {frame.index}: {e}")
            watch.timings["total"] = perf_counter() - start
            return FrameResult(self._sample(frame, SampleStatus.LOCATE_FAILED,
                                            str(e)), timings=watch.timings)

        clean = watch.time("denoise", self.denoiser.denoise, patch)
        points = watch.time("track", row_maxima, clean, line.track_rows)
        fit = None
        try:
            points = watch.time("filter", self._filter, points, patch.width, line)
            fit = watch.time("fit", self.fitter.fit, active(points), line)
            px = watch.time("measure", deflection, fit, line)
        except _FIT_ERRORS as e:
            LOG.warning(f"frame {frame.index}: fit failed ({e})")
            watch.timings["total"] = perf_counter() - start
            sample = self._sample(frame, SampleStatus.FIT_FAILED, str(e), fit=fit,
                                  point_count_kept=len(active(points)))
            return FrameResult(sample, tuple(points), line, watch.timings)

        scale = self.config.scale_nm_per_px or frame.scale_nm_per_px
        nm = to_nm(px, scale) if scale is not None else None
        sample = self._sample(frame, SampleStatus.OK, fit=fit, deflection_px=px,
                              deflection_nm=nm,
                              point_count_kept=len(active(points)))
        watch.timings["total"] = perf_counter() - start
        return FrameResult(sample, tuple(points), line, watch.timings)

    def _filter(self, points: List[TrackPoint], width: int,
                line: CentralLine) -> List[TrackPoint]:
        points = continuity_filter(points, self.continuity)
        band = ParabolaBandConfig.for_patch(width, line,
                                            count=self.config.bend_candidates,
                                            separation_d=self.config.separation_d)
        return parabola_band_filter(points, band, line)

    def track(self, frames: Sequence[Frame]) -> List[FrameResult]:
        """
        Process a recording; results come back in input order whatever the
        worker count. Unless relocate_per_frame is set the clamps are located
        once, on the first frame where that succeeds, and that line is reused
        for every frame.
        """
        frames = list(frames)
        line = None
        if not self.config.relocate_per_frame:
            line = self.find_line(frames)
            if line is None:
                LOG.error("clamps could not be located on any frame")
                return [FrameResult(self._sample(f, SampleStatus.LOCATE_FAILED,
                                                 "clamps not located"))
                        for f in frames]
            LOG.info(f"central line from {line.top} to {line.bottom}, "
                     f"L={line.length_px:.2f}px")

        def work(frame: Frame) -> FrameResult:
            return self.process_frame(frame, line)

        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                results = list(pool.map(work, frames))
        else:
            results = [work(f) for f in frames]
        ok = sum(r.sample.ok for r in results)
        LOG.info(f"tracked {len(results)} frames, {ok} ok")
        return results
