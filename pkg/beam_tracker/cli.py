"""beam-tracker command line: track, synth, bench, plugins."""
import argparse
import json
import sys
from dataclasses import dataclass, field
from os import makedirs
from os.path import join
from time import perf_counter
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from ovos_utils.log import LOG

from beam_tracker.analysis import WellClass, WellReport, classify_wells
from beam_tracker.exceptions import (ConfigError, FrameError,
                                     InsufficientDataError, SceneError)
from beam_tracker.frames import frame_filename, list_frames, read_png
from beam_tracker.imaging import Frame
from beam_tracker.pipeline import STAGES, BeamTracker, FrameResult
from beam_tracker.utils.config import PipelineConfig, load_config
from beam_tracker.version import __version__

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_CONFIG_ERROR = 2
EXIT_NO_OK_FRAMES = 3

RESULT_COLUMNS = ["frame", "time_s", "status", "deflection_px", "deflection_nm",
                  "c1", "c2", "c3", "k", "residual_rms", "points_kept",
                  "iterations"]
TARGET_FPS = 7.0


def results_table(results: Sequence[FrameResult]) -> pd.DataFrame:
    """ one row per frame, missing values as NaN / NA """
    rows = []
    for r in results:
        s, fit = r.sample, r.sample.fit
        rows.append({
            "frame": s.frame_index,
            "time_s": s.time_s,
            "status": s.status.value,
            "deflection_px": np.nan if s.deflection_px is None else s.deflection_px,
            "deflection_nm": np.nan if s.deflection_nm is None else s.deflection_nm,
            "c1": fit.c1 if fit else np.nan,
            "c2": fit.c2 if fit else np.nan,
            "c3": fit.c3 if fit else np.nan,
            "k": fit.k if fit else np.nan,
            "residual_rms": fit.residual_rms if fit else np.nan,
            "points_kept": s.point_count_kept,
            "iterations": fit.iterations if fit else None,
        })
    table = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    for col in RESULT_COLUMNS:
        if col in ("status",):
            continue
        if col in ("frame", "points_kept", "iterations"):
            table[col] = table[col].astype("Int64")
        else:
            table[col] = table[col].astype("float64")
    return table


def write_results(results: Sequence[FrameResult], path: str):
    results_table(results).to_csv(path, index=False, float_format="%.6f",
                                  na_rep="", lineterminator="\n")


def well_report(results: Sequence[FrameResult], config: PipelineConfig) -> WellReport:
    samples = [r.sample for r in results]
    try:
        return classify_wells(samples, config.fps, config.hysteresis_px)
    except InsufficientDataError as e:
        LOG.warning(f"no well classification: {e}")
        ok = sum(s.ok for s in samples)
        return WellReport(classification=WellClass.INDETERMINATE,
                          crossing_count=0, transition_rate_hz=0.0,
                          mean_abs_deflection_px=float(np.mean(
                              [abs(s.deflection_px) for s in samples if s.ok]))
                          if ok else 0.0,
                          ok_sample_count=ok,
                          excluded_sample_count=len(samples) - ok)


def _read_frames(input_dir: str, fps: float) -> List[Frame]:
    entries = list_frames(input_dir)
    if not entries:
        raise FrameError(f"no numbered PNG frames in {input_dir}")
    return [read_png(path, index, fps) for index, path in entries]


def _prepare(input_dir: str, config_path: Optional[str], overrides: Optional[dict]):
    """ config, tracker and decoded frames, or the exit code that stops the run """
    try:
        config = load_config(config_path, overrides)
        tracker = BeamTracker(config)
    except (ConfigError, ValueError) as e:
        LOG.error(f"configuration error: {e}")
        return EXIT_CONFIG_ERROR
    start = perf_counter()
    try:
        frames = _read_frames(input_dir, config.fps)
    except (OSError, FrameError) as e:
        LOG.error(f"input error: {e}")
        return EXIT_INPUT_ERROR
    first = frames[0]
    if config.roi is not None and not config.roi.fits(first.width, first.height):
        LOG.error(f"configuration error: roi {config.roi} outside "
                  f"{first.width}x{first.height} frame")
        return EXIT_CONFIG_ERROR
    return config, tracker, frames, perf_counter() - start


def cmd_track(input_dir: str, config_path: Optional[str] = None,
              output_dir: str = ".", overrides: Optional[dict] = None) -> int:
    """
    Track every frame of input_dir and write results.csv, summary.json and,
    when enabled, overlay PNGs into output_dir
    @return: process exit code
    """
    prepared = _prepare(input_dir, config_path, overrides)
    if isinstance(prepared, int):
        return prepared
    config, tracker, frames, _ = prepared

    style = None
    if config.overlay:
        from beam_tracker.overlay import OverlayStyle
        try:
            style = OverlayStyle(config.colors)
        except ValueError as e:
            LOG.error(f"configuration error: {e}")
            return EXIT_CONFIG_ERROR

    results = tracker.track(frames)
    try:
        makedirs(output_dir, exist_ok=True)
        write_results(results, join(output_dir, "results.csv"))
        report = well_report(results, config)
        with open(join(output_dir, "summary.json"), "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        if style is not None:
            from beam_tracker.overlay import save_overlay
            overlay_dir = join(output_dir, "overlay")
            makedirs(overlay_dir, exist_ok=True)
            for frame, result in zip(frames, results):
                save_overlay(join(overlay_dir, frame_filename(frame.index)),
                             frame, result, config.roi, style)
    except OSError as e:
        LOG.error(f"cannot write results: {e}")
        return EXIT_INPUT_ERROR

    if not any(r.sample.ok for r in results):
        LOG.error("no frame could be tracked")
        return EXIT_NO_OK_FRAMES
    LOG.info(f"{report.classification.value}, "
             f"{report.transition_rate_hz:.3f} Hz, results in {output_dir}")
    return EXIT_OK


def cmd_synth(spec_path: Optional[str], output_dir: str,
              n_frames: Optional[int] = None, seed: Optional[int] = None) -> int:
    """ render a synthetic recording and its ground truth """
    from beam_tracker.synth import load_scene, write_sequence
    try:
        scene = load_scene(spec_path)
        if n_frames is not None and n_frames < 1:
            raise SceneError(f"n_frames must be >= 1, got {n_frames}")
        write_sequence(scene, output_dir, n_frames=n_frames, seed=seed)
    except SceneError as e:
        LOG.error(f"invalid scene: {e}")
        return EXIT_CONFIG_ERROR
    except OSError as e:
        LOG.error(f"cannot write frames: {e}")
        return EXIT_INPUT_ERROR
    return EXIT_OK


@dataclass
class BenchReport:
    frames: int
    decode_s: float
    pipeline_s: float
    stage_ms: Dict[str, float] = field(default_factory=dict)
    ok_frames: int = 0

    @property
    def fps(self) -> float:
        return self.frames / self.pipeline_s if self.pipeline_s > 0 else float("inf")

    def format(self) -> str:
        lines = [f"frames:      {self.frames} ({self.ok_frames} ok)",
                 f"decode:      {self.decode_s:.3f} s",
                 f"pipeline:    {self.pipeline_s:.3f} s",
                 f"throughput:  {self.fps:.2f} frames/s",
                 "mean per frame:"]
        lines += [f"  {stage:<10} {ms:8.3f} ms" for stage, ms in self.stage_ms.items()]
        return "\n".join(lines)


def benchmark(tracker: BeamTracker, frames: Sequence[Frame],
              decode_s: float = 0.0) -> BenchReport:
    start = perf_counter()
    results = tracker.track(frames)
    elapsed = perf_counter() - start
    stage_ms = {}
    for stage in STAGES + ("total",):
        times = [r.timings.get(stage, 0.0) for r in results]
        stage_ms[stage] = 1000.0 * float(np.mean(times)) if times else 0.0
    return BenchReport(frames=len(results), decode_s=decode_s, pipeline_s=elapsed,
                       stage_ms=stage_ms,
                       ok_frames=sum(r.sample.ok for r in results))


def cmd_bench(input_dir: str, config_path: Optional[str] = None,
              overrides: Optional[dict] = None) -> int:
    """ time the per-frame pipeline, PNG decoding reported on its own """
    prepared = _prepare(input_dir, config_path, overrides)
    if isinstance(prepared, int):
        return prepared
    config, tracker, frames, decode_s = prepared
    report = benchmark(tracker, frames, decode_s)
    print(report.format())
    if report.fps < TARGET_FPS:
        LOG.warning(f"throughput {report.fps:.2f} frames/s is below "
                    f"{TARGET_FPS:.0f} frames/s")
    return EXIT_OK if report.ok_frames else EXIT_NO_OK_FRAMES


def cmd_plugins() -> int:
    from beam_tracker.denoise import BeamDenoiserFactory, find_denoise_plugins
    from beam_tracker.regression import BeamFitterFactory, find_fitter_plugins
    for title, builtins, found in (
            ("denoise", BeamDenoiserFactory.BUILTINS, find_denoise_plugins()),
            ("fitter", BeamFitterFactory.BUILTINS, find_fitter_plugins())):
        print(f"{title}:")
        for name in sorted(set(builtins) | set(found)):
            print(f"  {name}")
    return EXIT_OK


def _overrides(args) -> dict:
    return {"fps": getattr(args, "fps", None),
            "scale_nm_per_px": getattr(args, "scale", None),
            "roi": getattr(args, "roi", None),
            "relocate_per_frame": getattr(args, "relocate_per_frame", None),
            "workers": getattr(args, "workers", None),
            "overlay": getattr(args, "overlay", None)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beam-tracker",
        description="Track a buckling beam across microscope frames.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def pipeline_options(p):
        p.add_argument("input_dir", help="directory of numbered PNG frames")
        p.add_argument("--config", dest="config_path", default=None,
                       help="key = value pipeline config file")
        p.add_argument("--fps", type=float, default=None,
                       help="frame rate of the recording")
        p.add_argument("--scale", type=float, default=None,
                       help="nm per pixel, overrides the frames' own scale")
        p.add_argument("--roi", default=None, help="col,row,width,height crop")
        p.add_argument("--workers", type=int, default=None,
                       help="frames processed in parallel")
        p.add_argument("--relocate-per-frame", action="store_true", default=None,
                       help="locate the clamps on every frame")

    track = sub.add_parser("track", help="track a frame directory")
    pipeline_options(track)
    track.add_argument("--out", dest="output_dir", default=".",
                       help="output directory")
    track.add_argument("--overlay", action="store_true", default=None,
                       help="write annotated frames")

    synth = sub.add_parser("synth", help="render a synthetic recording")
    synth.add_argument("spec_path", nargs="?", default=None,
                       help="key = value scene file, defaults when omitted")
    synth.add_argument("--out", dest="output_dir", required=True,
                       help="output directory")
    synth.add_argument("--frames", dest="n_frames", type=int, default=None)
    synth.add_argument("--seed", type=int, default=None)

    bench = sub.add_parser("bench", help="measure pipeline throughput")
    pipeline_options(bench)

    sub.add_parser("plugins", help="list installed pipeline stages")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        LOG.set_level("DEBUG")
    if args.command == "track":
        return cmd_track(args.input_dir, args.config_path, args.output_dir,
                         _overrides(args))
    if args.command == "synth":
        return cmd_synth(args.spec_path, args.output_dir, args.n_frames, args.seed)
    if args.command == "bench":
        return cmd_bench(args.input_dir, args.config_path, _overrides(args))
    return cmd_plugins()


if __name__ == "__main__":
    sys.exit(main())
