"""Synthetic SEM-like frames of a buckling beam, with exact ground truth.

Frames show two bright clamp pads and a thin bright beam between their
centres, shaped as the post-buckling curve and moving along a trajectory
over time, buried in gaussian noise, salt pixels and horizontal streaks.
Rendering is pure given (scene, frame index, seed).
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from os import makedirs
from os.path import join
from typing import Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
from ovos_utils.log import LOG

from beam_tracker.analysis import deflection
from beam_tracker.exceptions import ConfigError, SceneError
from beam_tracker.fitter import BeamFit
from beam_tracker.imaging import Frame, Region
from beam_tracker.locator import CentralLine

GROUND_TRUTH_COLUMNS = ["frame", "time_s", "deflection_px", "c1", "c2", "c3"]


class TrajectoryKind(str, Enum):
    STATIC = "static"
    SQUARE = "square"  # inter-well hopping
    SINE = "sine"      # oscillation inside one well when base > amplitude


@dataclass(frozen=True)
class Trajectory:
    """Mid-span deflection A(t) and the mode coefficients derived from it."""
    kind: TrajectoryKind = TrajectoryKind.SQUARE
    amplitude_px: float = 8.0
    frequency_hz: float = 0.5
    base_px: float = 0.0
    asymmetry: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", TrajectoryKind(self.kind))
        if self.frequency_hz < 0:
            raise SceneError(f"frequency must be >= 0, got {self.frequency_hz}")

    def mid_offset(self, t: float) -> float:
        if self.kind == TrajectoryKind.STATIC:
            return self.base_px
        if self.kind == TrajectoryKind.SQUARE:
            # half periods elapsed; epsilon keeps exact boundaries on the new side
            half_periods = math.floor(t * 2.0 * self.frequency_hz + 1e-9)
            sign = 1.0 if half_periods % 2 == 0 else -1.0
            return sign * self.amplitude_px
        return self.base_px + self.amplitude_px * math.sin(
            2.0 * math.pi * self.frequency_hz * t)

    def coefficients(self, t: float) -> Tuple[float, float, float]:
        """ (c1, c2, c3) whose offset vanishes at both clamps """
        a = self.mid_offset(t)
        return self.asymmetry * a + 0.0, -a / 2.0 + 0.0, a / 2.0 + 0.0


@dataclass(frozen=True)
class NoiseSpec:
    gaussian_sigma: float = 8.0
    salt_density: float = 0.02
    salt_min: int = 120
    streak_probability: float = 0.05
    streak_length: int = 12
    streak_min: int = 150
    motion_blur_frames: int = 0

    def __post_init__(self):
        for name in ("salt_density", "streak_probability"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise SceneError(f"{name} must be in [0, 1], got {getattr(self, name)}")
        if self.gaussian_sigma < 0:
            raise SceneError(f"gaussian_sigma must be >= 0, got {self.gaussian_sigma}")
        for name in ("salt_min", "streak_min"):
            if not 0 <= getattr(self, name) <= 255:
                raise SceneError(f"{name} must be in [0, 255], got {getattr(self, name)}")
        if self.streak_length < 1:
            raise SceneError(f"streak_length must be >= 1, got {self.streak_length}")
        if self.motion_blur_frames < 0:
            raise SceneError(f"motion_blur_frames must be >= 0, "
                             f"got {self.motion_blur_frames}")

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(gaussian_sigma=0.0, salt_density=0.0, streak_probability=0.0)


@dataclass(frozen=True)
class SceneSpec:
    width: int = 105
    height: int = 350
    top_pad: Region = Region(32, 0, 41, 25)
    bottom_pad: Region = Region(32, 325, 41, 25)
    trajectory: Trajectory = field(default_factory=Trajectory)
    beam_sigma_px: float = 0.6
    beam_brightness: int = 235
    pad_brightness: int = 200
    background_level: int = 5
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    n_frames: int = 100
    fps: float = 10.0
    seed: int = 0
    scale_nm_per_px: Optional[float] = 71.4

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise SceneError(f"patch must be at least 1x1, got {self.width}x{self.height}")
        for name in ("top_pad", "bottom_pad"):
            pad = getattr(self, name)
            if not pad.fits(self.width, self.height):
                raise SceneError(f"{name} {pad} is outside the "
                                 f"{self.width}x{self.height} patch")
        if self.top_pad.row + self.top_pad.height > self.bottom_pad.row:
            raise SceneError("top pad must end above the bottom pad")
        for name in ("beam_brightness", "pad_brightness", "background_level"):
            if not 0 <= getattr(self, name) <= 255:
                raise SceneError(f"{name} must be in [0, 255], got {getattr(self, name)}")
        if self.beam_sigma_px <= 0:
            raise SceneError(f"beam_sigma_px must be positive, got {self.beam_sigma_px}")
        if self.n_frames < 1:
            raise SceneError(f"n_frames must be >= 1, got {self.n_frames}")
        if self.fps <= 0:
            raise SceneError(f"fps must be positive, got {self.fps}")
        if self.scale_nm_per_px is not None and self.scale_nm_per_px <= 0:
            raise SceneError(f"scale_nm_per_px must be positive, "
                             f"got {self.scale_nm_per_px}")

    @property
    def line(self) -> CentralLine:
        """ central line through the pad centres """
        return CentralLine(top=_pad_center(self.top_pad),
                           bottom=_pad_center(self.bottom_pad))

    def time_of(self, frame_index: int) -> float:
        return frame_index / self.fps


@dataclass(frozen=True, eq=False)
class GroundTruth:
    frame_index: int
    time_s: float
    coefficients: Tuple[float, float, float]
    deflection_px: float
    beam_rows: np.ndarray     # rows the beam is drawn on
    beam_centers: np.ndarray  # exact column of the beam axis per row
    beam_cols: np.ndarray     # rendered (brightest) column per row

    def as_row(self) -> dict:
        c1, c2, c3 = self.coefficients
        return {"frame": self.frame_index, "time_s": self.time_s,
                "deflection_px": self.deflection_px, "c1": c1, "c2": c2, "c3": c3}


def _pad_center(pad: Region) -> Tuple[float, float]:
    return pad.row + (pad.height - 1) / 2.0, pad.col + (pad.width - 1) / 2.0


def _beam_axis(spec: SceneSpec, coefficients, rows: np.ndarray) -> np.ndarray:
    line = spec.line
    fit = BeamFit.for_line(line, *coefficients)
    return line.col_at(rows) + fit.offset(rows - line.top[0])


def _beam_layer(spec: SceneSpec, coefficients, rows: np.ndarray) -> np.ndarray:
    """ float image holding only the beam, gaussian across each row """
    centers = np.floor(_beam_axis(spec, coefficients, rows) + 0.5)
    if centers.size and (centers.min() < 0 or centers.max() >= spec.width):
        raise SceneError("beam leaves the patch, reduce the trajectory amplitude")
    cols = np.arange(spec.width, dtype=np.float64)
    profile = spec.beam_brightness * np.exp(
        -(cols[None, :] - centers[:, None]) ** 2 / (2.0 * spec.beam_sigma_px ** 2))
    layer = np.zeros((spec.height, spec.width))
    layer[rows.astype(int)] = profile
    return layer


def render_frame(spec: SceneSpec, frame_index: int,
                 rng_seed: Optional[int] = None) -> Tuple[Frame, GroundTruth]:
    """
    Render one frame
    @param spec: scene description
    @param frame_index: position in the sequence, sets the time
    @param rng_seed: noise seed, spec.seed by default
    @return: (Frame, GroundTruth computed before any noise)
    """
    seed = spec.seed if rng_seed is None else rng_seed
    rng = np.random.default_rng([seed, frame_index])
    t = spec.time_of(frame_index)
    line = spec.line
    rows = np.arange(math.ceil(line.top[0]), math.floor(line.bottom[0]) + 1,
                     dtype=np.float64)
    coefficients = spec.trajectory.coefficients(t)

    beam = _beam_layer(spec, coefficients, rows)
    ghosts = spec.noise.motion_blur_frames
    if ghosts > 1:
        # positions inside the exposure of the previous frame interval
        layers = [_beam_layer(spec, spec.trajectory.coefficients(
            t - j / (ghosts * spec.fps)), rows) for j in range(ghosts)]
        beam = np.mean(layers, axis=0)

    image = np.maximum(np.full((spec.height, spec.width),
                               float(spec.background_level)), beam)
    pads = np.zeros(image.shape, dtype=bool)
    for pad in (spec.top_pad, spec.bottom_pad):
        pads[pad.row:pad.row + pad.height, pad.col:pad.col + pad.width] = True
    image[pads] = spec.pad_brightness

    centers = _beam_axis(spec, coefficients, rows)
    beam_cols = np.floor(centers + 0.5).astype(int)
    on_beam = np.zeros(image.shape, dtype=bool)
    on_beam[rows.astype(int), beam_cols] = True

    noise = spec.noise
    if noise.gaussian_sigma > 0:
        image = image + rng.normal(0.0, noise.gaussian_sigma, image.shape)
    if noise.salt_density > 0:
        salt = (rng.random(image.shape) < noise.salt_density) & ~pads & ~on_beam
        image[salt] = rng.integers(noise.salt_min, 256, int(salt.sum()))
    if noise.streak_probability > 0:
        for row in np.flatnonzero(rng.random(spec.height) < noise.streak_probability):
            start = int(rng.integers(0, spec.width))
            stop = min(spec.width, start + noise.streak_length)
            image[row, start:stop] = rng.integers(noise.streak_min, 256)

    pixels = np.clip(np.floor(image + 0.5), 0, 255).astype(np.uint8)
    metadata = {}
    if spec.scale_nm_per_px is not None:
        metadata["scale_nm_per_px"] = repr(spec.scale_nm_per_px)
    frame = Frame(pixels=pixels, scale_nm_per_px=spec.scale_nm_per_px,
                  index=frame_index, timestamp_s=t, metadata=metadata)
    truth = GroundTruth(frame_index=frame_index, time_s=t,
                        coefficients=coefficients,
                        deflection_px=deflection(BeamFit.for_line(line, *coefficients)),
                        beam_rows=rows.astype(int), beam_centers=centers,
                        beam_cols=beam_cols)
    return frame, truth


def render_sequence(spec: SceneSpec, n_frames: Optional[int] = None,
                    fps: Optional[float] = None,
                    seed: Optional[int] = None) -> Iterator[Tuple[Frame, GroundTruth]]:
    """ lazily render frames 0..n_frames-1, overriding the scene's count, rate and seed """
    if n_frames is not None or fps is not None:
        spec = replace(spec, n_frames=spec.n_frames if n_frames is None else n_frames,
                       fps=spec.fps if fps is None else fps)
    for index in range(spec.n_frames):
        yield render_frame(spec, index, seed)


def ground_truth_table(truths: List[GroundTruth]) -> pd.DataFrame:
    return pd.DataFrame([t.as_row() for t in truths], columns=GROUND_TRUTH_COLUMNS)


def write_sequence(spec: SceneSpec, output_dir: str,
                   n_frames: Optional[int] = None, fps: Optional[float] = None,
                   seed: Optional[int] = None) -> List[GroundTruth]:
    """
    Render a sequence to numbered PNGs plus ground_truth.csv
    @return: ground truth of every frame, in order
    """
    from beam_tracker.frames import frame_filename, write_png
    makedirs(output_dir, exist_ok=True)
    truths = []
    for frame, truth in render_sequence(spec, n_frames, fps, seed):
        write_png(frame, join(output_dir, frame_filename(frame.index)))
        truths.append(truth)
    ground_truth_table(truths).to_csv(join(output_dir, "ground_truth.csv"),
                                      index=False, float_format="%.6f")
    LOG.info(f"wrote {len(truths)} synthetic frames to {output_dir}")
    return truths


_NOISE_KEYS = {f for f in NoiseSpec.__dataclass_fields__}
_TRAJECTORY_KEYS = {"kind", "amplitude_px", "frequency_hz", "base_px", "asymmetry"}
_SCENE_KEYS = {"width", "height", "top_pad", "bottom_pad", "beam_sigma_px",
               "beam_brightness", "pad_brightness", "background_level",
               "n_frames", "fps", "seed", "scale_nm_per_px"}
_INT_KEYS = {"width", "height", "beam_brightness", "pad_brightness",
             "background_level", "n_frames", "seed", "salt_min", "streak_min",
             "streak_length", "motion_blur_frames"}


def _typed(key: str, value):
    if key in ("top_pad", "bottom_pad"):
        return value if isinstance(value, Region) else Region.parse(value)
    if key == "kind":
        return TrajectoryKind(str(value).lower())
    if key == "scale_nm_per_px" and value is None:
        return None
    if isinstance(value, bool) or value is None:
        raise ValueError(f"{key} needs a number, got {value!r}")
    if key in _INT_KEYS:
        if float(value) != int(float(value)):
            raise ValueError(f"{key} needs an integer, got {value!r}")
        return int(float(value))
    return float(value)


def scene_from_dict(data: dict) -> SceneSpec:
    """
    Build a SceneSpec from parsed key = value settings. Trajectory keys sit
    under `trajectory.` (or `trajectory = square` for the kind alone), noise
    keys under `noise.`; `noise = none` disables all noise.
    """
    data = dict(data)
    try:
        noise_data = data.pop("noise", {})
        if noise_data is None or noise_data == "none":
            noise = NoiseSpec.none()
        elif isinstance(noise_data, dict):
            unknown = set(noise_data) - _NOISE_KEYS
            if unknown:
                raise SceneError(f"unknown noise keys: {', '.join(sorted(unknown))}")
            noise = NoiseSpec(**{k: _typed(k, v) for k, v in noise_data.items()})
        else:
            raise SceneError(f"noise must be a section or 'none', got {noise_data!r}")

        traj_data = data.pop("trajectory", {})
        if isinstance(traj_data, str):
            traj_data = {"kind": traj_data}
        unknown = set(traj_data) - _TRAJECTORY_KEYS
        if unknown:
            raise SceneError(f"unknown trajectory keys: {', '.join(sorted(unknown))}")
        trajectory = Trajectory(**{k: _typed(k, v) for k, v in traj_data.items()})

        unknown = set(data) - _SCENE_KEYS
        if unknown:
            raise SceneError(f"unknown scene keys: {', '.join(sorted(unknown))}")
        return SceneSpec(trajectory=trajectory, noise=noise,
                         **{k: _typed(k, v) for k, v in data.items()})
    except (TypeError, ValueError) as e:
        if isinstance(e, SceneError):
            raise
        raise SceneError(f"invalid scene: {e}")


def load_scene(path: Optional[str] = None) -> SceneSpec:
    """ read a key = value scene file; no path gives the default scene """
    if not path:
        return SceneSpec()
    from beam_tracker.utils.config import read_config_file
    try:
        return scene_from_dict(read_config_file(path))
    except ConfigError as e:
        raise SceneError(str(e))
