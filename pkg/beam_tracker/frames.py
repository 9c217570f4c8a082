"""Directories of numbered PNG frames."""
import re
from os.path import basename, isdir, join, splitext
from os import listdir
from typing import List, Optional, Tuple

import numpy as np
from ovos_utils.log import LOG
from PIL import Image, UnidentifiedImageError
from PIL.PngImagePlugin import PngInfo

from beam_tracker.exceptions import FrameError
from beam_tracker.imaging import Frame, to_grayscale

_DIGITS = re.compile(r"\d+")
SCALE_KEY = "scale_nm_per_px"


def frame_filename(index: int) -> str:
    return f"frame_{index:05d}.png"


def frame_index(path: str) -> Optional[int]:
    """ last digit group of the file stem, None when there is none """
    groups = _DIGITS.findall(splitext(basename(path))[0])
    return int(groups[-1]) if groups else None


def list_frames(directory: str) -> List[Tuple[int, str]]:
    """
    Numbered PNG frames of a directory as (index, path), sorted by index.
    PNGs without digits in their name are ignored.
    """
    if not isdir(directory):
        raise FileNotFoundError(f"not a directory: {directory}")
    frames = {}
    for name in sorted(listdir(directory)):
        if not name.lower().endswith(".png"):
            continue
        index = frame_index(name)
        if index is None:
            LOG.debug(f"skipping unnumbered file {name}")
            continue
        if index in frames:
            raise FrameError(f"frame {index} appears twice: "
                             f"{basename(frames[index])} and {name}")
        frames[index] = join(directory, name)
    return sorted(frames.items())


def _parse_scale(value: Optional[str]) -> Optional[float]:
    if value is None:
        return None
    try:
        scale = float(value)
    except ValueError:
        LOG.warning(f"ignoring unreadable {SCALE_KEY}={value!r}")
        return None
    return scale if scale > 0 else None


def read_png(path: str, index: Optional[int] = None,
             fps: Optional[float] = None) -> Frame:
    """
    Decode a PNG into a grayscale Frame. PNG text chunks become the frame
    metadata; a `scale_nm_per_px` chunk sets the frame scale.
    """
    try:
        with Image.open(path) as img:
            img.load()
            text = dict(getattr(img, "text", {}) or {})
            if img.mode in ("1", "P"):
                img = img.convert("L" if img.mode == "1" else "RGB")
            if img.mode not in ("L", "RGB"):
                raise FrameError(f"{path}: unsupported image mode {img.mode}, "
                                 f"expected 1 or 3 channels")
            raw = np.asarray(img)
    except (OSError, UnidentifiedImageError) as e:
        raise FrameError(f"cannot read {path}: {e}")
    if index is None:
        index = frame_index(path) or 0
    return to_grayscale(raw, index=index, fps=fps,
                        scale_nm_per_px=_parse_scale(text.get(SCALE_KEY)),
                        metadata=text)


def write_png(frame: Frame, path: str):
    """ save a frame as 8-bit grayscale, metadata and scale as text chunks """
    info = PngInfo()
    metadata = dict(frame.metadata)
    if frame.scale_nm_per_px is not None:
        metadata.setdefault(SCALE_KEY, repr(frame.scale_nm_per_px))
    for key in sorted(metadata):
        info.add_text(key, str(metadata[key]))
    Image.fromarray(np.ascontiguousarray(frame.pixels)).save(
        path, pnginfo=info)


def load_frames(directory: str, fps: Optional[float] = None) -> List[Frame]:
    """ read every numbered frame of a directory, in index order """
    return [read_png(path, index, fps) for index, path in list_frames(directory)]
