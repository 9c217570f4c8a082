"""Annotated frames: central line, fitted curve and color coded track points."""
from dataclasses import replace
from enum import Enum
from typing import Dict, Optional

import numpy as np
from PIL import Image, ImageDraw

from beam_tracker.fitter import model_eval
from beam_tracker.imaging import Frame, Region
from beam_tracker.pipeline import FrameResult
from beam_tracker.tracker import PointStatus


class Color(Enum):
    """
    Overlay colors. Any role can be recolored with a hex code or a member
    name through OverlayStyle.
    """
    BLACK = (0, 0, 0)
    WHITE = (255, 255, 255)

    RED = (255, 0, 0)
    GREEN = (0, 255, 0)
    BLUE = (0, 0, 255)

    YELLOW = (255, 255, 0)
    MAGENTA = (255, 0, 255)
    CYAN = (0, 255, 255)

    ORANGE = (255, 134, 0)

    def as_rgb_tuple(self) -> tuple:
        return self.value

    @staticmethod
    def from_hex(hex_code: str) -> tuple:
        """
        Get a color RGB tuple from a hex code
        @param hex_code: RGB hex code, optionally starting with '#'
        @return: tuple RGB values
        """
        hex_code = hex_code.lstrip('#').strip().lower()
        if len(hex_code) != 6:
            raise ValueError(f"Expected 6-character hex code, got: {hex_code}")
        return tuple(int(hex_code[i:i + 2], 16) for i in (0, 2, 4))

    @classmethod
    def from_name(cls, color: str):
        """
        Get a Color object by name.
        :param color: string color corresponding on a name in the Color enum
        :returns: Color enum object for the requested string color
        """
        for c in cls:
            if c.name.lower() == color.lower():
                return c
        raise ValueError(f'{color} is not a valid Color')

    @classmethod
    def parse(cls, color: str) -> tuple:
        """ RGB tuple from a member name or a hex code """
        try:
            return cls.from_name(color).as_rgb_tuple()
        except ValueError:
            return cls.from_hex(color)


DEFAULT_COLORS = {
    "line": Color.CYAN,
    "curve": Color.YELLOW,
    PointStatus.KEPT.value: Color.GREEN,
    PointStatus.REMOVED_CONTINUITY.value: Color.RED,
    PointStatus.REMOVED_PARABOLA.value: Color.MAGENTA,
    PointStatus.CANDIDATE.value: Color.ORANGE,
}


class OverlayStyle:
    def __init__(self, colors: Optional[Dict[str, str]] = None):
        self.colors = {role: c.as_rgb_tuple() for role, c in DEFAULT_COLORS.items()}
        for role, color in (colors or {}).items():
            if role not in self.colors:
                raise ValueError(f"unknown overlay role {role!r}")
            self.colors[role] = Color.parse(color)

    def __getitem__(self, role: str) -> tuple:
        return self.colors[role]


def render_overlay(frame: Frame, result: FrameResult,
                   roi: Optional[Region] = None,
                   style: Optional[OverlayStyle] = None) -> Image.Image:
    """
    Draw a frame's tracking result on top of it
    @param frame: full frame the result was computed on
    @param result: pipeline output, coordinates relative to roi
    @param roi: crop the pipeline applied, None for the whole frame
    @return: RGB image the size of the full frame
    """
    style = style or OverlayStyle()
    image = Image.fromarray(np.ascontiguousarray(frame.pixels)).convert("RGB")
    draw = ImageDraw.Draw(image)
    d_row, d_col = (roi.row, roi.col) if roi else (0, 0)

    line = result.line
    if line is not None:
        line = line.translated(d_row, d_col)
        draw.line([(line.top[1], line.top[0]), (line.bottom[1], line.bottom[0])],
                  fill=style["line"], width=1)

    fit = result.sample.fit
    if fit is not None and line is not None:
        fit = replace(fit, line=line)
        rows = np.arange(np.ceil(line.top[0]), np.floor(line.bottom[0]) + 1)
        cols = model_eval(fit, rows)
        draw.line(list(zip(cols.tolist(), rows.tolist())),
                  fill=style["curve"], width=1)

    for p in result.points:
        draw.point((p.col + d_col, p.row + d_row), fill=style[p.status.value])
    return image


def save_overlay(path: str, frame: Frame, result: FrameResult,
                 roi: Optional[Region] = None,
                 style: Optional[OverlayStyle] = None):
    render_overlay(frame, result, roi, style).save(path)
