import unittest

import numpy as np


class TestColor(unittest.TestCase):
    def test_parse(self):
        from beam_tracker.overlay import Color
        self.assertEqual(Color.parse("red"), (255, 0, 0))
        self.assertEqual(Color.parse("Cyan"), (0, 255, 255))
        self.assertEqual(Color.parse("#10a0ff"), (16, 160, 255))
        with self.assertRaises(ValueError):
            Color.parse("#123")
        with self.assertRaises(ValueError):
            Color.from_name("mauve")


class TestOverlayStyle(unittest.TestCase):
    def test_defaults_and_override(self):
        from beam_tracker.overlay import OverlayStyle
        style = OverlayStyle({"curve": "blue", "kept": "#ffffff"})
        self.assertEqual(style["curve"], (0, 0, 255))
        self.assertEqual(style["kept"], (255, 255, 255))
        self.assertEqual(style["line"], (0, 255, 255))
        with self.assertRaises(ValueError):
            OverlayStyle({"halo": "red"})


class TestRenderOverlay(unittest.TestCase):
    def test_points_drawn_at_frame_coordinates(self):
        from beam_tracker.imaging import Frame, Region
        from beam_tracker.overlay import OverlayStyle, render_overlay
        from beam_tracker.pipeline import BeamTracker
        from beam_tracker.synth import NoiseSpec, SceneSpec, render_frame
        from beam_tracker.utils.config import PipelineConfig
        frame, _ = render_frame(SceneSpec(noise=NoiseSpec.none()), 0)
        big = np.zeros((400, 200), dtype=np.uint8)
        big[30:380, 60:165] = frame.pixels
        roi = Region(60, 30, 105, 350)
        result = BeamTracker(PipelineConfig(roi=roi)).process_frame(Frame(big))
        style = OverlayStyle({"curve": "black", "line": "black"})
        image = render_overlay(Frame(big), result, roi, style)
        self.assertEqual(image.size, (200, 400))
        pixels = np.asarray(image)
        kept = [p for p in result.points if p.status.value == "kept"]
        self.assertTrue(kept)
        for p in kept[:20]:
            self.assertEqual(tuple(pixels[p.row + 30, p.col + 60]), (0, 255, 0))

    def test_failed_frame_is_plain_copy(self):
        from beam_tracker.analysis import DeflectionSample, SampleStatus
        from beam_tracker.imaging import Frame
        from beam_tracker.overlay import render_overlay
        from beam_tracker.pipeline import FrameResult
        pixels = np.arange(12, dtype=np.uint8).reshape(3, 4)
        result = FrameResult(DeflectionSample(0, 0.0, SampleStatus.LOCATE_FAILED))
        image = np.asarray(render_overlay(Frame(pixels), result))
        self.assertTrue((image[..., 0] == pixels).all())
        self.assertTrue((image[..., 2] == pixels).all())
