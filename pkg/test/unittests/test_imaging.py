import unittest
from fractions import Fraction

import numpy as np


def _brute_force_median(pixels, window):
    h, w = pixels.shape
    r = window // 2
    out = np.zeros_like(pixels)
    for row in range(h):
        for col in range(w):
            values = sorted(int(v) for v in pixels[max(0, row - r):row + r + 1,
                                                   max(0, col - r):col + r + 1].ravel())
            n = len(values)
            median = Fraction(values[(n - 1) // 2] + values[n // 2], 2)
            out[row, col] = int(median + Fraction(1, 2))
    return out


def _brute_force_otsu(pixels):
    """ smallest t minimizing the population weighted intra-class variance """
    values = pixels.ravel().astype(np.int64)
    best_t, best = None, None
    for t in range(1, 256):
        cost = Fraction(0)
        for cls in (values[values < t], values[values >= t]):
            if cls.size:
                # n * variance = sum of squares - sum^2 / n
                cost += int((cls * cls).sum()) - Fraction(int(cls.sum()) ** 2, cls.size)
        if best is None or cost < best:
            best_t, best = t, cost
    return best_t


class TestFrame(unittest.TestCase):
    def test_frame_is_read_only_copy(self):
        from beam_tracker.imaging import Frame
        raw = np.zeros((4, 5), dtype=np.uint8)
        frame = Frame(raw)
        raw[0, 0] = 99
        self.assertEqual(frame.pixels[0, 0], 0)
        self.assertFalse(frame.pixels.flags.writeable)
        self.assertEqual((frame.width, frame.height), (5, 4))

    def test_frame_validation(self):
        from beam_tracker.exceptions import FrameError
        from beam_tracker.imaging import Frame
        with self.assertRaises(FrameError):
            Frame(np.zeros(5))
        with self.assertRaises(FrameError):
            Frame(np.array([[300]]))
        with self.assertRaises(FrameError):
            Frame(np.array([[-1]]))
        with self.assertRaises(FrameError):
            Frame(np.zeros((0, 3)))
        self.assertEqual(Frame(np.array([[255.0]])).pixels.dtype, np.uint8)

    def test_float_intensities_round_half_up(self):
        from beam_tracker.exceptions import FrameError
        from beam_tracker.imaging import Frame
        frame = Frame(np.array([[10.7, 10.5, 10.49], [0.2, 254.5, 3.0]]))
        self.assertEqual(frame.pixels.tolist(), [[11, 11, 10], [0, 255, 3]])
        with self.assertRaises(FrameError):
            Frame(np.array([[255.5]]))
        with self.assertRaises(FrameError):
            Frame(np.array([[np.nan, 1.0]]))

    def test_from_array_timestamp(self):
        from beam_tracker.imaging import Frame
        frame = Frame.from_array(np.zeros((2, 2)), index=5, fps=10)
        self.assertEqual(frame.index, 5)
        self.assertAlmostEqual(frame.timestamp_s, 0.5)
        self.assertEqual(Frame.from_array(np.zeros((2, 2)), index=5).timestamp_s, 0.0)


class TestRegion(unittest.TestCase):
    def test_parse(self):
        from beam_tracker.imaging import Region
        roi = Region.parse("10, 20, 30, 40")
        self.assertEqual(roi, Region(10, 20, 30, 40))
        self.assertEqual(str(roi), "10,20,30,40")
        with self.assertRaises(ValueError):
            Region.parse("1,2,3")
        with self.assertRaises(ValueError):
            Region.parse("a,b,c,d")

    def test_fits_and_offset(self):
        from beam_tracker.imaging import Region
        self.assertTrue(Region(0, 0, 10, 10).fits(10, 10))
        self.assertFalse(Region(1, 0, 10, 10).fits(10, 10))
        self.assertFalse(Region(0, 0, 0, 10).fits(10, 10))
        self.assertEqual(Region(1, 2, 3, 4).offset_by(Region(10, 20, 50, 50)),
                         Region(11, 22, 3, 4))


class TestImaging(unittest.TestCase):
    def test_to_grayscale(self):
        from beam_tracker.imaging import to_grayscale
        rgb = np.array([[[255, 255, 255], [255, 0, 0], [0, 255, 0], [0, 0, 255],
                         [10, 10, 10]]], dtype=np.uint8)
        frame = to_grayscale(rgb, index=3, fps=10)
        self.assertEqual(frame.pixels.tolist(), [[255, 76, 150, 29, 10]])
        self.assertAlmostEqual(frame.timestamp_s, 0.3)

        gray = np.arange(6, dtype=np.uint8).reshape(2, 3)
        self.assertTrue(np.array_equal(to_grayscale(gray).pixels, gray))
        self.assertTrue(np.array_equal(to_grayscale(gray[..., None]).pixels, gray))

    def test_to_grayscale_bad_channels(self):
        from beam_tracker.exceptions import FrameError
        from beam_tracker.imaging import to_grayscale
        with self.assertRaises(FrameError):
            to_grayscale(np.zeros((2, 2, 4)))
        with self.assertRaises(FrameError):
            to_grayscale(np.zeros((2, 2, 2)))

    def test_crop(self):
        from beam_tracker.exceptions import FrameError
        from beam_tracker.imaging import Frame, Region, crop
        pixels = np.arange(100, dtype=np.uint8).reshape(10, 10)
        frame = Frame(pixels, index=7, scale_nm_per_px=71.4)
        cropped = crop(frame, Region(2, 3, 4, 5))
        self.assertTrue(np.array_equal(cropped.pixels, pixels[3:8, 2:6]))
        self.assertEqual(cropped.index, 7)
        self.assertEqual(cropped.scale_nm_per_px, 71.4)
        with self.assertRaises(FrameError):
            crop(frame, Region(8, 0, 4, 4))

    def test_crop_composes(self):
        from beam_tracker.imaging import Frame, Region, crop
        rng = np.random.default_rng(5)
        frame = Frame(rng.integers(0, 256, size=(20, 30)).astype(np.uint8))
        for _ in range(50):
            w, h = rng.integers(1, 31), rng.integers(1, 21)
            outer = Region(int(rng.integers(0, 31 - w)), int(rng.integers(0, 21 - h)),
                           int(w), int(h))
            w, h = rng.integers(1, w + 1), rng.integers(1, h + 1)
            inner = Region(int(rng.integers(0, outer.width - w + 1)),
                           int(rng.integers(0, outer.height - h + 1)),
                           int(w), int(h))
            self.assertTrue(np.array_equal(
                crop(crop(frame, outer), inner).pixels,
                crop(frame, inner.offset_by(outer)).pixels))

    def test_median_blur(self):
        from beam_tracker.imaging import Frame, median_blur
        salt = np.zeros((5, 5), dtype=np.uint8)
        salt[2, 2] = 255
        self.assertFalse(median_blur(Frame(salt)).pixels.any())

        constant = Frame(np.full((4, 6), 42))
        self.assertTrue((median_blur(constant).pixels == 42).all())
        self.assertIs(median_blur(constant, 1), constant)

        # even sized neighborhoods average the two middle values, half up
        self.assertEqual(median_blur(Frame(np.array([[10, 21]]))).pixels.tolist(),
                         [[16, 16]])

    def test_median_blur_matches_brute_force(self):
        from beam_tracker.imaging import Frame, median_blur
        rng = np.random.default_rng(11)
        for _ in range(20):
            h, w = rng.integers(1, 9, size=2)
            pixels = rng.integers(0, 256, size=(h, w)).astype(np.uint8)
            for window in (3, 5):
                self.assertTrue(np.array_equal(
                    median_blur(Frame(pixels), window).pixels,
                    _brute_force_median(pixels, window)))

    def test_median_blur_keeps_wide_bands(self):
        from beam_tracker.imaging import Frame, median_blur
        rng = np.random.default_rng(3)
        for window in (3, 5):
            for _ in range(10):
                widths = rng.integers(window, window + 4, size=6)
                levels = rng.choice([0, 255], size=6)
                bands = np.repeat(levels, widths).astype(np.uint8)
                for pixels in (np.tile(bands[:, None], (1, 9)),
                               np.tile(bands[None, :], (9, 1))):
                    blurred = median_blur(Frame(pixels), window)
                    self.assertTrue(np.array_equal(blurred.pixels, pixels))
                    self.assertTrue(np.array_equal(
                        median_blur(blurred, window).pixels, blurred.pixels))

    def test_median_blur_bad_window(self):
        from beam_tracker.imaging import Frame, median_blur
        frame = Frame(np.zeros((3, 3)))
        for window in (0, 2, 4, -3):
            with self.assertRaises(ValueError):
                median_blur(frame, window)

    def test_otsu_two_levels(self):
        from beam_tracker.imaging import Frame, otsu_threshold
        pixels = np.zeros((4, 4), dtype=np.uint8)
        pixels[:2] = 200
        # every t in 1..200 splits the two levels perfectly
        self.assertEqual(otsu_threshold(Frame(pixels)), 1)

    def test_otsu_degenerate(self):
        from beam_tracker.exceptions import DegenerateImageError
        from beam_tracker.imaging import Frame, otsu_threshold
        with self.assertRaises(DegenerateImageError):
            otsu_threshold(Frame(np.full((3, 3), 17)))
        self.assertIsInstance(DegenerateImageError(), ValueError)

    def test_otsu_matches_brute_force(self):
        from beam_tracker.imaging import Frame, otsu_threshold
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 500:
            if checked % 2:
                pixels = rng.integers(0, 256, size=(16, 16))
            else:
                # few levels, plenty of exact ties
                pixels = rng.integers(0, 4, size=(16, 16)) * 60 + rng.integers(0, 3)
            pixels = pixels.astype(np.uint8)
            if np.unique(pixels).size < 2:
                continue
            self.assertEqual(otsu_threshold(Frame(pixels)), _brute_force_otsu(pixels))
            checked += 1

    def test_binarize(self):
        from beam_tracker.imaging import Frame, binarize
        frame = Frame(np.array([[0, 99, 100, 255]]))
        self.assertEqual(binarize(frame, 100).bits.tolist(),
                         [[False, False, True, True]])
        for t in (0, 256):
            with self.assertRaises(ValueError):
                binarize(frame, t)


class TestDenoise(unittest.TestCase):
    def test_config_validation(self):
        from beam_tracker.imaging import DenoiseConfig
        self.assertEqual(DenoiseConfig().normalizer, 21)
        with self.assertRaises(ValueError):
            DenoiseConfig(kernel_rows=6)
        with self.assertRaises(ValueError):
            DenoiseConfig(kernel_cols=0)
        with self.assertRaises(ValueError):
            DenoiseConfig(mask_threshold=256)

    def test_kernel_sums_linear(self):
        from beam_tracker.imaging import DenoiseConfig, Frame, kernel_sums
        rng = np.random.default_rng(5)
        cfg = DenoiseConfig()
        a = rng.integers(0, 128, size=(20, 12))
        b = rng.integers(0, 128, size=(20, 12))
        self.assertTrue(np.array_equal(
            kernel_sums(Frame(a + b), cfg),
            kernel_sums(Frame(a), cfg) + kernel_sums(Frame(b), cfg)))

    def test_neighborhood_sum_single_pixel(self):
        from beam_tracker.imaging import Frame, neighborhood_sum
        pixels = np.zeros((9, 9), dtype=np.uint8)
        pixels[4, 4] = 210
        out = neighborhood_sum(Frame(pixels)).pixels
        expected = np.zeros((9, 9), dtype=np.uint8)
        expected[1:8, 3:6] = 10
        self.assertTrue(np.array_equal(out, expected))

    def test_denoise_mask(self):
        from beam_tracker.imaging import Frame, denoise_mask
        pixels = np.zeros((15, 9), dtype=np.uint8)
        pixels[2, 1] = 210           # isolated speck
        pixels[4:11, 5] = 210        # seven pixel vertical segment
        out = denoise_mask(Frame(pixels)).pixels
        self.assertEqual(out[2, 1], 0)
        self.assertEqual(out[7, 5], 210)
        # masking only ever zeroes pixels
        self.assertTrue(((out == 0) | (out == pixels)).all())

    def test_kernel_larger_than_frame(self):
        from beam_tracker.exceptions import FrameError
        from beam_tracker.imaging import Frame, neighborhood_sum
        with self.assertRaises(FrameError):
            neighborhood_sum(Frame(np.zeros((5, 9))))
