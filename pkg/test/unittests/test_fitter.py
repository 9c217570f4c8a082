import itertools
import math
import unittest

import numpy as np


def _line(length=350.0, col=50.0):
    from beam_tracker.locator import CentralLine
    return CentralLine((0.0, col), (length, col))


def _samples(c, line, rows=None, noise=None):
    """ TrackPoints on x = c1 sin(ky) + c2 cos(ky) + c3 around the line """
    from beam_tracker.fitter import BeamFit, model_eval
    from beam_tracker.tracker import TrackPoint
    rows = np.arange(0, 350) if rows is None else np.asarray(rows)
    cols = model_eval(BeamFit.for_line(line, *c), rows)
    if noise is not None:
        cols = cols + noise
    return [TrackPoint(row=int(r), col=float(x), intensity=200)
            for r, x in zip(rows, cols)]


class TestModel(unittest.TestCase):
    def test_wavenumber(self):
        from beam_tracker.fitter import wavenumber
        self.assertAlmostEqual(wavenumber(_line()), 2 * math.pi / 350)

    def test_model_eval(self):
        from beam_tracker.fitter import BeamFit, model_eval
        line = _line()
        rows = np.arange(0, 351, 25)
        self.assertTrue(np.allclose(model_eval(BeamFit.for_line(line), rows), 50.0))
        self.assertTrue(np.allclose(model_eval(BeamFit.for_line(line, c3=5), rows), 55.0))
        quarter = model_eval(BeamFit.for_line(line, c1=1), 350 / 4)
        self.assertAlmostEqual(float(quarter) - 50.0, 1.0)

    def test_model_eval_relative_to_top(self):
        from beam_tracker.fitter import BeamFit, model_eval
        from beam_tracker.locator import CentralLine
        line = CentralLine((100.0, 20.0), (450.0, 20.0))
        fit = BeamFit.for_line(line, c2=3)
        self.assertAlmostEqual(float(model_eval(fit, 100.0)), 23.0)
        self.assertAlmostEqual(float(model_eval(fit, 275.0)), 17.0)


class TestGaussNewton(unittest.TestCase):
    def test_noiseless_recovery_in_one_iteration(self):
        from beam_tracker.fitter import gauss_newton_fit
        line = _line()
        fit = gauss_newton_fit(_samples((5.0, 2.0, 40.0), line), line)
        self.assertTrue(fit.converged)
        self.assertEqual(fit.iterations, 1)
        for got, want in zip(fit.coefficients, (5.0, 2.0, 40.0)):
            self.assertLess(abs(got - want), 1e-6)
        self.assertLess(fit.residual_rms, 1e-9)
        self.assertAlmostEqual(fit.k, 2 * math.pi / 350)

    def test_random_coefficients(self):
        from beam_tracker.fitter import gauss_newton_fit
        rng = np.random.default_rng(1)
        line = _line()
        rows = np.arange(0, 350, 7)
        for c in rng.uniform(-50, 50, size=(1000, 3)):
            fit = gauss_newton_fit(_samples(c, line, rows), line)
            self.assertTrue(fit.converged)
            self.assertEqual(fit.iterations, 1)
            self.assertTrue(np.allclose(fit.coefficients, c, atol=1e-6))

    def test_zero_offsets(self):
        from beam_tracker.fitter import gauss_newton_fit
        line = _line()
        fit = gauss_newton_fit(_samples((0, 0, 0), line), line)
        self.assertEqual(fit.coefficients, (0.0, 0.0, 0.0))
        self.assertEqual(fit.iterations, 0)
        self.assertTrue(fit.converged)
        self.assertEqual(fit.residual_rms, 0.0)

    def test_stationarity(self):
        from beam_tracker.fitter import _design, gauss_newton_fit
        rng = np.random.default_rng(9)
        line = _line()
        points = _samples((3, -4, 10), line, noise=rng.normal(0, 2, 350))
        fit = gauss_newton_fit(points, line)
        Z, x = _design(points, line, fit.k)
        gradient = Z.T @ (x - Z @ np.array(fit.coefficients))
        self.assertLess(np.max(np.abs(gradient)), 1e-6)

    def test_qr_and_inverse_agree(self):
        from beam_tracker.fitter import gauss_newton_fit
        rng = np.random.default_rng(4)
        line = _line()
        points = _samples((1, 2, 3), line, noise=rng.normal(0, 1, 350))
        qr = gauss_newton_fit(points, line, solver="qr")
        inv = gauss_newton_fit(points, line, solver="inverse")
        self.assertTrue(np.allclose(qr.coefficients, inv.coefficients, atol=1e-8))
        with self.assertRaises(ValueError):
            gauss_newton_fit(points, line, solver="cholesky")

    def test_grid_search_oracle(self):
        from beam_tracker.fitter import gauss_newton_fit, residual_rms
        rng = np.random.default_rng(21)
        line = _line(length=40.0)
        lattice = np.linspace(-6, 6, 13)
        for _ in range(10):
            rows = np.sort(rng.choice(41, size=8, replace=False))
            c = rng.uniform(-5, 5, size=3)
            points = _samples(c, line, rows, noise=rng.normal(0, 0.5, 8))
            fit = gauss_newton_fit(points, line)
            best = min(residual_rms(fit.__class__.for_line(line, *g), points)
                       for g in itertools.product(lattice, repeat=3))
            self.assertLessEqual(fit.residual_rms, best + 1e-12)
            self.assertAlmostEqual(residual_rms(fit, points), fit.residual_rms)

    def test_translation_equivariance(self):
        from beam_tracker.fitter import gauss_newton_fit
        from beam_tracker.locator import CentralLine
        rng = np.random.default_rng(8)
        noise = rng.normal(0, 1, 350)
        line = _line()
        shifted = CentralLine((75.0, 50.0), (425.0, 50.0))
        a = gauss_newton_fit(_samples((2, 1, 4), line, noise=noise), line)
        b = gauss_newton_fit(_samples((2, 1, 4), shifted, np.arange(75, 425),
                                      noise=noise), shifted)
        self.assertTrue(np.allclose(a.coefficients, b.coefficients, atol=1e-9))

    def test_errors(self):
        from beam_tracker.exceptions import InsufficientDataError, SingularSystemError
        from beam_tracker.fitter import gauss_newton_fit
        from beam_tracker.tracker import TrackPoint
        line = _line()
        with self.assertRaises(InsufficientDataError):
            gauss_newton_fit(_samples((1, 1, 1), line, [0, 10]), line)
        same_row = [TrackPoint(row=5, col=50 + i, intensity=1) for i in range(5)]
        with self.assertRaises(SingularSystemError):
            gauss_newton_fit(same_row, line)
        with self.assertRaises(ValueError):
            gauss_newton_fit(_samples((1, 1, 1), line), line, max_iter=0)

    def test_not_converged(self):
        from beam_tracker.fitter import gauss_newton_fit
        line = _line()
        fit = gauss_newton_fit(_samples((5, 2, 40), line), line, max_iter=1, tol=0.0)
        self.assertFalse(fit.converged)
        self.assertEqual(fit.iterations, 1)

    def test_state(self):
        from beam_tracker.fitter import _design, gauss_newton_step, wavenumber
        line = _line()
        points = _samples((5, 2, 40), line)
        Z, x = _design(points, line, wavenumber(line))
        state = gauss_newton_step(Z, x, np.zeros(3))
        self.assertEqual(state.D.shape, (350,))
        self.assertEqual(state.Z.shape, (350, 3))
        self.assertTrue(np.allclose(state.delta_C, [5, 2, 40]))
        self.assertLess(np.max(np.abs(state.E)), 1e-9)


class TestResidual(unittest.TestCase):
    def test_residual_rms(self):
        from beam_tracker.exceptions import InsufficientDataError
        from beam_tracker.fitter import BeamFit, residual_rms
        from beam_tracker.tracker import TrackPoint
        line = _line()
        fit = BeamFit.for_line(line)
        self.assertEqual(residual_rms(fit, [TrackPoint(10, 53.0, 1)]), 3.0)
        self.assertEqual(residual_rms(fit, _samples((0, 0, 0), line)), 0.0)
        points = [TrackPoint(r, 50.0 + d, 1) for r, d in ((0, 1), (5, -2), (9, 2))]
        self.assertAlmostEqual(residual_rms(fit, points), math.sqrt(3.0))
        with self.assertRaises(InsufficientDataError):
            residual_rms(fit, [])
