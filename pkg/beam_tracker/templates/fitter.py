from abc import abstractmethod
from typing import Sequence

from beam_tracker.fitter import BeamFit, gauss_newton_fit
from beam_tracker.locator import CentralLine
from beam_tracker.tracker import TrackPoint


class CurveFitter:
    """Fits the beam shape to the points that survived filtering."""

    def __init__(self, config=None):
        self.config = config or {}

    @abstractmethod
    def fit(self, points: Sequence[TrackPoint], line: CentralLine) -> BeamFit:
        """
        @param points: active track points, cropped frame coordinates
        @param line: central line of the same frame
        @return: BeamFit, converged or not
        """


class GaussNewtonFitter(CurveFitter):
    def __init__(self, config=None):
        super().__init__(config)
        self.tol = float(self.config.get("gn_tol", 1e-8))
        self.max_iter = int(self.config.get("gn_max_iter", 20))
        self.solver = self.config.get("solver", "qr")

    def fit(self, points: Sequence[TrackPoint], line: CentralLine) -> BeamFit:
        return gauss_newton_fit(points, line, max_iter=self.max_iter,
                                tol=self.tol, solver=self.solver)
