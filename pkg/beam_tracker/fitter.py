"""Gauss-Newton regression of the post-buckling shape

    x = c1 sin(k y) + c2 cos(k y) + c3,    k = 2 pi / L

where y is the row measured from the top clamp and x the column offset
from the central line. k is fixed by the clamp distance L and is not a
fit parameter.
"""
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from ovos_utils.log import LOG
from scipy.linalg import solve_triangular

from beam_tracker.exceptions import InsufficientDataError, SingularSystemError
from beam_tracker.locator import CentralLine
from beam_tracker.tracker import TrackPoint

SOLVERS = ("qr", "inverse")


@dataclass(frozen=True)
class BeamFit:
    c1: float
    c2: float
    c3: float
    k: float
    line: CentralLine
    converged: bool = True
    iterations: int = 0
    residual_rms: float = 0.0

    @classmethod
    def for_line(cls, line: CentralLine, c1: float = 0.0, c2: float = 0.0,
                 c3: float = 0.0, **kwargs) -> "BeamFit":
        return cls(c1=c1, c2=c2, c3=c3, k=wavenumber(line), line=line, **kwargs)

    @property
    def coefficients(self) -> Tuple[float, float, float]:
        return self.c1, self.c2, self.c3

    def offset(self, y):
        """ column offset from the central line at line-relative row `y` """
        ky = self.k * np.asarray(y, dtype=np.float64)
        return self.c1 * np.sin(ky) + self.c2 * np.cos(ky) + self.c3


@dataclass(frozen=True, eq=False)
class GaussNewtonState:
    D: np.ndarray        # residuals x_i - f(y_i) at the current parameters
    Z: np.ndarray        # n x 3 Jacobian, rows [sin(ky), cos(ky), 1]
    delta_C: np.ndarray  # parameter update
    E: np.ndarray        # what the update leaves unexplained, D - Z delta_C


def wavenumber(line: CentralLine) -> float:
    return 2.0 * math.pi / line.length_px


def model_eval(fit: BeamFit, y):
    """ absolute column of the fitted beam at image row `y` """
    return fit.line.col_at(y) + fit.offset(np.asarray(y, dtype=np.float64) - fit.line.top[0])


def _design(points: Sequence[TrackPoint], line: CentralLine, k: float):
    rows = np.array([p.row for p in points], dtype=np.float64)
    cols = np.array([p.col for p in points], dtype=np.float64)
    y = rows - line.top[0]
    x = cols - line.col_at(rows)
    Z = np.column_stack([np.sin(k * y), np.cos(k * y), np.ones_like(y)])
    return Z, x


def gauss_newton_step(Z: np.ndarray, x: np.ndarray, c: np.ndarray,
                      solver: str = "qr", qr=None) -> GaussNewtonState:
    """
    One linearized least squares update
    @param Z: Jacobian of the model
    @param x: observed offsets
    @param c: current coefficients
    @param solver: "qr" (orthogonal decomposition) or "inverse" ((Z^T Z)^-1 Z^T D)
    @param qr: optional precomputed (Q, R) of Z
    """
    D = x - Z @ c
    if solver == "qr":
        Q, R = qr if qr is not None else np.linalg.qr(Z)
        delta = solve_triangular(R, Q.T @ D)
    elif solver == "inverse":
        delta = np.linalg.inv(Z.T @ Z) @ (Z.T @ D)
    else:
        raise ValueError(f"unknown solver {solver!r}, expected one of {SOLVERS}")
    return GaussNewtonState(D=D, Z=Z, delta_C=delta, E=D - Z @ delta)


def gauss_newton_fit(points: Sequence[TrackPoint], line: CentralLine,
                     max_iter: int = 20, tol: float = 1e-8,
                     solver: str = "qr") -> BeamFit:
    """
    Fit c1, c2, c3 to the points, starting from zero.

    `iterations` counts applied updates; the loop stops as soon as the next
    update would move every coefficient by less than `tol`, or after
    `max_iter` updates.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if len(points) < 3:
        raise InsufficientDataError(f"need at least 3 points to fit, got {len(points)}")
    k = wavenumber(line)
    Z, x = _design(points, line, k)
    if np.linalg.matrix_rank(Z) < 3:
        raise SingularSystemError("points do not determine all three coefficients")
    qr = np.linalg.qr(Z) if solver == "qr" else None

    c = np.zeros(3)
    iterations, converged = 0, False
    while True:
        state = gauss_newton_step(Z, x, c, solver, qr)
        if np.max(np.abs(state.delta_C)) < tol:
            converged = True
            break
        if iterations >= max_iter:
            break
        c = c + state.delta_C
        iterations += 1

    rms = float(np.sqrt(np.mean((x - Z @ c) ** 2)))
    if not converged:
        LOG.warning(f"Gauss-Newton stopped after {iterations} iterations "
                    f"without converging")
    return BeamFit(c1=float(c[0]), c2=float(c[1]), c3=float(c[2]), k=k,
                   line=line, converged=converged, iterations=iterations,
                   residual_rms=rms)


def residual_rms(fit: BeamFit, points: Sequence[TrackPoint]) -> float:
    """ root mean square of x_i - f(y_i), in pixels """
    if not len(points):
        raise InsufficientDataError("no points to measure residuals on")
    rows = np.array([p.row for p in points], dtype=np.float64)
    cols = np.array([p.col for p in points], dtype=np.float64)
    return float(np.sqrt(np.mean((cols - model_eval(fit, rows)) ** 2)))
