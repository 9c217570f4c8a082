"""
base classes for pipeline stage plugins, a third party denoiser or fitter
subclasses one of these and registers it under the matching entry point
"""
from beam_tracker.templates.denoise import (FrameDenoiser,
                                            NeighborhoodMaskDenoiser,
                                            PassthroughDenoiser)
from beam_tracker.templates.fitter import CurveFitter, GaussNewtonFitter
