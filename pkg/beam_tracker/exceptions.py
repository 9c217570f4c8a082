class BeamTrackerError(Exception):
    """ base class for every error raised by beam_tracker """


class FrameError(BeamTrackerError, ValueError):
    """ frame has an unsupported layout, or a region falls outside it """


class DegenerateImageError(BeamTrackerError, ValueError):
    """ image has no intensity variation to split on """


class LocateError(BeamTrackerError, RuntimeError):
    """ could not find the two clamp regions of the beam """


class InsufficientDataError(BeamTrackerError, ValueError):
    """ too few points or samples for the requested computation """


class SingularSystemError(BeamTrackerError, RuntimeError):
    """ normal equations are rank deficient """


class NotConvergedError(BeamTrackerError, RuntimeError):
    """ fit did not converge and cannot be used for measurement """


class MissingScaleError(BeamTrackerError, ValueError):
    """ pixel to nanometer scale is not known """


class ConfigError(BeamTrackerError, ValueError):
    """ pipeline configuration is invalid """


class SceneError(BeamTrackerError, ValueError):
    """ synthetic scene description is invalid """
