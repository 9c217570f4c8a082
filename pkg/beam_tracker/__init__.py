from beam_tracker.utils import StageTypes
from beam_tracker.version import __version__
from beam_tracker.imaging import Frame, Region
from beam_tracker.pipeline import BeamTracker, FrameResult
from beam_tracker.utils.config import PipelineConfig, load_config
