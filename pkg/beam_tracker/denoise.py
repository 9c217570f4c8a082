from ovos_utils.log import LOG

from beam_tracker.templates.denoise import (FrameDenoiser,
                                            NeighborhoodMaskDenoiser,
                                            PassthroughDenoiser)
from beam_tracker.utils import StageTypes


def find_denoise_plugins() -> dict:
    """
    Find all installed denoise plugins
    @return: dict plugin names to entrypoints
    """
    from beam_tracker.utils import find_plugins
    return find_plugins(StageTypes.DENOISE)


def load_denoise_plugin(module_name: str) -> type(FrameDenoiser):
    """
    Get an uninstantiated class for the requested module_name
    @param module_name: Plugin entrypoint name to load
    @return: Uninstantiated class
    """
    from beam_tracker.utils import load_plugin
    return load_plugin(module_name, StageTypes.DENOISE)


def get_denoise_config(config: dict = None) -> dict:
    """
    Get relevant configuration for factory methods
    @param config: pipeline configuration OR denoiser-specific configuration
    @return: denoiser-specific configuration
    """
    from beam_tracker.utils.config import get_stage_config
    return get_stage_config(config, "denoise")


class BeamDenoiserFactory:
    """ returns the denoiser selected in the pipeline configuration """
    MAPPINGS = {
        "mask": "neighborhood-mask",
        "passthrough": "none"
    }
    BUILTINS = {
        "neighborhood-mask": NeighborhoodMaskDenoiser,
        "none": PassthroughDenoiser
    }

    @staticmethod
    def get_class(config=None):
        """Factory method to get a denoiser class based on configuration.

        The pipeline configuration contains a ``denoise`` section with the
        name of the denoiser to be read by this method.

        "denoise": {
            "module": <engine_name>
        }
        """
        config = get_denoise_config(config)
        module = config.get("module") or "neighborhood-mask"
        module = BeamDenoiserFactory.MAPPINGS.get(module, module)
        clazz = BeamDenoiserFactory.BUILTINS.get(module) or \
            load_denoise_plugin(module)
        if clazz is None:
            raise ValueError(f"denoise module {module!r} is not installed")
        return clazz

    @staticmethod
    def create(config=None):
        """Factory method to create a denoiser based on configuration."""
        denoise_config = get_denoise_config(config)
        plugin = denoise_config.get("module")
        try:
            clazz = BeamDenoiserFactory.get_class(denoise_config)
            return clazz(denoise_config)
        except Exception:
            LOG.exception(f'Denoise plugin {plugin} could not be loaded!')
            raise
