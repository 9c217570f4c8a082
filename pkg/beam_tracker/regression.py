from ovos_utils.log import LOG

from beam_tracker.templates.fitter import CurveFitter, GaussNewtonFitter
from beam_tracker.utils import StageTypes


def find_fitter_plugins() -> dict:
    """
    Find all installed fitter plugins
    @return: dict plugin names to entrypoints
    """
    from beam_tracker.utils import find_plugins
    return find_plugins(StageTypes.FITTER)


def load_fitter_plugin(module_name: str) -> type(CurveFitter):
    """
    Get an uninstantiated class for the requested module_name
    @param module_name: Plugin entrypoint name to load
    @return: Uninstantiated class
    """
    from beam_tracker.utils import load_plugin
    return load_plugin(module_name, StageTypes.FITTER)


def get_fitter_config(config: dict = None) -> dict:
    """
    Get relevant configuration for factory methods
    @param config: pipeline configuration OR fitter-specific configuration
    @return: fitter-specific configuration
    """
    from beam_tracker.utils.config import get_stage_config
    return get_stage_config(config, "fitter")


class BeamFitterFactory:
    """ returns the curve fitter selected in the pipeline configuration """
    MAPPINGS = {
        "gn": "gauss-newton"
    }
    BUILTINS = {
        "gauss-newton": GaussNewtonFitter
    }

    @staticmethod
    def get_class(config=None):
        """Factory method to get a fitter class based on configuration.

        "fitter": {
            "module": <engine_name>
        }
        """
        config = get_fitter_config(config)
        module = config.get("module") or "gauss-newton"
        module = BeamFitterFactory.MAPPINGS.get(module, module)
        clazz = BeamFitterFactory.BUILTINS.get(module) or \
            load_fitter_plugin(module)
        if clazz is None:
            raise ValueError(f"fitter module {module!r} is not installed")
        return clazz

    @staticmethod
    def create(config=None):
        """Factory method to create a fitter based on configuration."""
        fitter_config = get_fitter_config(config)
        plugin = fitter_config.get("module")
        try:
            clazz = BeamFitterFactory.get_class(fitter_config)
            return clazz(fitter_config)
        except Exception:
            LOG.exception(f'Fitter plugin {plugin} could not be loaded!')
            raise
