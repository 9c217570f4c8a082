"""Entry point discovery for third party pipeline stages."""
from enum import Enum
from typing import Dict, Iterator, Optional

from ovos_utils.log import LOG


class StageTypes(str, Enum):
    DENOISE = "beam_tracker.plugin.denoise"
    FITTER = "beam_tracker.plugin.fitter"


def find_plugins(stage_type: Optional[StageTypes] = None) -> Dict[str, type]:
    """
    Load every installed stage of one type, or of all types when None.
    A stage that fails to import is skipped and logged once per process.
    @return: entry point name -> loaded stage class
    """
    groups = [stage_type] if stage_type else list(StageTypes)
    stages = {}
    for group in groups:
        for entry_point in _iter_entrypoints(group):
            try:
                stages[entry_point.name] = entry_point.load()
            except Exception as e:
                if entry_point not in find_plugins._errored:
                    find_plugins._errored.append(entry_point)
                    LOG.error(f"cannot load stage {entry_point}: {e}")
                continue
            LOG.debug(f"found {group} stage {entry_point.name}")
    return stages


find_plugins._errored = []


def _iter_entrypoints(group: str) -> Iterator:
    try:
        from importlib_metadata import entry_points
    except ImportError:
        import pkg_resources
        yield from pkg_resources.iter_entry_points(group)
        return
    yield from entry_points(group=group)


def load_plugin(name: str, stage_type: Optional[StageTypes] = None):
    """ the stage class registered as `name`, None when nothing is """
    stages = find_plugins(stage_type)
    if name not in stages:
        LOG.warning(f"no {stage_type or 'pipeline'} stage named {name!r}")
        return None
    return stages[name]
