from copy import deepcopy
from dataclasses import asdict, dataclass, field, fields
from os.path import expanduser, isfile
from typing import Any, Dict, Optional

from ovos_utils.json_helper import merge_dict
from ovos_utils.log import LOG

from beam_tracker.exceptions import ConfigError
from beam_tracker.imaging import Region

_TRUE = ("true", "yes", "on")
_FALSE = ("false", "no", "off")


def _coerce(value: str) -> Any:
    text = value.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    lowered = text.lower()
    if lowered in ("", "none", "null"):
        return None
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_config_text(text: str, source: str = "<string>") -> dict:
    """
    Parse flat `key = value` lines into a dict. Lines starting with `#` are
    comments; dotted keys build nested sections, e.g. `denoise.module = none`
    becomes {"denoise": {"module": "none"}}.
    """
    config: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        *sections, leaf = key.split(".")
        node = config
        for section in sections:
            node = node.setdefault(section, {})
            if not isinstance(node, dict):
                raise ConfigError(f"{source}:{lineno}: {section!r} is both a "
                                  f"value and a section")
        node[leaf] = _coerce(value)
    return config


def read_config_file(path: str) -> dict:
    path = expanduser(path)
    if not isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as f:
        return parse_config_text(f.read(), source=path)


@dataclass(frozen=True)
class PipelineConfig:
    """Validated settings of one tracking run."""
    blur_window: int = 3
    min_area_fraction: float = 0.02
    mask_threshold: int = 20
    kernel_rows: int = 7
    kernel_cols: int = 3
    continuity_margin: int = 3
    continuity_doubling: bool = True
    separation_d: float = 10.0
    bend_candidates: int = 41
    gn_tol: float = 1e-8
    gn_max_iter: int = 20
    hysteresis_px: float = 2.0
    fps: float = 10.0
    scale_nm_per_px: Optional[float] = None
    roi: Optional[Region] = None
    relocate_per_frame: bool = False
    workers: int = 1
    overlay: bool = False
    denoise: Dict[str, Any] = field(
        default_factory=lambda: {"module": "neighborhood-mask"})
    fitter: Dict[str, Any] = field(
        default_factory=lambda: {"module": "gauss-newton"})
    colors: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self._check_odd("blur_window")
        self._check_odd("kernel_rows")
        self._check_odd("kernel_cols")
        self._check_range("min_area_fraction", 0.0, 1.0, low_open=True)
        self._check_range("mask_threshold", 0, 255)
        self._check_range("continuity_margin", 1, None)
        self._check_range("separation_d", 0.0, None, low_open=True)
        self._check_range("bend_candidates", 1, None)
        self._check_range("gn_tol", 0.0, None, low_open=True)
        self._check_range("gn_max_iter", 1, None)
        self._check_range("hysteresis_px", 0.0, None)
        self._check_range("fps", 0.0, None, low_open=True)
        self._check_range("workers", 1, None)
        if self.scale_nm_per_px is not None:
            self._check_range("scale_nm_per_px", 0.0, None, low_open=True)
        if self.roi is not None and (self.roi.width < 1 or self.roi.height < 1
                                     or self.roi.col < 0 or self.roi.row < 0):
            raise ConfigError(f"roi must be a non-empty region at non-negative "
                              f"offset, got {self.roi}")
        for section in ("denoise", "fitter"):
            if not getattr(self, section).get("module"):
                raise ConfigError(f"{section}.module must name a stage")

    def _check_odd(self, name: str):
        value = getattr(self, name)
        if value < 1 or value % 2 == 0:
            raise ConfigError(f"{name} must be odd and positive, got {value}")

    def _check_range(self, name: str, low, high, low_open: bool = False):
        value = getattr(self, name)
        if (value <= low if low_open else value < low) or \
                (high is not None and value > high):
            bound = "(" if low_open else "["
            raise ConfigError(f"{name}={value} outside {bound}{low}, "
                              f"{high if high is not None else 'inf'}]")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kwargs = {}
        for name, value in data.items():
            kwargs[name] = _convert(name, value, known[name].default)
        return cls(**kwargs)

    def as_dict(self) -> dict:
        data = asdict(self)
        data["roi"] = str(self.roi) if self.roi is not None else None
        return data


def _convert(name: str, value: Any, default: Any) -> Any:
    try:
        if name == "roi":
            if value is None or isinstance(value, Region):
                return value
            return Region.parse(value)
        if name in ("denoise", "fitter", "colors"):
            if isinstance(value, str) and name != "colors":
                return {"module": value}
            if not isinstance(value, dict):
                raise TypeError(f"expected a section, got {value!r}")
            return dict(value)
        if value is None:
            if name == "scale_nm_per_px":
                return None
            raise TypeError("a value is required")
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError(f"expected true/false, got {value!r}")
            return value
        if isinstance(default, int):
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise TypeError(f"expected an integer, got {value!r}")
            return int(float(value))
        return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value for {name}: {e}")


DEFAULT_CONFIG = PipelineConfig().as_dict()


def load_config(path: Optional[str] = None,
                overrides: Optional[dict] = None) -> PipelineConfig:
    """
    Build the run configuration: defaults <- config file <- overrides
    @param path: optional key = value config file
    @param overrides: values set on the command line, None entries ignored
    @return: validated PipelineConfig
    """
    config = deepcopy(DEFAULT_CONFIG)
    if path:
        config = merge_dict(config, read_config_file(path))
    if overrides:
        config = merge_dict(config, {k: v for k, v in overrides.items()
                                     if v is not None})
    LOG.debug(f"Loaded configuration: {config}")
    return PipelineConfig.from_dict(config)


def get_stage_config(config: Optional[dict] = None, section: str = None,
                     module: Optional[str] = None) -> dict:
    """
    Get a configuration dict for the specified stage plugin. Configuration is
    applied such that:
    - module-specific configurations take priority
    - section-specific configuration is appended (new keys only)
    - top level pipeline values are appended last (new keys only)
    @param config: pipeline configuration dict, defaults to DEFAULT_CONFIG
    @param section: stage section (denoise, fitter)
    @param module: stage plugin to get config for, default reads from config
    @return: configuration for the requested module, including `module`
    """
    config = config or deepcopy(DEFAULT_CONFIG)
    pipeline = config
    config = (config.get(section) or config) if section else config
    module = module or config.get("module")
    if not module:
        return dict(config)
    module_config = dict(config.get(module) or dict())
    module_config.setdefault("module", module)
    for key, val in config.items():
        # configured module name and nested module sections stay out
        if key == "module" or isinstance(val, dict):
            continue
        module_config.setdefault(key, val)
    if section:
        for key, val in pipeline.items():
            if isinstance(val, dict):
                continue
            module_config.setdefault(key, val)
    return module_config
