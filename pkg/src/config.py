import configparser
import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import load_dotenv

from src.exceptions import ConfigError

logger = logging.getLogger(__name__)

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "run": {
        "model": "fixed-end-tree:k=4",
        "p": "0.2",
        "lambda": 0.0,
        "h": 0.0,
        "samples": 10000,
        "seed": 12345,
        "threads": 0,
        "slab": "-inf:+inf",
        "out": "runs",
    },
    "budget": {
        "vertices": 100000,
        "height": 64,
    },
    "fit": {
        "n_min": 1,
        "n_max": 8,
        "rel_se_cap": 0.5,
        "margin": 3.0,
        "depth_initial": 2,
        "depth_max": 64,
        "depth_tolerance": 0.25,
        "adaptive_depth": True,
        "k_max": 6,
        "thresholds": "1,10,100,1000",
        "tail_fit_lo": 10,
        "tail_fit_hi": 1000,
    },
    "sweep": {
        "p_tree": "0.20:0.70:0.05",
        "p_lattice": "0.001",
        "truncation_cap": 0.01,
    },
    "trace": {
        "lambdas": "0,0.25,0.5",
        "tolerance": 0.01,
        "p_lo": 0.05,
        "p_hi": 0.95,
    },
    "logging": {
        "level": "INFO",
        "file": "",
    },
    "output": {
        "float_format": "%.17g",
        "manifest": True,
    },
}


def _coerce(raw: str, default: Any, where: str) -> Any:
    """Convert a raw string to the type of the default value"""
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            lowered = raw.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from e
    return raw


class ConfigManager:
    """Layered run configuration: defaults, environment, config file, CLI flags"""

    def __init__(self, config_file: Optional[Union[str, Path]] = None, use_env: bool = True):
        self._config: Dict[str, Dict[str, Any]] = copy.deepcopy(DEFAULTS)
        self.config_file = Path(config_file) if config_file else None
        if use_env:
            load_dotenv()
            self._apply_env()
        if self.config_file is not None:
            self._merge_config(self.parse_file(self.config_file))
            logger.info(f"Loaded configuration from {self.config_file}")

    @staticmethod
    def env_name(section: str, key: str) -> str:
        """Environment variable overriding section.key (run keys drop the section)"""
        if section == "run":
            return f"TILTLAB_{key.upper()}"
        return f"TILTLAB_{section.upper()}_{key.upper()}"

    def _apply_env(self) -> None:
        for section, entries in self._config.items():
            for key, default in entries.items():
                name = self.env_name(section, key)
                if name in os.environ:
                    entries[key] = _coerce(os.environ[name], default, name)
                    logger.debug(f"{section}.{key} taken from {name}")

    def valid_keys(self) -> List[str]:
        return sorted(f"{s}.{k}" for s, entries in DEFAULTS.items() for k in entries)

    def parse_file(self, path: Path) -> Dict[str, Dict[str, Any]]:
        """Parse an INI file with [section] headers; keys before any header belong to run"""
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        parser = configparser.ConfigParser(
            delimiters=("=",), interpolation=None, strict=False, empty_lines_in_values=False
        )
        try:
            # the implicit [run] header shifts every line number by one
            parser.read_string("[run]\n" + path.read_text(), source=str(path))
        except configparser.ParsingError as e:
            lineno, line = e.errors[0]
            raise ConfigError(f"{path}:{lineno - 1}: malformed line: {line}") from e
        except configparser.Error as e:
            raise ConfigError(f"{path}: {e.message}") from e
        parsed: Dict[str, Dict[str, Any]] = {}
        for section in parser.sections():
            if section not in DEFAULTS:
                raise ConfigError(
                    f"{path}: unknown section [{section}]; valid keys: {', '.join(self.valid_keys())}"
                )
            for key, raw in parser[section].items():
                if key not in DEFAULTS[section]:
                    raise ConfigError(
                        f"{path}: unknown key {section}.{key}; valid keys: {', '.join(self.valid_keys())}"
                    )
                where = f"{path}: {section}.{key}"
                parsed.setdefault(section, {})[key] = _coerce(raw, DEFAULTS[section][key], where)
        return parsed

    def _merge_config(self, file_config: Dict[str, Dict[str, Any]]) -> None:
        for section, entries in file_config.items():
            self._config[section].update(entries)

    def apply_overrides(self, overrides: Dict[str, Any]) -> None:
        """Apply dot-separated overrides (CLI flags); None values are ignored"""
        for key, value in overrides.items():
            if value is not None:
                self.set(key, value)

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by dot-separated key"""
        section, _, name = key.partition(".")
        try:
            return self._config[section][name]
        except KeyError:
            return default

    def set(self, key: str, value: Any) -> None:
        """Set configuration value by dot-separated key"""
        section, _, name = key.partition(".")
        if section not in self._config or name not in self._config[section]:
            raise ConfigError(f"unknown key {key}; valid keys: {', '.join(self.valid_keys())}")
        self._config[section][name] = value

    def __getitem__(self, key: str) -> Any:
        return self.get(key)

    def __setitem__(self, key: str, value: Any) -> None:
        self.set(key, value)

    def to_dict(self) -> Dict[str, Any]:
        """Return copy of configuration as dictionary"""
        return copy.deepcopy(self._config)


def load_config(path: Optional[Union[str, Path]] = None, use_env: bool = True) -> ConfigManager:
    """Resolve parameters from defaults, environment and an optional config file"""
    return ConfigManager(path, use_env=use_env)
