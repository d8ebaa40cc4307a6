import json
import os
from typing import Any, Dict, Optional

from pydantic import ValidationError

from core.errors import ConfigError
from core.models import RunConfig

DEFAULT_CONFIG_PATH = "config/config.json"
DEFAULT_PROFILES_PATH = "config/profiles.json"


class ConfigManager:
    """Manages loading and accessing configuration settings and dataset profiles."""

    _config: Dict[str, Any] = {}
    _profiles: Dict[str, Any] = {}
    _initialized: bool = False

    @classmethod
    def initialize(cls, config_path: Optional[str] = None, profiles_path: Optional[str] = None) -> None:
        """
        Initialize the config manager by loading the configuration and profile files.

        Args:
            config_path: Path to the config JSON file (default: $NEXT_CONFIG_PATH or config/config.json)
            profiles_path: Path to the profiles JSON file (default: $NEXT_PROFILES_PATH or config/profiles.json)
        """
        if cls._initialized:
            return

        config_path = config_path or os.getenv("NEXT_CONFIG_PATH", DEFAULT_CONFIG_PATH)
        profiles_path = profiles_path or os.getenv("NEXT_PROFILES_PATH", DEFAULT_PROFILES_PATH)

        cls._config = cls._load(config_path, "Configuration")
        cls._profiles = cls._load(profiles_path, "Profiles")
        cls._initialized = True

    @classmethod
    def reset(cls) -> None:
        cls._config, cls._profiles, cls._initialized = {}, {}, False

    @staticmethod
    def _load(path: str, what: str) -> Dict[str, Any]:
        if not os.path.exists(path):
            raise ConfigError(f"{what} file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            try:
                return json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{what} file {path} is not valid JSON: {e}") from e

    @classmethod
    def get_config(cls, section: Optional[str] = None) -> Dict[str, Any]:
        """
        Get configuration settings.

        Args:
            section: Optional section name to retrieve specific settings

        Returns:
            Dictionary containing the requested configuration
        """
        if not cls._initialized:
            cls.initialize()

        if section is None:
            return cls._config

        if section not in cls._config:
            raise ConfigError(f"Configuration section not found: {section}")

        return cls._config[section]

    @classmethod
    def get_profile(cls, name: str) -> Dict[str, Any]:
        """
        Get a per-dataset hyperparameter profile.

        Args:
            name: Profile name (tacred, semeval, restaurant, laptop)

        Returns:
            Dictionary of config sections (soft, matcher, pretrain, train, parser)
        """
        if not cls._initialized:
            cls.initialize()

        if name not in cls._profiles:
            raise ConfigError(f"Profile not found: {name} (available: {', '.join(sorted(cls._profiles))})")

        return cls._profiles[name]

    @classmethod
    def build_run_config(cls, raw: Dict[str, Any]) -> RunConfig:
        """
        Merge a `train` config file over defaults and its named profile.

        Args:
            raw: Parsed run config; any section key overrides the profile's value

        Returns:
            Validated run configuration
        """
        if raw.get("version", 1) != 1:
            raise ConfigError(f"unsupported run config version: {raw.get('version')}")
        merged: Dict[str, Any] = {}
        defaults = cls.get_config("defaults")
        profile = cls.get_profile(raw.get("profile", "tacred"))
        for section in ("soft", "matcher", "pretrain", "train", "parser"):
            merged[section] = {**defaults.get(section, {}), **profile.get(section, {}), **raw.get(section, {})}
        for key in ("version", "profile", "none_label", "paths"):
            if key in raw:
                merged[key] = raw[key]
        unknown = set(raw) - set(merged)
        if unknown:
            raise ConfigError(f"unknown run config key(s): {sorted(unknown)}")
        try:
            return RunConfig(**merged)
        except ValidationError as e:
            raise ConfigError(f"invalid run config: {e}") from e
