"""
Helper Utilities for the Reeb network diagnostics toolkit

This module provides configuration loading, JSON persistence and other
small utilities shared by the agents and the orchestrator.
"""

import json
import os
import re
from pathlib import Path
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Union

import jsonschema
import yaml

from utils.exceptions import (
    ConfigurationFileNotFoundError,
    ConfigurationValidationError,
    MissingEnvironmentVariableError,
)
from utils.logger import get_logger

logger = get_logger(__name__)

# ${VAR} or ${VAR:-default}
ENV_PATTERN = re.compile(r'\$\{([A-Za-z_][A-Za-z0-9_]*)(?::-([^}]*))?\}')


def load_yaml_config(config_path: Union[str, Path], substitute_env: bool = True) -> Dict[str, Any]:
    """
    Load YAML configuration file with optional environment variable substitution

    Args:
        config_path: Path to YAML configuration file
        substitute_env: Whether to substitute ${VAR_NAME} with environment variables

    Returns:
        Dictionary containing configuration

    Raises:
        ConfigurationFileNotFoundError: If config file doesn't exist
        ConfigurationValidationError: If YAML is invalid
    """
    config_file = Path(config_path)

    if not config_file.exists():
        raise ConfigurationFileNotFoundError(
            f"Configuration file not found: {config_path}",
            {"path": str(config_path)}
        )

    content = config_file.read_text()

    if substitute_env:
        content = substitute_env_variables(content)

    try:
        config = yaml.safe_load(content) or {}
    except yaml.YAMLError as e:
        raise ConfigurationValidationError(
            f"Invalid YAML in configuration file: {config_path}",
            {"path": str(config_path), "error": str(e)}
        )

    if not isinstance(config, dict):
        raise ConfigurationValidationError(
            f"Configuration root must be a mapping: {config_path}",
            {"path": str(config_path)}
        )

    logger.debug("Loaded configuration", extra={"path": str(config_path)})
    return config


def substitute_env_variables(content: str) -> str:
    """
    Replace ${VAR_NAME} and ${VAR_NAME:-default} patterns with environment values

    Args:
        content: String content with ${VAR_NAME} patterns

    Returns:
        Content with substituted values

    Raises:
        MissingEnvironmentVariableError: If a variable without default is not set
    """
    def replace_var(match):
        var_name, default = match.group(1), match.group(2)
        value = os.getenv(var_name)

        if value is None:
            if default is not None:
                return default
            raise MissingEnvironmentVariableError(
                f"Required environment variable not set: {var_name}",
                {"variable": var_name}
            )

        return value

    return ENV_PATTERN.sub(replace_var, content)


def validate_config_schema(config: Dict[str, Any], schema: Dict[str, Any]) -> bool:
    """
    Validate a configuration mapping against a JSON schema

    Args:
        config: Configuration dictionary
        schema: JSON schema (draft 7)

    Returns:
        True if valid

    Raises:
        ConfigurationValidationError: If validation fails
    """
    try:
        jsonschema.validate(instance=config, schema=schema)
    except jsonschema.ValidationError as e:
        location = ".".join(str(part) for part in e.absolute_path) or "<root>"
        raise ConfigurationValidationError(
            f"Invalid configuration at {location}: {e.message}",
            {"path": location, "error": e.message}
        )
    return True


def merge_dicts(dict1: Dict, dict2: Dict, deep: bool = True) -> Dict:
    """
    Merge two dictionaries

    Args:
        dict1: First dictionary
        dict2: Second dictionary (takes precedence)
        deep: Whether to perform deep merge

    Returns:
        Merged dictionary
    """
    if not deep:
        return {**dict1, **dict2}

    result = dict1.copy()

    for key, value in dict2.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = merge_dicts(result[key], value, deep=True)
        else:
            result[key] = value

    return result


def ensure_directory(path: Union[str, Path]) -> Path:
    """
    Ensure directory exists, create if necessary

    Args:
        path: Directory path

    Returns:
        Path object
    """
    dir_path = Path(path)
    dir_path.mkdir(parents=True, exist_ok=True)
    return dir_path


def save_json(data: Any, filepath: Union[str, Path], pretty: bool = True):
    """
    Save data to JSON file

    Keys keep insertion order so that identical inputs give byte-identical files.
    """
    file_path = Path(filepath)
    file_path.parent.mkdir(parents=True, exist_ok=True)

    with open(file_path, 'w') as f:
        if pretty:
            json.dump(data, f, indent=2)
        else:
            json.dump(data, f)
        f.write("\n")

    logger.debug("Saved JSON", extra={"path": str(file_path)})


def load_json(filepath: Union[str, Path]) -> Any:
    """Load data from JSON file"""
    with open(filepath, 'r') as f:
        data = json.load(f)

    logger.debug("Loaded JSON", extra={"path": str(filepath)})
    return data


def parallel_map(func: Callable[[Any], Any], items: List[Any], workers: int = 1) -> List[Any]:
    """
    Map func over items, in a thread pool when workers > 1

    Results keep the order of items, so output never depends on workers.
    """
    if workers <= 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
