"""
Shared utilities: structured logging, exception hierarchy, configuration helpers
"""

from utils.logger import get_logger, StructuredLogger
from utils.exceptions import ReebNetException
from utils.helpers import load_yaml_config, validate_config_schema, ensure_directory, save_json, load_json

__all__ = [
    'get_logger',
    'StructuredLogger',
    'ReebNetException',
    'load_yaml_config',
    'validate_config_schema',
    'ensure_directory',
    'save_json',
    'load_json',
]
