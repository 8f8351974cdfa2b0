from dotenv import load_dotenv
import json
import logging
import os
from typing import Any, Dict, Optional

from config.tolerances import DEFAULT_POINTS, DEFAULT_SEED
from utils.errors import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)

ENV_PREFIX = 'TWOBODY_'


def parse_seed(value: Any) -> int:
    """Accept seeds as ints or as strings in decimal or 0x-prefixed hex."""
    if isinstance(value, int):
        return value
    try:
        return int(str(value), 0)
    except ValueError:
        raise ConfigError(f"Invalid seed: {value!r}")


def _env(name: str, default: Optional[str] = None) -> Optional[str]:
    return os.getenv(ENV_PREFIX + name, default)


SEED = parse_seed(_env('SEED', hex(DEFAULT_SEED)))
POINTS = int(_env('POINTS', str(DEFAULT_POINTS)))
ARCHIVE_URL = _env('ARCHIVE_URL')
LOG_LEVEL = _env('LOG_LEVEL', 'INFO')
CSV_DIR = _env('CSV_DIR')

SUITE_CONFIG_KEYS = {'seed', 'points', 'tolerance', 'params', 'interaction', 'evolve'}


def load_json_file(path: str) -> Dict[str, Any]:
    """Read a JSON document, turning IO and parse failures into ConfigError."""
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Error reading config {path}: {str(e)}")
        raise ConfigError(f"Unreadable config file {path}: {e}")


def load_suite_config(path: Optional[str] = None) -> Dict[str, Any]:
    """Load a suite config file and layer the environment settings over it.

    Precedence is CLI flag > environment > file > defaults; the CLI layer is
    applied by the caller.
    """
    config: Dict[str, Any] = {}
    if path:
        config = load_json_file(path)
        if not isinstance(config, dict):
            raise ConfigError(f"Config {path} must contain a JSON object")
        unknown = set(config) - SUITE_CONFIG_KEYS
        if unknown:
            raise ConfigError(f"Unknown config keys: {sorted(unknown)}")

    if _env('SEED'):
        config['seed'] = parse_seed(_env('SEED'))
    else:
        config['seed'] = parse_seed(config.get('seed', DEFAULT_SEED))
    if _env('POINTS'):
        config['points'] = int(_env('POINTS'))
    else:
        config['points'] = int(config.get('points', DEFAULT_POINTS))
    if _env('TOL'):
        config['tolerance'] = float(_env('TOL'))
    config.setdefault('tolerance', None)
    config.setdefault('params', {})
    config.setdefault('interaction', {})
    config.setdefault('evolve', {})
    return config
