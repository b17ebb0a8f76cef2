"""
Environment-driven settings for restricted_proj
"""

import os
import logging
from typing import Optional

from dotenv import load_dotenv

from .models import Settings

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_ROOT = "runs"


def get_settings(load_env_file: bool = True) -> Settings:
    """
    Resolve package settings from the environment.

    Args:
        load_env_file (bool): Whether to read a .env file from the current
            directory first. Variables already set in the environment win.

    Returns:
        Settings: The resolved settings
    """
    if load_env_file:
        try:
            load_dotenv()
        except Exception as e:
            logger.warning(f"Could not load .env file: {e}")

    output_root = os.getenv("RPROJ_OUTPUT_ROOT", DEFAULT_OUTPUT_ROOT)
    log_level = os.getenv("RPROJ_LOG_LEVEL", "INFO").upper()

    workers = _parse_workers(os.getenv("RPROJ_WORKERS"))

    return Settings(output_root=output_root, workers=workers, log_level=log_level)


def _parse_workers(raw: Optional[str]) -> int:
    default = os.cpu_count() or 1
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer RPROJ_WORKERS={raw!r}")
        return default
    if value < 1:
        logger.warning(f"Ignoring RPROJ_WORKERS={value}; must be at least 1")
        return default
    return value
