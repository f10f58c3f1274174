import os
from pathlib import Path
from typing import List

from dotenv import load_dotenv


def load_environment():
    """Load environment variables from .env file"""
    load_dotenv()


def get_env_variable(key: str, default: str = None) -> str:
    """Get environment variable value"""
    value = os.getenv(key, default)
    if value is None:
        raise ValueError(f"Environment variable {key} is not set")
    return value


def get_cache_dir() -> Path:
    """Get the directory for binary label, CDH and selector caches"""
    return Path(get_env_variable("LANDMARK_CACHE_DIR", ".landmark_cache"))


def get_results_dir() -> Path:
    """Get the default output directory for CSV artifacts"""
    return Path(os.getenv("RESULTS_DIR", "results"))


def parse_int_list(text: str) -> List[int]:
    """Parse a comma separated list of integers"""
    return [int(part) for part in text.split(",") if part.strip()]


def get_seeds() -> List[int]:
    """Get the experiment seeds"""
    return parse_int_list(os.getenv("DEFAULT_SEEDS", "42,123,456,789,1024"))


def get_max_workers() -> int:
    """Get the default number of parallel cell jobs"""
    return int(os.getenv("MAX_WORKERS", "1"))


def get_log_level() -> str:
    """Get logging level"""
    return os.getenv("LOG_LEVEL", "INFO")
