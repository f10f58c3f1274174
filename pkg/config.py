#!/usr/bin/env python3
"""
Configuration file for the landmark heuristic toolkit
Centralizes all configuration settings and provides easy access to them.
"""

import logging
import os
from typing import Any, Dict, List

from rich import box
from rich.console import Console
from rich.table import Table

from utils.config_loader import (get_cache_dir, get_log_level, get_max_workers, get_results_dir, get_seeds,
                                 load_environment, parse_int_list)

logger = logging.getLogger(__name__)


def _coerce(current: Any, value: Any) -> Any:
    """Convert a string override to the type of the setting it replaces"""
    if not isinstance(value, str):
        return value
    if isinstance(current, bool):
        return value.strip().lower() == "true"
    if isinstance(current, list):
        return parse_int_list(value)
    return type(current)(value.strip())


class Config:
    """Configuration class for the landmark heuristic toolkit"""

    def __init__(self):
        """Initialize configuration with default values"""
        self._load_environment()
        self._set_defaults()

    def _load_environment(self):
        """Load environment variables"""
        load_environment()

    def _set_defaults(self):
        """Set default configuration values"""
        # Paths
        self.cache_dir = get_cache_dir()
        self.results_dir = get_results_dir()

        # Logging settings
        self.log_level = get_log_level()
        self.log_file = os.getenv("LOG_FILE", "")

        # Experiment settings
        self.seeds = get_seeds()
        self.graph_seed = int(os.getenv("GRAPH_SEED", "42"))
        self.max_workers = get_max_workers()

        # Query settings
        self.query_count = int(os.getenv("QUERY_COUNT", "100"))
        self.query_mode = os.getenv("QUERY_MODE", "uniform")
        self.hotspot_fraction = float(os.getenv("HOTSPOT_FRACTION", "0.01"))
        self.hotspot_share = float(os.getenv("HOTSPOT_SHARE", "0.9"))
        self.powerlaw_exponent = float(os.getenv("POWERLAW_EXPONENT", "1.5"))

        # Bench settings
        self.label_dtype = os.getenv("LABEL_DTYPE", "float32")
        self.cdh_pool_size = int(os.getenv("CDH_POOL_SIZE", "64"))
        self.k0_multiplier = int(os.getenv("K0_MULTIPLIER", "4"))
        self.fps_restarts = int(os.getenv("FPS_RESTARTS", "10"))
        self.audit_rel_tol = float(os.getenv("AUDIT_REL_TOL", "1e-9"))
        self.narrowed_audit_rel_tol = float(os.getenv("NARROWED_AUDIT_REL_TOL", "1e-6"))
        self.use_cache = os.getenv("USE_CACHE", "true").lower() == "true"

        # Selector training settings
        self.learning_rate = float(os.getenv("LEARNING_RATE", "1e-3"))
        self.epochs = int(os.getenv("EPOCHS", "200"))
        self.batch_size = int(os.getenv("BATCH_SIZE", "256"))
        self.queries_per_epoch = int(os.getenv("QUERIES_PER_EPOCH", "1024"))
        self.lambda_cond = float(os.getenv("LAMBDA_COND", "0.01"))
        self.lambda_uniq = float(os.getenv("LAMBDA_UNIQ", "0.0"))
        self.lambda_cov = float(os.getenv("LAMBDA_COV", "0.0"))
        self.cov_beta = float(os.getenv("COV_BETA", "10.0"))
        self.tau_start = float(os.getenv("TAU_START", "1.0"))
        self.tau_end = float(os.getenv("TAU_END", "0.1"))
        self.init_scheme = os.getenv("INIT_SCHEME", "block_sparse")

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging configuration"""
        return {
            "level": self.log_level,
            "log_file": self.log_file or None
        }

    def get_query_config(self) -> Dict[str, Any]:
        """Get query sampling configuration"""
        return {
            "n": self.query_count,
            "mode": self.query_mode,
            "hotspot_fraction": self.hotspot_fraction,
            "hotspot_share": self.hotspot_share,
            "powerlaw_exponent": self.powerlaw_exponent
        }

    def get_bench_config(self) -> Dict[str, Any]:
        """Get benchmark cell configuration"""
        return {
            "label_dtype": self.label_dtype,
            "cdh_pool_size": self.cdh_pool_size,
            "k0_multiplier": self.k0_multiplier,
            "fps_restarts": self.fps_restarts,
            "audit_rel_tol": self.audit_rel_tol,
            "narrowed_audit_rel_tol": self.narrowed_audit_rel_tol
        }

    def get_train_config(self) -> Dict[str, Any]:
        """Get selector training configuration"""
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "queries_per_epoch": self.queries_per_epoch,
            "lambda_cond": self.lambda_cond,
            "lambda_uniq": self.lambda_uniq,
            "lambda_cov": self.lambda_cov,
            "cov_beta": self.cov_beta,
            "tau_start": self.tau_start,
            "tau_end": self.tau_end,
            "init": self.init_scheme
        }

    def validate_config(self) -> bool:
        """Validate configuration settings"""
        errors = []

        if not self.seeds:
            errors.append("DEFAULT_SEEDS must list at least one seed")
        if self.query_count <= 0:
            errors.append("QUERY_COUNT must be positive")
        if self.query_mode not in ("uniform", "hotspot", "powerlaw"):
            errors.append(f"QUERY_MODE must be uniform, hotspot or powerlaw, got {self.query_mode}")
        if not 0 < self.hotspot_fraction <= 1:
            errors.append("HOTSPOT_FRACTION must be in (0, 1]")
        if not 0 <= self.hotspot_share <= 1:
            errors.append("HOTSPOT_SHARE must be in [0, 1]")
        if self.label_dtype not in ("float32", "float64"):
            errors.append("LABEL_DTYPE must be float32 or float64")
        if self.k0_multiplier < 1:
            errors.append("K0_MULTIPLIER must be at least 1")
        if self.max_workers < 1:
            errors.append("MAX_WORKERS must be at least 1")
        if self.learning_rate <= 0:
            errors.append("LEARNING_RATE must be positive")
        if not self.tau_start > self.tau_end > 0:
            errors.append("TAU_START must exceed TAU_END, both positive")
        if min(self.lambda_cond, self.lambda_uniq, self.lambda_cov) < 0:
            errors.append("LAMBDA_* weights must be non-negative")
        if self.init_scheme not in ("block_sparse", "identity_first_m"):
            errors.append(f"INIT_SCHEME must be block_sparse or identity_first_m, got {self.init_scheme}")

        if errors:
            logger.error("Configuration validation failed:")
            for error in errors:
                logger.error(f"   - {error}")
            return False

        return True

    def print_config(self):
        """Print current configuration"""
        console = Console()
        console.print("Landmark Toolkit Configuration:")
        table = Table(box=box.SIMPLE_HEAVY)
        table.add_column("Setting")
        table.add_column("Value")
        table.add_row("cache_dir", str(self.cache_dir))
        table.add_row("results_dir", str(self.results_dir))
        table.add_row("seeds", ",".join(str(s) for s in self.seeds))
        table.add_row("graph_seed", str(self.graph_seed))
        table.add_row("max_workers", str(self.max_workers))
        for section in (self.get_query_config(), self.get_bench_config(), self.get_train_config()):
            for key, value in section.items():
                table.add_row(key, str(value))
        console.print(table)

    def update_config(self, **kwargs) -> List[str]:
        """Update configuration values; returns the keys that are not settings"""
        unknown = []
        for key, value in kwargs.items():
            if key.startswith("_") or not hasattr(self, key) or callable(getattr(self, key)):
                logger.warning(f"Unknown configuration key: {key}")
                unknown.append(key)
                continue
            setattr(self, key, _coerce(getattr(self, key), value))
            logger.info(f"Updated {key}: {getattr(self, key)}")
        return unknown

    def save_to_env(self, env_file: str = ".env"):
        """Save current configuration to .env file"""
        env_content = f"""# Landmark Toolkit Configuration
# Generated automatically

# Paths
LANDMARK_CACHE_DIR={self.cache_dir}
RESULTS_DIR={self.results_dir}

# Logging Settings
LOG_LEVEL={self.log_level}
LOG_FILE={self.log_file}

# Experiment Settings
DEFAULT_SEEDS={",".join(str(s) for s in self.seeds)}
GRAPH_SEED={self.graph_seed}
MAX_WORKERS={self.max_workers}

# Query Settings
QUERY_COUNT={self.query_count}
QUERY_MODE={self.query_mode}
HOTSPOT_FRACTION={self.hotspot_fraction}
HOTSPOT_SHARE={self.hotspot_share}
POWERLAW_EXPONENT={self.powerlaw_exponent}

# Bench Settings
LABEL_DTYPE={self.label_dtype}
CDH_POOL_SIZE={self.cdh_pool_size}
K0_MULTIPLIER={self.k0_multiplier}
FPS_RESTARTS={self.fps_restarts}
AUDIT_REL_TOL={self.audit_rel_tol}
NARROWED_AUDIT_REL_TOL={self.narrowed_audit_rel_tol}
USE_CACHE={str(self.use_cache).lower()}

# Selector Training Settings
LEARNING_RATE={self.learning_rate}
EPOCHS={self.epochs}
BATCH_SIZE={self.batch_size}
QUERIES_PER_EPOCH={self.queries_per_epoch}
LAMBDA_COND={self.lambda_cond}
LAMBDA_UNIQ={self.lambda_uniq}
LAMBDA_COV={self.lambda_cov}
COV_BETA={self.cov_beta}
TAU_START={self.tau_start}
TAU_END={self.tau_end}
INIT_SCHEME={self.init_scheme}
"""

        try:
            with open(env_file, "w") as f:
                f.write(env_content)
            logger.info(f"Configuration saved to {env_file}")
        except OSError as e:
            logger.error(f"Failed to save configuration: {e}")
            raise

# Global configuration instance
config = Config()


def get_config() -> Config:
    """Get global configuration instance"""
    return config
