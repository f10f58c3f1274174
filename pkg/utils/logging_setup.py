import logging
import os
import sys
from typing import Optional

import coloredlogs

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Install colored console logging and an optional plain log file"""
    coloredlogs.install(level=level.upper(), fmt=LOG_FORMAT)

    if log_file:
        root = logging.getLogger()
        target = os.path.abspath(log_file)
        if not any(isinstance(h, logging.FileHandler) and h.baseFilename == target
                   for h in root.handlers):
            handler = logging.FileHandler(log_file)
            handler.setFormatter(logging.Formatter(LOG_FORMAT))
            root.addHandler(handler)


def progress_enabled() -> bool:
    """Progress bars only on a terminal with INFO visible"""
    if not sys.stderr.isatty():
        return False
    return logging.getLogger().getEffectiveLevel() <= logging.INFO
