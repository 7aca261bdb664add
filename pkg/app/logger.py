import sys
from datetime import datetime
from typing import Optional

from loguru import logger as _logger

from app.config import PROJECT_ROOT


LOG_DIR = PROJECT_ROOT / "logs"


def define_log_level(
    print_level: str = "INFO",
    logfile_level: Optional[str] = "DEBUG",
    name: Optional[str] = None,
):
    """Route solver logs to stderr and, optionally, a timestamped file in logs/."""
    formatted_date = datetime.now().strftime("%Y%m%d%H%M%S")
    log_name = f"{name}_{formatted_date}" if name else formatted_date

    _logger.remove()
    _logger.add(sys.stderr, level=print_level)
    if logfile_level is not None:
        # enqueue: Monte Carlo workers may log from child processes
        _logger.add(LOG_DIR / f"{log_name}.log", level=logfile_level, enqueue=True)
    return _logger


logger = define_log_level(logfile_level=None)
