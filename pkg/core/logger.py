"""Thread-safe logging system for CovarKit."""

import logging
import os
import sys
import threading
from pathlib import Path


LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class ThreadSafeLogger:
    """Thread-safe logger that writes to application directory."""

    def __init__(self):
        self.logger = None
        self.console_handler = None
        self.lock = threading.Lock()
        self._initialize_default_logger()

    def _default_log_file(self) -> Path:
        override = os.environ.get('COVARKIT_LOG_FILE')
        if override:
            return Path(override)
        return Path(__file__).parent.parent / "log.txt"

    def _initialize_default_logger(self):
        """Initialize a default logger that writes to application directory."""
        with self.lock:
            self.logger = logging.getLogger("CovarKit")
            self.logger.setLevel(logging.DEBUG)
            self.logger.propagate = False

            # Remove existing handlers
            self.logger.handlers.clear()

            formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
            try:
                handler = logging.FileHandler(self._default_log_file(), mode='a', encoding='utf-8')
                handler.setLevel(logging.DEBUG)
                handler.setFormatter(formatter)
            except OSError:
                # Read-only install: keep running without a log file
                handler = logging.NullHandler()
            self.logger.addHandler(handler)

            # Log session start
            self.logger.info("=" * 80)
            self.logger.info("CovarKit - Session Started")
            self.logger.info("=" * 80)

    def set_console_level(self, level):
        """Mirror log records at or above level to stderr."""
        with self.lock:
            if self.console_handler is None:
                self.console_handler = logging.StreamHandler(sys.stderr)
                self.console_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
                self.logger.addHandler(self.console_handler)
            self.console_handler.setLevel(level)

    def info(self, message: str):
        """Log info message (thread-safe)."""
        with self.lock:
            if self.logger:
                self.logger.info(message)

    def warning(self, message: str):
        """Log warning message (thread-safe)."""
        with self.lock:
            if self.logger:
                self.logger.warning(message)

    def error(self, message: str):
        """Log error message (thread-safe)."""
        with self.lock:
            if self.logger:
                self.logger.error(message)

    def debug(self, message: str):
        """Log debug message (thread-safe)."""
        with self.lock:
            if self.logger:
                self.logger.debug(message)


# Global logger instance
_logger = ThreadSafeLogger()


def set_console_level(level):
    """Attach or adjust the stderr mirror of the log."""
    _logger.set_console_level(level)


def log_info(message: str):
    """Log info message."""
    _logger.info(message)


def log_warning(message: str):
    """Log warning message."""
    _logger.warning(message)


def log_error(message: str):
    """Log error message."""
    _logger.error(message)


def log_debug(message: str):
    """Log debug message."""
    _logger.debug(message)
