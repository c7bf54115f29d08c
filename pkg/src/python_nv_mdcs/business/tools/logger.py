"""Logging utilities for the spectroscopy pipeline."""

import logging
import os
from logging.handlers import WatchedFileHandler
from typing import Optional

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def setup_logging(log_level=logging.INFO, name: str = "runtime"):
    """Attach a console handler to the named logger (once)."""
    log = logging.getLogger(name)
    log.setLevel(log_level)
    for handler in log.handlers:
        if type(handler) is logging.StreamHandler:
            handler.setLevel(log_level)
            return log
    stream_handler = logging.StreamHandler()
    stream_handler.setLevel(log_level)
    stream_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    log.addHandler(stream_handler)
    return log


# Formatter of the first handler of a given type
def get_formatter(log: logging.Logger, handler_type) -> Optional[logging.Formatter]:
    for handler in log.handlers:
        if isinstance(handler, handler_type):
            return handler.formatter
    return None


def configure_stream(log: logging.Logger, log_file: str):
    if not log_file:
        raise ValueError("Log file path cannot be empty")

    log_directory = os.path.dirname(log_file)
    if log_directory:
        os.makedirs(log_directory, exist_ok=True)

    watched_handler = WatchedFileHandler(log_file)
    watched_handler.setLevel(log.level or logging.INFO)
    watched_handler.setFormatter(get_formatter(log, logging.StreamHandler) or logging.Formatter(LOG_FORMAT))

    # Replace a previous file handler rather than duplicating output
    for handler in [h for h in log.handlers if isinstance(h, WatchedFileHandler)]:
        log.removeHandler(handler)
        handler.close()

    log.addHandler(watched_handler)


def set_level(log_level) -> None:
    """Change the level of both pipeline loggers and their handlers."""
    for log in (runtime, detail):
        log.setLevel(log_level)
        for handler in log.handlers:
            handler.setLevel(log_level)


runtime = setup_logging(logging.INFO, "runtime")
detail = setup_logging(logging.INFO, "detail")
