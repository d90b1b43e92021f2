"""
Logging configuration for acband commands
"""
import atexit
import logging
import os
import sys
import warnings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _suppress_shutdown_warnings():
    """Suppress unclosed-transport warnings from killed runner subprocesses."""
    warnings.filterwarnings("ignore", category=ResourceWarning, message=".*unclosed.*")
    logging.getLogger("asyncio").setLevel(logging.CRITICAL)


def configure_logging(level: str | int | None = None) -> None:
    """Send log records to stderr so stdout and result files stay payload-only."""
    if level is None:
        level = os.getenv("ACBAND_LOG_LEVEL", "WARNING")
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING

    root = logging.getLogger("acband")
    root.setLevel(level)
    ours = [h for h in root.handlers if getattr(h, "_acband", False)]
    if ours:
        # follow sys.stderr if it was swapped since the first call
        for handler in ours:
            handler.setStream(sys.stderr)
    else:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._acband = True
        root.addHandler(handler)

    atexit.register(_suppress_shutdown_warnings)
