"""
Logging set-up for the glucoguard tool.

Messages go to stderr, and optionally to syslog under the glucoguard ident and to
one file per run, glucoguard-<command>-<time>-<pid>.log, in a log directory.
"""

import logging
import logging.handlers
import os
import sys
import time
from typing import Optional

__author__ = "glucoguard"

PROGNAME = "glucoguard"

FILE_FORMATTER = "%(asctime)s: %(name)s: %(levelname)s %(message)s"
SYSLOG_FORMATTER = "%(name)s: %(levelname)s %(message)s"


def log_filename(command: Optional[str] = None, now: Optional[float] = None, pid: Optional[int] = None) -> str:
    """Name of the log file of one run."""
    parts = [PROGNAME] if not command else [PROGNAME, command]
    parts.append(time.strftime("%Y%m%d-%H%M%S", time.localtime(now)))
    parts.append(str(os.getpid() if pid is None else pid))
    return "-".join(parts) + ".log"


def get_logger(
    command: Optional[str] = None,
    debug: bool = False,
    syslog: bool = False,
    logdir: Optional[str] = None,
) -> logging.Logger:
    """Initialize the root logger for one run of a glucoguard command."""
    level = logging.INFO if not debug else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format=FILE_FORMATTER)
    logger = logging.getLogger()
    # Keep stderr quiet when it is not a terminal, the results go to stdout and files
    if not sys.stderr.isatty() and not debug:
        for this_h in logger.handlers:
            this_h.setLevel(logging.WARNING)
    if syslog:
        syslog_h = logging.handlers.SysLogHandler()
        syslog_h.ident = f"{PROGNAME}: "
        syslog_h.setFormatter(logging.Formatter(SYSLOG_FORMATTER))
        logger.addHandler(syslog_h)
    if logdir is not None:
        file_h = logging.FileHandler(os.path.join(logdir, log_filename(command)))
        file_h.setLevel(level)
        file_h.setFormatter(logging.Formatter(FILE_FORMATTER))
        logger.addHandler(file_h)
    return logger
