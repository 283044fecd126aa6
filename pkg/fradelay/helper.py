# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

import functools
import importlib
import io
import json
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO, Union

import click
import numpy as np

from .exception import (
    ConfigError,
    ContourTooCloseError,
    DomainError,
    InnerIterationError,
    NearDefectiveError,
    NoContractionError,
    NoConvergenceError,
    QuadratureError,
    RegionError,
)

logger = logging.getLogger("fradelay")

LOG_LEVELS: Dict[str, int] = {
    "error": logging.ERROR,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

# Exit codes for errors escaping a command, checked in order
EXIT_CODES = (
    (NoConvergenceError, 4),
    (InnerIterationError, 4),
    (OverflowError, 5),
    (RegionError, 6),
    (NoContractionError, 6),
    (ContourTooCloseError, 6),
    (ConfigError, 2),
    (DomainError, 2),
    (QuadratureError, 2),
    (NearDefectiveError, 2),
)

ComplexLike = Union[float, int, Sequence[float]]


def setup_logging(verbose: int = 0, env_value: Optional[str] = None):
    if env_value is None:
        env_value = os.environ.get("FRADELAY_LOG", "error")
    level = LOG_LEVELS.get(env_value.strip().lower())
    if level is None:
        raise ConfigError("FRADELAY_LOG", f"unknown level '{env_value}', use one of {', '.join(LOG_LEVELS)}")

    # every -v lowers the threshold by one step
    level = max(logging.DEBUG, level - 10 * verbose)
    logger.setLevel(level)
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("[%(levelname)s] %(name)s: %(message)s"))
        logger.addHandler(handler)
    return level


def guarded(name: str):
    """Turn library errors into a one line message on stderr and a documented exit code."""
    def decorator(func: Callable):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except tuple(exc_cls for exc_cls, _ in EXIT_CODES) as e:
                code = exit_code_for(e)
                logger.debug("Command '%s' failed", name, exc_info=True)
                click.echo(f"{name.upper()} UNKNOWN - {e}", err=True)
                sys.exit(code)
        return wrapper
    return decorator


def exit_code_for(error: BaseException) -> int:
    for exc_cls, code in EXIT_CODES:
        if isinstance(error, exc_cls):
            return code
    return 1


def parse_complex(value: ComplexLike, field: str = "value") -> complex:
    if isinstance(value, bool):
        raise ConfigError(field, "boolean is not a number")
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, complex):
        return value
    if isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            return complex(float(value[0]), float(value[1]))
        except (TypeError, ValueError):
            pass
    raise ConfigError(field, f"expected a real number or a [re, im] pair, got {value!r}")


def complex_to_json(value: complex) -> List[float]:
    value = complex(value)
    return [float(value.real), float(value.imag)]


def to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return complex_to_json(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, float) and not np.isfinite(value):
        # json has no inf/nan literal
        return None
    return value


def dump_json(data: Any) -> str:
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n"


def format_csv(header: List[str], rows: np.ndarray) -> str:
    buffer = io.StringIO()
    np.savetxt(buffer, np.atleast_2d(rows), delimiter=",", header=",".join(header), comments="", fmt="%.17g")
    return buffer.getvalue()


def parse_csv(text: str):
    """Return ``(header, rows)`` of a CSV document written by :func:`format_csv`."""
    lines = text.strip().splitlines()
    if not lines:
        raise ConfigError("csv", "empty document")
    header = lines[0].split(",")
    rows = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)
    return header, rows


def write_output(text: str, output: Optional[str], stream: Optional[TextIO] = None):
    if output is None or output == "-":
        click.echo(text, nl=False, file=stream)
        return
    with open(output, "w", encoding="utf-8") as fh:
        fh.write(text)
    logger.info("Wrote %d bytes to '%s'", len(text), output)


def load_modules(pkg_names: Optional[List] = None):
    if pkg_names is None:
        pkg_names = [".command"]
    for base_pkg_name in pkg_names:
        logger.debug("Base package name: %s", base_pkg_name)
        base_pkg = importlib.import_module(base_pkg_name, package=__package__)

        path = base_pkg.__path__[0]
        logger.debug("Base path: %s", path)

        for filename in sorted(os.listdir(path)):
            if filename == "__init__.py" or filename[-3:] != ".py":
                continue

            mod_name = "{}.{}".format(base_pkg_name, filename[:-3])
            try:
                importlib.import_module(mod_name, package=__package__)
                logger.debug("Loaded '%s' successfully", mod_name)
            except ImportError:
                logger.warning("Unable to load: '%s'", mod_name)
                logger.debug("An error occurred while importing '%s'", mod_name, exc_info=True)
