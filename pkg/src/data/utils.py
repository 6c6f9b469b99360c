"""
Utility functions used by data package.
"""
import json
import math
from datetime import datetime, timezone

import numpy as np

from src import __version__


def to_builtin(value):
    """Recursively converts numpy scalars/arrays and non-finite floats to JSON-safe values.

    Non-finite floats become the strings "inf", "-inf" and "nan".
    """
    match value:
        case dict():
            return {str(key): to_builtin(item) for key, item in value.items()}
        case list() | tuple():
            return [to_builtin(item) for item in value]
        case np.ndarray():
            return [to_builtin(item) for item in value.tolist()]
        case np.generic():
            return to_builtin(value.item())
        case float() if not math.isfinite(value):
            return str(value)
        case _:
            return value


def output_header(config: dict, seed: int | None, timestamp: bool = True) -> dict:
    """Header embedded in every output record.

    Parameters
    ----------
    config: dict
        Fully resolved configuration of the command, defaults included.
    seed: int
        Master seed of the run.
    timestamp: bool
        If false, "generated_at" is left out so that reruns are byte-identical.

    Returns
    -------
        A dict with "tool_version", "config", "seed" and optionally "generated_at".
    """
    header = {"tool_version": __version__, "config": to_builtin(config), "seed": seed}
    if timestamp:
        header["generated_at"] = datetime.now(tz=timezone.utc).isoformat(timespec="seconds")

    return header


def dumps_record(record: dict) -> str:
    return json.dumps(to_builtin(record), indent=2) + "\n"


def dumps_line(record: dict) -> str:
    return json.dumps(to_builtin(record)) + "\n"
