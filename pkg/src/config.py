"""
Runtime configuration, read from the environment (and an optional `.env` file).
"""
from os import getenv

from dotenv import load_dotenv

load_dotenv()

DEFAULT_MAX_QUBITS = 26
DEFAULT_MAX_ENUMERATION_BITS = 24
DEFAULT_MAX_REPETITIONS = 1_000_000
DEFAULT_LOG_LEVEL = "INFO"


def _get_positive_int(name: str, default: int) -> int:
    raw_value = getenv(name)
    if raw_value is None or raw_value.strip() == "":
        return default

    try:
        value = int(raw_value)
    except ValueError as exc:
        raise ValueError(f"{name} must be an integer, got {raw_value!r}") from exc

    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")

    return value


def get_max_qubits() -> int:
    """Hard cap on `n_search + n_control` for dense amplitude storage."""
    return _get_positive_int("QANNEAL_MAX_QUBITS", DEFAULT_MAX_QUBITS)


def get_max_enumeration_bits() -> int:
    """Largest bit count for which exhaustive state enumeration is allowed."""
    return _get_positive_int(
        "QANNEAL_MAX_ENUMERATION_BITS", DEFAULT_MAX_ENUMERATION_BITS
    )


def get_max_repetitions() -> int:
    """Repetition cutoff of the repeat-until-success protocol."""
    return _get_positive_int("QANNEAL_MAX_REPETITIONS", DEFAULT_MAX_REPETITIONS)


def get_log_level() -> str:
    return getenv("QANNEAL_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
