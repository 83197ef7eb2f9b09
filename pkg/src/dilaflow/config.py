import logging
import os

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _get_positive_int_env(name: str, default: int) -> int:
    raw_value = os.getenv(name)
    if raw_value is None:
        return default

    try:
        parsed = int(raw_value)
        if parsed <= 0:
            raise ValueError
        return parsed
    except ValueError:
        logger.warning(
            "Invalid environment value for %s=%r. Falling back to %s.",
            name,
            raw_value,
            default,
        )
        return default


def _get_positive_float_env(name: str, default: float) -> float:
    raw_value = os.getenv(name)
    if raw_value is None:
        return default

    try:
        parsed = float(raw_value)
        if not parsed > 0:
            raise ValueError
        return parsed
    except ValueError:
        logger.warning(
            "Invalid environment value for %s=%r. Falling back to %s.",
            name,
            raw_value,
            default,
        )
        return default


# Relative to polygon diameter.
EPS_GEO = _get_positive_float_env("DILAFLOW_EPS_GEO", 1e-9)

MAX_CROSSINGS = _get_positive_int_env("DILAFLOW_MAX_CROSSINGS", 10_000)
MAX_PATH_LENGTH = _get_positive_float_env("DILAFLOW_MAX_PATH_LENGTH", 1e6)
CYCLE_CONFIRMATIONS = _get_positive_int_env("DILAFLOW_CYCLE_CONFIRMATIONS", 3)
RETURN_SAMPLES = _get_positive_int_env("DILAFLOW_RETURN_SAMPLES", 65)
SWEEP_WORKERS = _get_positive_int_env("DILAFLOW_SWEEP_WORKERS", 1)
LOG_LEVEL = os.getenv("DILAFLOW_LOG_LEVEL", "WARNING").upper()

# Fixed numerical constants of the algorithms.
SPLIT_TOLERANCE = 1e-12
ANGULAR_TOLERANCE = 1e-9
# Relative agreement of holonomy ratios along a cylinder family.
RATIO_TOLERANCE = 1e-6
OPENNESS_DELTA = 1e-5
INITIAL_PROBE_STEP = 1e-3


def configure_logging(level: str | None = None) -> None:
    """Configure root logging for the command line and HTTP entry points."""
    logging.basicConfig(level=(level or LOG_LEVEL), format=LOG_FORMAT)
