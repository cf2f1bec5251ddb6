import os
import logging
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_PRECISION = 17
DEFAULT_DT = float(os.getenv("HYBRIDLANG_DT", 0.001))
DEFAULT_END_TIME = float(os.getenv("HYBRIDLANG_END_TIME", 10.0))
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Numeric kernel
PIVOT_RELATIVE_TOLERANCE = 1e-12

# Euler-Lagrange pipeline
LINEARITY_SPOT_CHECKS = 10
MAX_EMIT_COORDS = 3

# Quadcopter
GIMBAL_LOCK_TOLERANCE = 1e-9

SAMPLES_DIR = Path(__file__).resolve().parents[2] / "samples"

CORS_ORIGINS = [
    "http://localhost:3000",
]

BUILTIN_MODELS = {
    "pendulum": "Single pendulum, explicit form",
    "double_pendulum": "Double pendulum, mutually recursive listing",
    "quadcopter": "Newtonian quadcopter with Euler-angle attitude",
}


def get_precision() -> int:
    """
    Significant digits for printed reals. Re-reads HYBRIDLANG_PRECISION so the
    variable is honoured even when set after import.
    """
    raw = os.getenv("HYBRIDLANG_PRECISION")
    if raw is None:
        return DEFAULT_PRECISION
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring HYBRIDLANG_PRECISION={raw!r}: not an integer.")
        return DEFAULT_PRECISION
    if not 1 <= value <= 17:
        logger.warning(f"Ignoring HYBRIDLANG_PRECISION={value}: must be between 1 and 17.")
        return DEFAULT_PRECISION
    return value
