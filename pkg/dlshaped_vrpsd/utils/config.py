"""
Runtime configuration read from the environment.

Every knob has a working default; set the environment variable only to override it.
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

logger = logging.getLogger(__name__)

# Defaults
DEFAULT_TAIL_EPS = 1e-12
DEFAULT_VIOLATION_TOL = 1e-6
DEFAULT_INTEGRALITY_TOL = 1e-6
DEFAULT_OBJECTIVE_TOL = 1e-6
DEFAULT_MAX_CUT_ROUNDS = 50
DEFAULT_CUTS_PER_TYPE = 6
DEFAULT_EXACT_BOUND_MAX_SET = 5
DEFAULT_LOG_LEVEL = "INFO"


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        logger.warning(f"Ignoring non-numeric {name}={raw!r}, using {default}")
        return default


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}, using {default}")
        return default


# Configuration from environment (with defaults)
TAIL_EPS = _float_env("VRPSD_TAIL_EPS", DEFAULT_TAIL_EPS)
VIOLATION_TOL = _float_env("VRPSD_VIOLATION_TOL", DEFAULT_VIOLATION_TOL)
INTEGRALITY_TOL = _float_env("VRPSD_INTEGRALITY_TOL", DEFAULT_INTEGRALITY_TOL)
OBJECTIVE_TOL = _float_env("VRPSD_OBJECTIVE_TOL", DEFAULT_OBJECTIVE_TOL)
MAX_CUT_ROUNDS = _int_env("VRPSD_MAX_CUT_ROUNDS", DEFAULT_MAX_CUT_ROUNDS)
CUTS_PER_TYPE = _int_env("VRPSD_CUTS_PER_TYPE", DEFAULT_CUTS_PER_TYPE)
EXACT_BOUND_MAX_SET = _int_env("VRPSD_EXACT_BOUND_MAX_SET", DEFAULT_EXACT_BOUND_MAX_SET)
LOG_LEVEL = os.getenv("VRPSD_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()

# Support-graph threshold: an edge with x_e at or below this is treated as inactive
SUPPORT_EPS = 1e-6


@dataclass(frozen=True)
class SolverOptions:
    """Per-run options of the branch-and-cut engine."""
    time_limit: Optional[float] = None
    node_limit: Optional[int] = None
    e_cuts: bool = True
    s_cuts: bool = True
    classic: bool = False
    initial_pool: bool = True
    warm_start: bool = True
    check_superadditivity_depth: Optional[int] = None
    force: bool = False
    seed: int = 0
    cuts_log: Optional[str] = None
    max_cut_rounds: int = MAX_CUT_ROUNDS
    cuts_per_type: int = CUTS_PER_TYPE
    exact_bound_max_set: int = EXACT_BOUND_MAX_SET


def configure_logging(level: Optional[str] = None, stream=None) -> None:
    """Install the process-wide logging format used by every entry point."""
    kwargs = {}
    if stream is not None:
        kwargs["stream"] = stream
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True,
        **kwargs,
    )
