"""
Configuration management for fleetopt.
"""

import math
import os
from decimal import Decimal
from typing import List, Optional, Tuple
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_flag(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


def _env_pair(name: str) -> Optional[Tuple[float, float]]:
    value = os.getenv(name)
    if not value:
        return None
    first, second = (float(part) for part in value.split(","))
    return first, second


class Config:
    """Application configuration settings."""

    # Objective
    DEFAULT_LAMBDA: float = float(os.getenv("FLEETOPT_LAMBDA", 1.0))
    DEFAULT_SEED: int = int(os.getenv("FLEETOPT_SEED", 0))

    # Instance generation defaults
    DEFAULT_AIRPORTS: List[str] = ["SYD", "MEL", "HBA", "OOL", "DRW", "ADA", "BNE", "CBR", "PER"]
    DEFAULT_FLEET_SPEC: List[Tuple[str, int, int]] = [
        ("A330", 159, 10),
        ("A220", 192, 15),
        ("B737", 142, 15),
        ("B717", 165, 8),
    ]
    BASE_FLIGHTS_PER_DAY: int = 46
    DEMAND_RANGE: Tuple[int, int] = (100, 210)
    COST_RANGE: Tuple[Decimal, Decimal] = (Decimal("4000.00"), Decimal("6500.00"))

    # Benchmark ladders
    BLP_DAYS: int = 7
    ILP_DAYS: int = 1
    DEFAULT_LADDER: List[int] = [46, 92, 184, 276, 368]
    LARGE_LADDER: List[int] = [1104, 1840, 3680]
    BENCH_WORKERS: int = int(os.getenv("FLEETOPT_WORKERS", 1))

    # Solvers
    EXACT_TIME_LIMIT: float = float(os.getenv("FLEETOPT_TIME_LIMIT", 600))
    BRUTE_FORCE_MAX_BITS: int = 24
    ANNEAL_RESTARTS: int = int(os.getenv("FLEETOPT_RESTARTS", 8))
    ANNEAL_BETA_RANGE: Optional[Tuple[float, float]] = _env_pair("FLEETOPT_BETA_RANGE")
    ANNEAL_SWEEP_FACTOR: int = 2000
    ANNEAL_MAX_SWEEPS: int = int(os.getenv("FLEETOPT_MAX_SWEEPS", 2000))
    DEBUG_CHECKS: bool = _env_flag("FLEETOPT_DEBUG_CHECKS")

    # Logging configuration
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_DIR: Optional[str] = os.getenv("LOG_DIR") or None

    @classmethod
    def validate_config(cls) -> bool:
        """Validate configuration settings."""
        try:
            if cls.DEFAULT_LAMBDA < 0:
                return False
            if len(cls.DEFAULT_AIRPORTS) < 2:
                return False
            low, high = cls.DEMAND_RANGE
            if not 0 <= low <= high <= 400:
                return False
            if not 0 <= cls.COST_RANGE[0] <= cls.COST_RANGE[1]:
                return False
            if cls.ANNEAL_BETA_RANGE is not None:
                beta_start, beta_end = cls.ANNEAL_BETA_RANGE
                if not 0 < beta_start < beta_end:
                    return False
            if cls.ANNEAL_RESTARTS < 1 or cls.BENCH_WORKERS < 1:
                return False
            return True
        except Exception:
            return False

    @classmethod
    def scaled_fleet_spec(cls, flights_per_day: int) -> List[Tuple[str, int, int]]:
        """Default fleet with availability scaled so that sum(N_j) covers a day."""
        factor = max(1, math.ceil(flights_per_day / cls.BASE_FLIGHTS_PER_DAY))
        return [(name, capacity, available * factor) for name, capacity, available in cls.DEFAULT_FLEET_SPEC]

    @classmethod
    def default_sweeps(cls, bits: int) -> int:
        """2000 * sqrt(bits), capped so a desk-scale run stays within minutes."""
        return max(1, min(cls.ANNEAL_MAX_SWEEPS, int(cls.ANNEAL_SWEEP_FACTOR * math.sqrt(max(bits, 1)))))

    @classmethod
    def ladder(cls, large: bool = False) -> List[int]:
        return cls.DEFAULT_LADDER + (cls.LARGE_LADDER if large else [])
