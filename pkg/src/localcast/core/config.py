from pydantic_settings import BaseSettings
from functools import lru_cache
import os
import logging

logging.basicConfig(
    level=os.getenv("LOG_LEVEL", "INFO"),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger("localcast")


class Settings(BaseSettings):
    """
    Simulator settings with environment variable support.

    Settings can be overridden by environment variables or .env file.
    """

    # 0 means one worker per CPU
    LOCALCAST_THREADS: int = 0
    LOG_LEVEL: str = "INFO"

    DEFAULT_ALPHA: float = 3.0
    DEFAULT_BETA: float = 2.0
    DEFAULT_PHI: float = 1 / 6
    DEFAULT_DELTA: int = 16
    DEFAULT_GAMMA: float = 8.0

    MAX_SLOTS_FACTOR: int = 64
    RNG_BLOCK_SIZE: int = 1024

    # limits on k/N_x (alg1) and k log n/(N_x + log n) (alg2) for fit --check-fallbacks;
    # a 32-node clique at n_bound=64 reaches k/N_x = 202/32 under alg1
    FALLBACK_RATIO_ALG1: float = 8.0
    FALLBACK_RATIO_ALG2: float = 8.0
    AGGREGATE_BOUND_C: float = 5.0
    MC_SIGMA_TOLERANCE: float = 4.0

    ALLOWED_ORIGINS: str = "http://localhost:8000,http://localhost:3000"
    # HTTP requests run inline, so their work is capped
    API_MAX_SLOTS: int = 200_000
    API_MAX_TMAX: int = 1 << 16

    class Config:
        env_file = ".env"
        extra = "ignore"


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Uses lru_cache to avoid loading .env file multiple times.
    """
    return Settings()


settings = get_settings()


def worker_count() -> int:
    """Number of trial workers, honouring LOCALCAST_THREADS (0 = auto)."""
    threads = get_settings().LOCALCAST_THREADS
    if threads > 0:
        return threads
    return os.cpu_count() or 1
