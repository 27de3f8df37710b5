"""
Configuration management for kspectral
Loads numeric defaults from environment variables (prefix KSPECTRAL_) with defaults
"""

from pydantic import PositiveFloat, PositiveInt
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables"""

    model_config = SettingsConfigDict(
        env_prefix="KSPECTRAL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Logging
    LOG_LEVEL: str = "info"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Linear algebra / geometry tolerances
    GEOMETRY_TOL: PositiveFloat = 1e-9
    SPECTRAL_SLACK: PositiveFloat = 1e-10
    SINGULAR_RCOND: PositiveFloat = 1e-13
    POLE_DISTANCE: PositiveFloat = 1e-12

    # Periodic trapezoid quadrature
    QUAD_NODES: PositiveInt = 256
    QUAD_MIN_NODES: PositiveInt = 64
    QUAD_MAX_NODES: PositiveInt = 32768
    QUAD_TOL: PositiveFloat = 1e-8

    # Strict admissibility margin for annulus contexts
    STRICT_MARGIN: PositiveFloat = 1e-6

    # Boundary sup norms
    SUP_SAMPLES: PositiveInt = 4096
    CERT_SAMPLES: PositiveInt = 65536
    MAX_CERT_SAMPLES: PositiveInt = 1048576
    SAMPLING_SLACK: PositiveFloat = 1e-6

    # Infinite products
    TAIL_TOL: PositiveFloat = 1e-12
    PRODUCT_MAX_FACTORS: PositiveInt = 1_000_000

    # Estimator
    RANDOM_DELTA: PositiveFloat = 1e-3
    ESTIMATE_DEGREE: PositiveInt = 8
    ESTIMATE_BUDGET: PositiveInt = 20000
    CARATHEODORY_SAMPLES: PositiveInt = 2048
    CARATHEODORY_MAX_ROUNDS: PositiveInt = 60
    COMPLETE_TRIALS: PositiveInt = 100


# Initialize settings (singleton pattern)
settings = Settings()


def get_quadrature_defaults():
    """Get a QuadratureConfig built from the QUAD_* settings"""
    from calculus import QuadratureConfig

    return QuadratureConfig(
        nodes=max(settings.QUAD_NODES, settings.QUAD_MIN_NODES),
        tol=settings.QUAD_TOL,
        max_nodes=settings.QUAD_MAX_NODES,
    )


def is_debug() -> bool:
    """Check if debug logging is enabled"""
    return settings.LOG_LEVEL.lower() == "debug"
