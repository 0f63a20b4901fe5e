"""Configuration settings for the delta-robin engine."""

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Engine settings, read from ``ROBIN_*`` environment variables."""

    TOL: float = 1e-10  # default quadrature tolerance (ROBIN_TOL)
    QUAD_MAX_PANELS: int = 20000
    ORACLE_MAX_LEAVES: int = 10_000
    ORACLE_MAX_ITER: int = 20000
    ORACLE_RESIDUAL_TOL: float = 1e-8
    FLOAT_DIGITS: int = 12
    LOG_LEVEL: str = "WARNING"

    class Config:
        """Pydantic configuration."""

        env_prefix = "ROBIN_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"


settings = Settings()
