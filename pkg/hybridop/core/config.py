from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import List
from functools import lru_cache


class Settings(BaseSettings):
    """Library and CLI settings loaded from environment variables (prefix HYBRIDOP_)."""

    model_config = SettingsConfigDict(
        env_prefix="HYBRIDOP_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: str = "INFO"

    # Series truncation
    truncation_tolerance: float = 1e-14
    truncation_cap: int = 10_000_000

    # Erlang quadrature
    quadrature_base_order: int = 64
    quadrature_max_refinements: int = 12
    quadrature_rel_tolerance: float = 1e-10
    quadrature_abs_tolerance: float = 1e-14

    # Experiment harness
    noise_floor: float = 1e-9
    fit_noise_floor: float = 1e-12
    sup_grid_points: int = 201
    modulus_levels: int = 32
    modulus_grid_points: int = 256
    steklov_points_per_axis: int = 16
    growth_slack: float = 1.5
    ratio_spread_limit: float = 3.0
    voronovskaja_tolerance: float = 0.01

    # Sweeps - stored as comma-separated string
    default_n_sweep_str: str = "25,50,100,200,400,800,1600"

    # Parallelism (0 = logical cores)
    worker_threads: int = 0

    @property
    def default_n_sweep(self) -> List[float]:
        """Parse the default n sweep from comma-separated string."""
        return [float(v.strip()) for v in self.default_n_sweep_str.split(",") if v.strip()]


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
