from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

config_dir = Path(__file__).parent
presets_dir = config_dir.joinpath("presets")

class Settings(BaseSettings):
    # Runtime settings
    log_level: str = Field(default="INFO")
    output_dir: Path = Field(default=Path("bench_outputs"))
    threads: int = Field(default=1, ge=1)

    # Solver settings
    solver_max_iters: int = Field(default=50, ge=1)
    solver_lambda0: float = Field(default=1e-4, gt=0)
    solver_lambda_up: float = Field(default=10.0, gt=1)
    solver_lambda_down: float = Field(default=0.5, gt=0, lt=1)
    solver_lambda_min: float = Field(default=1e-10, ge=0)
    solver_tol: float = Field(default=1e-6, ge=0)
    solver_step_tol: float = Field(default=1e-10, ge=0)
    solver_gradient_tol: float = Field(default=1e-8, ge=0)
    solver_cost_floor: float = Field(default=1e-20, ge=0)
    solver_loss: Literal["quadratic", "huber"] = Field(default="quadratic")
    solver_huber_delta: float = Field(default=1.0, gt=0)

    # Evaluation settings
    eval_sample_period: float = Field(default=0.01, gt=0)
    record_timing: bool = Field(default=False)
    timing_repeats: int = Field(default=3, ge=1)

    # Simulation settings
    rays_per_step: int = Field(default=16, ge=1)

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")


settings = Settings()

__all__ = ["Settings", "settings", "presets_dir"]
