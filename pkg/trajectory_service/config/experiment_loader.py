import io
from pathlib import Path
from typing import Union

from dotenv import dotenv_values
from pydantic import ValidationError

from errors import ConfigError
from logger_config import logger
from schemas.experiment import ExperimentConfig
from schemas.solver import SolverOptionsOverrides

SOLVER_PREFIX = "solver_"


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error["loc"]) or "<root>"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def parse_experiment_text(text: str, source: str = "<string>") -> ExperimentConfig:
    """
    Parse a flat `key = value` experiment file.

    Keys starting with `solver_` are collected into the solver overrides; every
    other key must be a field of ExperimentConfig.

    Raises:
        ConfigError: on keys without a value, unknown keys or invalid values.
    """
    values = dotenv_values(stream=io.StringIO(text), interpolate=False)
    missing = [key for key, value in values.items() if value is None]
    if missing:
        raise ConfigError(f"{source}: keys without a value: {', '.join(missing)}")

    fields: dict[str, object] = {}
    solver: dict[str, str] = {}
    for key, value in values.items():
        key = key.strip().lower()
        if key.startswith(SOLVER_PREFIX):
            solver[key[len(SOLVER_PREFIX):]] = value.strip()
        else:
            fields[key] = value.strip()

    try:
        if solver:
            fields["solver"] = SolverOptionsOverrides(**solver)
        config = ExperimentConfig(**fields)
    except ValidationError as exc:
        raise ConfigError(f"{source}: {_format_validation_error(exc)}") from exc

    logger.debug(f"Parsed experiment '{config.name}' from {source} ({config.grid_size} grid points)")
    return config


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"Cannot read experiment file {path}: {exc}") from exc
    return parse_experiment_text(text, source=str(path))


__all__ = ["parse_experiment_text", "load_experiment_config"]
