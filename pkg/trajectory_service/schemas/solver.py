import json
from typing import ClassVar, Literal, Optional

from pydantic import BaseModel, Field

from schemas.overridable import OverridableModel


class SolverOptions(OverridableModel):
    """Levenberg-Marquardt options with automatic fallback to settings."""
    settings_prefix: ClassVar[str] = "solver_"

    max_iters: int = Field(default=50, ge=1)
    lambda0: float = Field(default=1e-4, gt=0)
    lambda_up: float = Field(default=10.0, gt=1)
    lambda_down: float = Field(default=0.5, gt=0, lt=1)
    lambda_min: float = Field(default=1e-10, ge=0)
    tol: float = Field(default=1e-6, ge=0)
    step_tol: float = Field(default=1e-10, ge=0)
    # Largest cosine between the residual and any Jacobian column at a minimum
    gradient_tol: float = Field(default=1e-8, ge=0)
    # Cost per residual entry below which the fit is exact
    cost_floor: float = Field(default=1e-20, ge=0)
    loss: Literal["quadratic", "huber"] = "quadratic"
    huber_delta: float = Field(default=1.0, gt=0)


SolverOptionsOverrides = SolverOptions.Overrides


class IterationRecord(BaseModel):
    iteration: int
    cost: float
    lam: float
    step_norm: float
    accepted: bool


class SolveReport(BaseModel):
    """Outcome of one nonlinear solve."""
    iterations: int = 0
    initial_cost: float = 0.0
    final_cost: float = 0.0
    converged: bool = False
    wall_time: float = 0.0
    message: str = ""
    window_end: Optional[float] = None
    records: list[IterationRecord] = Field(default_factory=list)

    @property
    def costs(self) -> list[float]:
        return [record.cost for record in self.records]

    def to_jsonl(self, context: Optional[dict] = None) -> str:
        """
        One JSON object per iteration record, followed by a summary line.

        Keys of `context` (e.g. the grid point) are prepended to every line.
        """
        context = context or {}
        lines = [json.dumps({**context, **record.model_dump()}) for record in self.records]
        lines.append(json.dumps({**context, **self.model_dump(exclude={"records"})}))
        return "\n".join(lines) + "\n"
