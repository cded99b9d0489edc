from dataclasses import dataclass, field
from typing import Optional

from schemas.solver import SolveReport

CSV_COLUMNS = (
    "scenario", "repr", "mode", "dt", "omega", "seed",
    "pos_rmse", "rot_rmse", "iters", "converged", "solve_time_s",
)


@dataclass(slots=True)
class RunResult:
    """Outcome of one grid point."""
    scenario: str
    repr: str
    mode: str
    dt: float
    omega: float
    seed: int
    pos_rmse: float = float("nan")
    rot_rmse: float = float("nan")
    iters: int = 0
    converged: bool = False
    solve_time_s: Optional[float] = None
    message: str = ""
    # MLCME only: position/rotation RMSE per lidar
    per_lidar: list[tuple[float, float]] = field(default_factory=list)
    # MLCME only: (window end, rotation error deg, translation error m, tx, ty, tz)
    extrinsic_trace: list[tuple[float, ...]] = field(default_factory=list)
    # One report per solve; fixed-lag runs have one per window
    reports: list[SolveReport] = field(default_factory=list)

    def coordinates(self) -> dict:
        return {"scenario": self.scenario, "repr": self.repr, "mode": self.mode, "dt": self.dt, "omega": self.omega}

    def to_row(self) -> dict:
        row = {key: getattr(self, key) for key in CSV_COLUMNS}
        row["converged"] = int(self.converged)
        return row
