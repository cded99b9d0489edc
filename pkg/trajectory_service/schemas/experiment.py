import math
from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from schemas.solver import SolverOptionsOverrides
from schemas.trajectory_types import KinematicsMode, PoseRepr

Vec3 = tuple[float, float, float]


class Scenario(str, Enum):
    UWB_BATCH = "uwb_batch"
    LIDAR_BATCH = "lidar_batch"
    MLCME = "mlcme"


class GtKind(str, Enum):
    SPLIT = "split"
    NON_SPLIT = "non_split"
    LISSAJOUS = "lissajous"


class InitDerivatives(str, Enum):
    ZERO = "zero"
    GROUND_TRUTH = "ground_truth"


UWB_OMEGAS = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
MLCME_OMEGAS = [0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95]
LIDAR_DTS = [0.05, 0.1, 0.2, 0.3]

# Scenario dependent values used when the experiment file leaves a key out
SCENARIO_DEFAULTS: dict[Scenario, dict[str, object]] = {
    Scenario.UWB_BATCH: {
        "gt_kind": GtKind.SPLIT,
        "omegas": UWB_OMEGAS,
        "dts": [0.1],
        "duration": 20.0,
        "rot_init_var": 0.2,
        "pos_init_var": 0.5,
    },
    Scenario.LIDAR_BATCH: {
        "gt_kind": GtKind.SPLIT,
        "omegas": UWB_OMEGAS,
        "dts": LIDAR_DTS,
        "duration": 10.0,
        "rot_init_var": 0.01,
        "pos_init_var": 0.01,
        "room_min": (-6.0, -6.0, -6.0),
        "room_max": (6.0, 6.0, 6.0),
    },
    Scenario.MLCME: {
        "gt_kind": GtKind.LISSAJOUS,
        "omegas": MLCME_OMEGAS,
        "dts": [0.04357],
        "duration": 30.0,
        "rot_init_var": 0.0,
        "pos_init_var": 0.0,
        "room_min": (-3.0, -3.0, 0.0),
        "room_max": (3.0, 3.0, 3.0),
    },
}


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def _split_vectors(value):
    if isinstance(value, str):
        return [tuple(float(x) for x in item.split()) for item in value.split("|") if item.strip()]
    return value


def _split_vector(value):
    if isinstance(value, str):
        return tuple(float(x) for x in value.replace(",", " ").split())
    return value


class ExperimentConfig(BaseModel):
    """
    One experiment file.

    Grids span the run matrix (omega x dt x representation x mode); every key
    left out of the file falls back to the scenario defaults.
    """
    model_config = ConfigDict(extra="forbid")

    name: str = "experiment"
    scenario: Scenario
    seed: int = Field(default=0, ge=0)
    gt_kind: Optional[GtKind] = None
    omegas: Optional[list[float]] = None
    dts: Optional[list[float]] = None
    reprs: list[PoseRepr] = Field(default_factory=lambda: [PoseRepr.SO3xR3, PoseRepr.SE3])
    modes: list[KinematicsMode] = Field(default_factory=lambda: [KinematicsMode.CLOSED_FORM, KinematicsMode.APPROXIMATED])
    duration: Optional[float] = Field(default=None, gt=0)

    # UWB
    anchors: list[Vec3] = Field(
        default_factory=lambda: [(10.0, 10.0, 0.5), (-10.0, 10.0, 2.5), (-10.0, -10.0, 0.5), (10.0, -10.0, 2.5)]
    )
    tag_offsets: list[Vec3] = Field(default_factory=lambda: [(0.2, 0.0, 0.0), (-0.2, 0.0, 0.0)])
    uwb_period: float = Field(default=0.05, gt=0)
    uwb_sigma: float = Field(default=math.sqrt(0.05), ge=0)

    # Lidar
    lidar_rate: float = Field(default=300.0, gt=0)
    lidar_sigma: float = Field(default=0.05, ge=0)
    rays_per_step: Optional[int] = Field(default=None, ge=1)
    room_min: Optional[Vec3] = None
    room_max: Optional[Vec3] = None

    # Initial estimate
    rot_init_var: Optional[float] = Field(default=None, ge=0)
    pos_init_var: Optional[float] = Field(default=None, ge=0)
    init_derivatives: InitDerivatives = InitDerivatives.ZERO
    sigma_gamma: float = Field(default=10.0, gt=0)
    sigma_nu: float = Field(default=10.0, gt=0)
    # Pose prior on the first knot, centred on its initial value
    anchor_rot_sigma: float = Field(default=1.0, gt=0)
    anchor_pos_sigma: float = Field(default=1.0, gt=0)

    # Fixed-lag (MLCME)
    window: float = Field(default=1.0, gt=0)
    slide: float = Field(default=0.5, gt=0)
    extrinsic_information: float = Field(default=1e2, gt=0)
    init_translation_error: float = Field(default=0.1, ge=0)
    init_rotation_error_deg: float = Field(default=5.0, ge=0)

    # Outputs
    output_dir: Optional[Path] = None
    record_timing: Optional[bool] = None
    solver: Optional[SolverOptionsOverrides] = None

    @field_validator("omegas", "dts", mode="before")
    @classmethod
    def split_grids(cls, value):
        return _split_list(value)

    @field_validator("reprs", "modes", mode="before")
    @classmethod
    def split_enum_grids(cls, value):
        value = _split_list(value)
        if isinstance(value, list):
            return [item.lower() if isinstance(item, str) else item for item in value]
        return value

    @field_validator("anchors", "tag_offsets", mode="before")
    @classmethod
    def split_vector_lists(cls, value):
        return _split_vectors(value)

    @field_validator("room_min", "room_max", mode="before")
    @classmethod
    def split_vector(cls, value):
        return _split_vector(value)

    @model_validator(mode="after")
    def _fill_scenario_defaults(self) -> "ExperimentConfig":
        for key, value in SCENARIO_DEFAULTS[self.scenario].items():
            if getattr(self, key) is None:
                setattr(self, key, list(value) if isinstance(value, list) else value)
        for key in ("omegas", "dts", "reprs", "modes"):
            if not getattr(self, key):
                raise ValueError(f"grid '{key}' must not be empty")
        if any(dt <= 0 for dt in self.dts):
            raise ValueError("knot spacings must be positive")
        if self.scenario != Scenario.UWB_BATCH and any(lo >= hi for lo, hi in zip(self.room_min, self.room_max)):
            raise ValueError("room_min must be below room_max on every axis")
        return self

    @property
    def grid_size(self) -> int:
        return len(self.omegas) * len(self.dts) * len(self.reprs) * len(self.modes)
