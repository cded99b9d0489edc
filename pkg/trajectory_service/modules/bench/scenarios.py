"""
Benchmark scenarios: UWB batch, lidar batch and the two-lidar fixed-lag run.

Each scenario simulates measurements once per Omega value and then runs one
estimation per grid point (dt, representation, kinematics mode).
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import settings
from errors import TrajectoryError
from logger_config import logger
from modules.bench.metrics import evaluate_rmse, pose_errors, sample_times
from modules.estimation.factors import PointToPlaneFactor, UwbFactor, knot_prior_factor, motion_prior_factors
from modules.estimation.fixed_lag import fixed_lag_run
from modules.estimation.problem import Problem
from modules.estimation.solver import solve
from modules.gp.trajectory import GpTrajectory
from modules.lie.se3 import Pose3, se3_log
from modules.lie.so3 import so3_exp
from modules.simulation.ground_truth import GtTrajectory, MountedTrajectory, MountSchedule, PoseFunction, mount_pose
from modules.simulation.lidar import BoxRoom, simulate_lidar
from modules.simulation.uwb import simulate_uwb
from modules.utils import rng_stream
from schemas.experiment import ExperimentConfig, InitDerivatives, Scenario
from schemas.measurements import LidarMeasurements, MeasurementSet
from schemas.results import RunResult
from schemas.solver import SolveReport, SolverOptions
from schemas.trajectory_types import KinematicsMode, PoseRepr, SupportState

INIT_STREAM = 10
# Factor weights need a positive sigma even for noiseless data
MIN_FACTOR_SIGMA = 1e-3

LIDAR0_MOUNT = mount_pose((0.0, 45.0, 0.0), (0.0, 0.0, 0.0))
LIDAR1_MOUNT = mount_pose((180.0, 0.0, 0.0), (-0.5, 0.0, -0.25))
LIDAR1_SLIPPED = mount_pose((180.0, 0.0, 0.0), (-0.5, 0.0, -0.35))
SLIP_INTERVAL = (10.0, 20.0)


@dataclass(frozen=True, slots=True)
class GridPoint:
    index: int
    omega_index: int
    dt_index: int
    omega: float
    dt: float
    pose_repr: PoseRepr
    mode: KinematicsMode


def build_grid(cfg: ExperimentConfig) -> list[GridPoint]:
    """Grid points in Omega-major, then dt, representation and mode order."""
    points = []
    for omega_index, omega in enumerate(cfg.omegas):
        for dt_index, dt in enumerate(cfg.dts):
            for pose_repr in cfg.reprs:
                for mode in cfg.modes:
                    points.append(GridPoint(len(points), omega_index, dt_index, omega, dt, pose_repr, mode))
    return points


def solver_options(cfg: ExperimentConfig) -> SolverOptions:
    return SolverOptions.from_settings(settings).overrided(cfg.solver)


def record_timing(cfg: ExperimentConfig) -> bool:
    return settings.record_timing if cfg.record_timing is None else cfg.record_timing


def initial_trajectory(
    gt: PoseFunction,
    point: GridPoint,
    cfg: ExperimentConfig,
    rng: np.random.Generator,
    t_end: float,
) -> GpTrajectory:
    """
    Knots at k * dt covering [0, t_end], placed on the ground truth corrupted by
    Gaussian noise of the configured rotation/position variances.
    """
    count = int(np.ceil(t_end / point.dt - 1e-9)) + 1
    times = point.dt * np.arange(count)
    truth = gt.kinematics(times)
    rotation_noise = np.sqrt(cfg.rot_init_var) * rng.standard_normal((count, 3))
    position_noise = np.sqrt(cfg.pos_init_var) * rng.standard_normal((count, 3))
    rotation = truth.rotation @ so3_exp(rotation_noise)
    position = truth.position + position_noise

    knots = []
    for k in range(count):
        if cfg.init_derivatives == InitDerivatives.GROUND_TRUTH:
            knots.append(
                SupportState(
                    rotation[k], truth.omega[k], truth.alpha[k], position[k], truth.velocity[k], truth.acceleration[k]
                )
            )
        else:
            knots.append(SupportState.at_rest(rotation[k], position[k]))
    return GpTrajectory(
        0.0,
        point.dt,
        knots,
        pose_repr=point.pose_repr,
        mode=point.mode,
        sigma_gamma=cfg.sigma_gamma,
        sigma_nu=cfg.sigma_nu,
    )


def perturb_pose(pose: Pose3, rng: np.random.Generator, translation_error: float, rotation_error_rad: float) -> Pose3:
    """Pose moved by fixed-size errors along random directions."""
    axis = rng.standard_normal(3)
    axis /= np.linalg.norm(axis)
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    return Pose3(pose.rotation @ so3_exp(rotation_error_rad * axis), pose.translation + translation_error * direction)


def timed_solve(problem: Problem, options: SolverOptions, repeats: int) -> tuple[SolveReport, Optional[float]]:
    """Solve `repeats` times from the same initial state; the median wall time is reported."""
    if repeats <= 1:
        report = solve(problem, options)
        return report, (report.wall_time if repeats == 1 else None)
    initial = problem.state().copy()
    times = []
    for _ in range(repeats):
        problem.commit(initial.copy())
        report = solve(problem, options)
        times.append(report.wall_time)
    return report, float(np.median(times))


def point_to_plane(
    traj_id: int,
    points: LidarMeasurements,
    room: BoxRoom,
    sigma: float,
    extrinsic=None,
) -> Optional[PointToPlaneFactor]:
    if len(points) == 0:
        return None
    return PointToPlaneFactor(
        traj_id,
        points.t,
        points.points,
        room.normals[points.wall],
        room.offsets[points.wall],
        max(sigma, MIN_FACTOR_SIGMA),
        extrinsic,
    )


class ScenarioRunner(ABC):
    """Simulation and estimation for one scenario of an experiment."""

    def __init__(self, cfg: ExperimentConfig) -> None:
        self.cfg = cfg
        self.options = solver_options(cfg)
        self.repeats = settings.timing_repeats if record_timing(cfg) else 0

    @abstractmethod
    def ground_truth(self, omega: float) -> PoseFunction: ...

    @abstractmethod
    def simulate(self, omega_index: int) -> MeasurementSet: ...

    @abstractmethod
    def estimate(self, point: GridPoint, measurements: MeasurementSet, result: RunResult) -> None: ...

    def run(self, point: GridPoint, measurements: MeasurementSet) -> RunResult:
        """Estimate one grid point; failures are recorded in the result."""
        result = RunResult(
            scenario=self.cfg.scenario.value,
            repr=point.pose_repr.value,
            mode=point.mode.value,
            dt=point.dt,
            omega=point.omega,
            seed=self.cfg.seed,
        )
        try:
            self.estimate(point, measurements, result)
        except TrajectoryError as exc:
            result.converged = False
            result.message = f"{type(exc).__name__}: {exc}"
            logger.warning(f"Grid point {point.index} failed: {result.message}")
        return result

    def init_rng(self, point: GridPoint, traj_id: int = 0) -> np.random.Generator:
        return rng_stream(self.cfg.seed, INIT_STREAM, point.omega_index, point.dt_index, traj_id)

    def _finish(self, result: RunResult, report: SolveReport, wall_time: Optional[float]) -> None:
        result.iters = report.iterations
        result.converged = report.converged
        result.message = report.message
        result.solve_time_s = wall_time
        result.reports = [report]


class UwbBatchRunner(ScenarioRunner):
    def ground_truth(self, omega: float) -> GtTrajectory:
        return GtTrajectory(self.cfg.gt_kind, omega)

    def simulate(self, omega_index: int) -> MeasurementSet:
        cfg = self.cfg
        ranges = simulate_uwb(
            self.ground_truth(cfg.omegas[omega_index]),
            cfg.anchors,
            cfg.tag_offsets,
            cfg.uwb_period,
            cfg.uwb_sigma,
            cfg.seed,
            cfg.duration,
            stream=(omega_index,),
        )
        return MeasurementSet(ranges=ranges)

    def estimate(self, point: GridPoint, measurements: MeasurementSet, result: RunResult) -> None:
        cfg = self.cfg
        gt = self.ground_truth(point.omega)
        traj = initial_trajectory(gt, point, cfg, self.init_rng(point), cfg.duration)
        problem = Problem()
        traj_id = problem.add_trajectory(traj)
        problem.add_factor(motion_prior_factors(traj_id, traj))
        ranges = measurements.ranges
        tag_offsets, anchors = np.asarray(cfg.tag_offsets), np.asarray(cfg.anchors)
        problem.add_factor(
            UwbFactor(
                traj_id,
                ranges.t,
                tag_offsets[ranges.tag],
                anchors[ranges.anchor],
                ranges.d,
                max(cfg.uwb_sigma, MIN_FACTOR_SIGMA),
            )
        )
        # Collinear tags leave the roll about their baseline free
        problem.add_factor(knot_prior_factor(traj_id, traj, 0, cfg.anchor_rot_sigma, cfg.anchor_pos_sigma))
        logger.info(f"Grid point {point.index}: {problem.summary()}")
        report, wall_time = timed_solve(problem, self.options, self.repeats)
        self._finish(result, report, wall_time)
        result.pos_rmse, result.rot_rmse = evaluate_rmse(traj, gt, settings.eval_sample_period, 0.0, cfg.duration)


class LidarBatchRunner(ScenarioRunner):
    """One lidar at the body origin; the estimated trajectory is the lidar's own."""

    def __init__(self, cfg: ExperimentConfig) -> None:
        super().__init__(cfg)
        self.room = BoxRoom.from_bounds(cfg.room_min, cfg.room_max)
        self.rays_per_step = cfg.rays_per_step or settings.rays_per_step

    def ground_truth(self, omega: float) -> GtTrajectory:
        return GtTrajectory(self.cfg.gt_kind, omega)

    def simulate(self, omega_index: int) -> MeasurementSet:
        cfg = self.cfg
        points = simulate_lidar(
            self.ground_truth(cfg.omegas[omega_index]),
            MountSchedule.fixed(Pose3.identity()),
            self.room,
            self.rays_per_step,
            cfg.lidar_rate,
            cfg.lidar_sigma,
            cfg.seed,
            cfg.duration,
            lidar_id=0,
            stream=(omega_index,),
        )
        return MeasurementSet(lidar=points)

    def estimate(self, point: GridPoint, measurements: MeasurementSet, result: RunResult) -> None:
        cfg = self.cfg
        gt = self.ground_truth(point.omega)
        traj = initial_trajectory(gt, point, cfg, self.init_rng(point), cfg.duration)
        problem = Problem()
        traj_id = problem.add_trajectory(traj)
        problem.add_factor(motion_prior_factors(traj_id, traj))
        problem.add_factor(point_to_plane(traj_id, measurements.lidar, self.room, cfg.lidar_sigma))
        logger.info(f"Grid point {point.index}: {problem.summary()}")
        report, wall_time = timed_solve(problem, self.options, self.repeats)
        self._finish(result, report, wall_time)
        result.pos_rmse, result.rot_rmse = evaluate_rmse(traj, gt, settings.eval_sample_period, 0.0, cfg.duration)


class _MlcmeSource:
    """
    Window factors of the two-lidar run: lidar 0 binds trajectory 0; lidar 1
    binds trajectory 1 and, through the estimated extrinsic, trajectory 0.
    """

    def __init__(self, lidar: LidarMeasurements, room: BoxRoom, sigma: float) -> None:
        self.lidar0 = lidar.of_lidar(0)
        self.lidar1 = lidar.of_lidar(1)
        self.room = room
        self.sigma = sigma

    def factors(self, start: float, end: float) -> list:
        first, second = self.lidar0.between(start, end), self.lidar1.between(start, end)
        return [
            point_to_plane(0, first, self.room, self.sigma),
            point_to_plane(1, second, self.room, self.sigma),
            point_to_plane(0, second, self.room, self.sigma, extrinsic=0),
        ]


def lidar_mounts() -> tuple[MountSchedule, MountSchedule]:
    return (
        MountSchedule.fixed(LIDAR0_MOUNT),
        MountSchedule(LIDAR1_MOUNT, LIDAR1_SLIPPED, *SLIP_INTERVAL),
    )


def true_extrinsic(t: float) -> Pose3:
    """Lidar 1 pose in the lidar 0 frame at time t."""
    mount0, mount1 = lidar_mounts()
    return mount0.at(t).inverse().compose(mount1.at(t))


class MlcmeRunner(ScenarioRunner):
    """Two lidars on a ground vehicle, fixed-lag estimation of both trajectories and their extrinsic."""

    def __init__(self, cfg: ExperimentConfig) -> None:
        super().__init__(cfg)
        self.room = BoxRoom.from_bounds(cfg.room_min, cfg.room_max)
        self.rays_per_step = cfg.rays_per_step or settings.rays_per_step
        self.mounts = lidar_mounts()

    def ground_truth(self, omega: float) -> GtTrajectory:
        return GtTrajectory(self.cfg.gt_kind, omega)

    def sensors(self, omega: float) -> list[MountedTrajectory]:
        body = self.ground_truth(omega)
        return [MountedTrajectory(body, mount) for mount in self.mounts]

    def simulate(self, omega_index: int) -> MeasurementSet:
        cfg = self.cfg
        body = self.ground_truth(cfg.omegas[omega_index])
        parts = [
            simulate_lidar(
                body,
                mount,
                self.room,
                self.rays_per_step,
                cfg.lidar_rate,
                cfg.lidar_sigma,
                cfg.seed,
                cfg.duration,
                lidar_id=lidar_id,
                stream=(omega_index,),
            )
            for lidar_id, mount in enumerate(self.mounts)
        ]
        order = np.argsort(np.concatenate([part.t for part in parts]), kind="stable")
        merged = LidarMeasurements(
            np.concatenate([part.t for part in parts])[order],
            np.concatenate([part.lidar for part in parts])[order],
            np.concatenate([part.points for part in parts])[order],
            np.concatenate([part.wall for part in parts])[order],
        )
        return MeasurementSet(lidar=merged)

    def estimate(self, point: GridPoint, measurements: MeasurementSet, result: RunResult) -> None:
        cfg = self.cfg
        sensors = self.sensors(point.omega)
        rotation_error = np.deg2rad(cfg.init_rotation_error_deg)

        problem = Problem()
        for traj_id, sensor in enumerate(sensors):
            rng = self.init_rng(point, traj_id)
            start = perturb_pose(sensor.pose(0.0), rng, cfg.init_translation_error, rotation_error)
            problem.add_trajectory(
                GpTrajectory.from_pose(
                    0.0,
                    point.dt,
                    start.rotation,
                    start.translation,
                    pose_repr=point.pose_repr,
                    mode=point.mode,
                    sigma_gamma=cfg.sigma_gamma,
                    sigma_nu=cfg.sigma_nu,
                )
            )
        rng = self.init_rng(point, len(sensors))
        problem.add_extrinsic(perturb_pose(true_extrinsic(0.0), rng, cfg.init_translation_error, rotation_error))

        def record_extrinsic(end: float, solved: Problem, report: SolveReport) -> None:
            estimate, truth = solved.extrinsics[0], true_extrinsic(end)
            error = se3_log(truth.inverse().compose(estimate))
            result.extrinsic_trace.append(
                (end, float(np.rad2deg(np.linalg.norm(error[:3]))),
                 float(np.linalg.norm(estimate.translation - truth.translation)), *map(float, estimate.translation))
            )

        source = _MlcmeSource(measurements.lidar, self.room, cfg.lidar_sigma)
        reports = fixed_lag_run(
            problem,
            source,
            cfg.window,
            cfg.slide,
            cfg.duration,
            options=self.options,
            extrinsic_information=cfg.extrinsic_information,
            on_window=record_extrinsic,
        )
        result.reports = list(reports)
        result.iters = sum(report.iterations for report in reports)
        result.converged = all(report.converged for report in reports)
        failed = [report for report in reports if not report.converged]
        result.message = failed[0].message if failed else "converged"
        if self.repeats:
            result.solve_time_s = sum(report.wall_time for report in reports)

        position_errors, rotation_errors = [], []
        for traj, sensor in zip(problem.trajectories, sensors):
            times = sample_times(traj, settings.eval_sample_period, 0.0, cfg.duration)
            position, rotation = pose_errors(traj, sensor, times)
            position_errors.append(position)
            rotation_errors.append(rotation)
            result.per_lidar.append((float(np.sqrt(np.mean(position**2))), float(np.sqrt(np.mean(rotation**2)))))
        result.pos_rmse = float(np.sqrt(np.mean(np.concatenate(position_errors) ** 2)))
        result.rot_rmse = float(np.sqrt(np.mean(np.concatenate(rotation_errors) ** 2)))


RUNNERS: dict[Scenario, type[ScenarioRunner]] = {
    Scenario.UWB_BATCH: UwbBatchRunner,
    Scenario.LIDAR_BATCH: LidarBatchRunner,
    Scenario.MLCME: MlcmeRunner,
}


def scenario_runner(cfg: ExperimentConfig) -> ScenarioRunner:
    return RUNNERS[cfg.scenario](cfg)


__all__ = [
    "GridPoint",
    "build_grid",
    "initial_trajectory",
    "perturb_pose",
    "timed_solve",
    "ScenarioRunner",
    "UwbBatchRunner",
    "LidarBatchRunner",
    "MlcmeRunner",
    "true_extrinsic",
    "lidar_mounts",
    "scenario_runner",
]
