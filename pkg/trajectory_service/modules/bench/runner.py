from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

from tqdm import tqdm

from config import Settings, settings
from logger_config import logger
from modules.bench.scenarios import GridPoint, ScenarioRunner, build_grid, record_timing, scenario_runner
from modules.simulation.measurement_io import save_measurements
from modules.utils import output_path, save_csv, save_text
from schemas.experiment import ExperimentConfig, Scenario
from schemas.measurements import MeasurementSet
from schemas.results import CSV_COLUMNS, RunResult

TIMING_COLUMNS = ("scenario", "repr", "dt", "omega", "cf_time_s", "ap_time_s", "cf_over_ap")
TRACE_COLUMNS = ("scenario", "repr", "mode", "dt", "omega", "window_end", "rot_err_deg", "trans_err_m", "tx", "ty", "tz")
PER_LIDAR_COLUMNS = ("scenario", "repr", "mode", "dt", "omega", "lidar", "pos_rmse", "rot_rmse")


class ExperimentRunner:
    """Runs every grid point of an experiment and writes the CSV reports."""

    def __init__(self, cfg: ExperimentConfig, settings: Settings = settings, threads: Optional[int] = None):
        self.cfg = cfg
        self.settings = settings
        self.threads = threads or settings.threads
        self.scenario: ScenarioRunner = scenario_runner(cfg)
        self.grid: list[GridPoint] = build_grid(cfg)

    def simulate(self) -> list[MeasurementSet]:
        """One measurement set per Omega value, shared by every grid point with that Omega."""
        logger.info(f"Simulating {self.cfg.scenario.value} measurements for {len(self.cfg.omegas)} Omega values")
        return [self.scenario.simulate(index) for index in range(len(self.cfg.omegas))]

    def run(self, measurements: Optional[list[MeasurementSet]] = None) -> list[RunResult]:
        """
        Estimate every grid point, possibly in parallel.

        Results come back in grid order whatever the completion order.
        """
        measurements = measurements if measurements is not None else self.simulate()
        started = time.time()
        logger.info(f"Running {len(self.grid)} grid points on {self.threads} thread(s)")

        def task(point: GridPoint) -> RunResult:
            return self.scenario.run(point, measurements[point.omega_index])

        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            results = list(
                tqdm(executor.map(task, self.grid), total=len(self.grid), desc=self.cfg.name, disable=len(self.grid) < 2)
            )

        failed = sum(not result.converged for result in results)
        if failed:
            logger.warning(f"{failed} of {len(results)} grid points did not converge")
        logger.success(f"Experiment '{self.cfg.name}' finished in {time.time() - started:.2f}s")
        return results

    def output_dir(self, out: Optional[Path] = None) -> Path:
        return Path(out or self.cfg.output_dir or self.settings.output_dir)

    def write_reports(self, results: list[RunResult], out: Optional[Path] = None) -> list[Path]:
        """Write `<name>_results.csv` plus the timing and fixed-lag side reports that apply."""
        folder = self.output_dir(out)
        name = self.cfg.name
        written = [save_csv((r.to_row() for r in results), CSV_COLUMNS, output_path(folder, f"{name}_results.csv"))]
        if record_timing(self.cfg):
            written.append(save_csv(timing_rows(results), TIMING_COLUMNS, output_path(folder, f"{name}_solve_time_ratio.csv")))
        if self.cfg.scenario == Scenario.MLCME:
            written.append(save_csv(trace_rows(results), TRACE_COLUMNS, output_path(folder, f"{name}_extrinsic_trace.csv")))
            written.append(save_csv(per_lidar_rows(results), PER_LIDAR_COLUMNS, output_path(folder, f"{name}_per_lidar.csv")))
        for path in written:
            logger.info(f"Wrote {path}")
        return written

    def write_solve_reports(self, results: list[RunResult], out: Optional[Path] = None) -> Optional[Path]:
        """Write `<name>_solve_reports.jsonl`: the iteration records of every solve, tagged with its grid point."""
        chunks = []
        for index, result in enumerate(results):
            for report in result.reports:
                chunks.append(report.to_jsonl({"grid_point": index, **result.coordinates()}))
        path = save_text("".join(chunks), output_path(self.output_dir(out), f"{self.cfg.name}_solve_reports.jsonl"))
        if path is not None:
            logger.info(f"Wrote {path}")
        return path

    def dump_measurements(self, measurements: list[MeasurementSet], out: Optional[Path] = None) -> list[Path]:
        folder = self.output_dir(out)
        paths = []
        for omega, measurement_set in zip(self.cfg.omegas, measurements):
            path = save_measurements(measurement_set, output_path(folder, f"{self.cfg.name}_omega_{omega:g}.meas"))
            if path is not None:
                paths.append(path)
        return paths


def run_experiment(cfg: ExperimentConfig, threads: Optional[int] = None) -> list[RunResult]:
    return ExperimentRunner(cfg, threads=threads).run()


def timing_rows(results: list[RunResult]) -> list[dict]:
    """CF over AP solve time for every (scenario, repr, dt, omega) that has both modes timed."""
    cells: dict[tuple, dict[str, float]] = {}
    for result in results:
        if result.solve_time_s is None:
            continue
        key = (result.scenario, result.repr, result.dt, result.omega)
        cells.setdefault(key, {})[result.mode] = result.solve_time_s
    rows = []
    for (scenario, pose_repr, dt, omega), times in cells.items():
        cf, ap = times.get("cf"), times.get("ap")
        ratio = cf / ap if cf is not None and ap else None
        rows.append(
            {"scenario": scenario, "repr": pose_repr, "dt": dt, "omega": omega, "cf_time_s": cf, "ap_time_s": ap, "cf_over_ap": ratio}
        )
    return rows


def trace_rows(results: list[RunResult]) -> list[dict]:
    rows = []
    for result in results:
        for end, rot_err, trans_err, tx, ty, tz in result.extrinsic_trace:
            rows.append(
                {**result.coordinates(), "window_end": end, "rot_err_deg": rot_err, "trans_err_m": trans_err, "tx": tx, "ty": ty, "tz": tz}
            )
    return rows


def per_lidar_rows(results: list[RunResult]) -> list[dict]:
    return [
        {**result.coordinates(), "lidar": lidar, "pos_rmse": pos, "rot_rmse": rot}
        for result in results
        for lidar, (pos, rot) in enumerate(result.per_lidar)
    ]


__all__ = ["ExperimentRunner", "run_experiment", "timing_rows", "trace_rows", "per_lidar_rows"]
