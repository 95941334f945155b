#!/usr/bin/env python3
"""
Experiment Pipeline Controller
Orchestrates the STAR-RIS experiments:
Configuration -> Channels -> Scheme trials -> Feasibility re-validation -> CSV / JSON report

    converge   PDD convergence traces for each K at fixed N
    sweep      Monte Carlo throughput versus N for every scheme (paired channels)
    run        one realization, every scheme, summary table
"""

import asyncio
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from . import __version__
from .baselines.schemes import SchemeId, parse_schemes, run_scheme
from .config import ExperimentConfig
from .errors import ConfigError, StarRisError
from .generators.channel_generator import generate_channels
from .models.star_model import phase_differences
from .validators.feasibility import validate_scheme_output

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.10g"
CONVERGENCE_COLUMNS = [
    "outer_iter",
    "inner_iter",
    "scheme",
    "K",
    "throughput",
    "al_objective",
    "delta",
    "rho",
    "phase_residual_max",
    "final",
]
SWEEP_COLUMNS = ["K", "N", "scheme", "mean_rate", "std_rate", "realizations", "converged_fraction"]


@dataclass(frozen=True)
class TrialTask:
    scheme: str
    realization: int
    N: int
    K: int
    collect_trace: bool = False


@dataclass
class TrialOutcome:
    scheme: str
    realization: int
    N: int
    K: int
    rate: float
    converged: bool
    iterations: int
    delta: float
    power: float
    approximation: Optional[str]
    phase_gaps: List[float] = field(default_factory=list)
    trace: Optional[pd.DataFrame] = field(default=None, repr=False)

    def row(self) -> Dict[str, Any]:
        row = asdict(self)
        row.pop("trace")
        row.pop("phase_gaps")
        return row


def run_trial(config: ExperimentConfig, task: TrialTask) -> TrialOutcome:
    """One (scheme, realization, N, K) trial; runs in a worker process when workers > 1"""
    trial_config = config.with_overrides(N=task.N, K=task.K)
    channels = generate_channels(trial_config.system, task.realization)
    scheme = SchemeId.parse(task.scheme)
    result = run_scheme(scheme, channels, trial_config, task.realization)

    report = validate_scheme_output(
        scheme.value,
        scheme.constraint_set,
        result.coefficients,
        result.wmmse.W,
        trial_config.system.pt_watts,
    )
    report.raise_if_invalid()

    trace = None
    if task.collect_trace and result.trace is not None:
        trace = result.trace.to_frame()
        trace.insert(2, "scheme", scheme.value)
        trace.insert(3, "K", task.K)

    gaps = phase_differences(result.coefficients)
    return TrialOutcome(
        scheme=scheme.value,
        realization=task.realization,
        N=task.N,
        K=task.K,
        rate=result.rate,
        converged=result.converged,
        iterations=result.iterations,
        delta=result.delta,
        power=report.power,
        approximation=result.approximation,
        phase_gaps=[float(g) for g in gaps],
        trace=trace,
    )


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """UTF-8, '.' decimals, header row, LF line endings"""
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path, index=False, encoding="utf-8", lineterminator="\n", float_format=CSV_FLOAT_FORMAT
    )
    return path


def summarize_sweep(trials: pd.DataFrame) -> pd.DataFrame:
    """Mean/std (ddof=0) of the rate per (K, N, scheme), sorted"""
    summary = (
        trials.groupby(["K", "N", "scheme"], sort=True)
        .agg(
            mean_rate=("rate", "mean"),
            std_rate=("rate", lambda r: r.std(ddof=0)),
            realizations=("rate", "size"),
            converged_fraction=("converged", "mean"),
        )
        .reset_index()
    )
    return summary.sort_values(["K", "N", "scheme"], kind="mergesort").reset_index(drop=True)[
        SWEEP_COLUMNS
    ]


class ExperimentPipeline:
    """Staged experiment controller with a bounded worker budget"""

    def __init__(self, config: ExperimentConfig, work_dir: Optional[Path] = None):
        self.config = config
        self.work_dir = Path(work_dir) if work_dir is not None else config.output_path
        self.dirs = {
            "convergence": self.work_dir / "convergence",
            "sweep": self.work_dir / "sweep",
            "runs": self.work_dir / "runs",
            "reports": self.work_dir / "reports",
        }
        self.schemes = parse_schemes(list(config.schemes))
        self.failure: Optional[BaseException] = None
        self.outcomes: List[TrialOutcome] = []

        self.results: Dict[str, Any] = {
            "start_time": None,
            "end_time": None,
            "duration": None,
            "stages": {},
            "success": False,
        }

    def _prepare_dirs(self) -> None:
        for dir_path in self.dirs.values():
            dir_path.mkdir(parents=True, exist_ok=True)

    async def _run(self, name: str, stages: List) -> bool:
        logger.info(f"Starting {name} experiment (seed={self.config.seed})")
        self.results["experiment"] = name
        self.results["start_time"] = time.time()

        try:
            self._prepare_dirs()
            for stage in stages:
                if not await stage():
                    return False
            self.results["success"] = True
            return True

        except Exception as e:
            logger.error(f"{name} failed: {e}")
            self.failure = e
            self.results["error"] = str(e)
            return False

        finally:
            self.results["end_time"] = time.time()
            self.results["duration"] = self.results["end_time"] - self.results["start_time"]
            if self.results["success"]:
                logger.info(f"{name} completed in {self.results['duration']:.2f} seconds")

    async def run_convergence(self) -> bool:
        """Convergence traces of every PDD-driven scheme for each K"""
        return await self._run(
            "convergence", [self._stage_1_check_inputs, self._stage_2_convergence_trials, self._stage_3_write_convergence]
        )

    async def run_sweep(self) -> bool:
        """Paired Monte Carlo sweep over N (and K)"""
        return await self._run(
            "sweep", [self._stage_1_check_inputs, self._stage_2_sweep_trials, self._stage_3_write_sweep]
        )

    async def run_single(self) -> bool:
        """Realization 0 at the configured N and K for every scheme"""
        return await self._run(
            "run", [self._stage_1_check_inputs, self._stage_2_single_trials, self._stage_3_write_single]
        )

    # --- stages --------------------------------------------------------

    async def _stage_1_check_inputs(self) -> bool:
        logger.info("=== Stage 1: Input Checks ===")
        try:
            if self.results["experiment"] == "convergence" and not any(s.uses_pdd for s in self.schemes):
                raise ConfigError(
                    "convergence traces need at least one of "
                    f"{[s.value for s in SchemeId if s.uses_pdd]} in experiment.schemes"
                )
            if any(s is SchemeId.CONVENTIONAL_RIS for s in self.schemes):
                n_values = (
                    self.config.n_values if self.results["experiment"] == "sweep" else (self.config.system.N,)
                )
                odd = [n for n in n_values if n % 2]
                if odd:
                    raise ConfigError(f"ConventionalRis needs even N, got {odd}")
            self.results["stages"]["inputs"] = {
                "success": True,
                "schemes": [s.value for s in self.schemes],
            }
            return True
        except StarRisError as e:
            self._fail("inputs", e)
            return False

    async def _stage_2_convergence_trials(self) -> bool:
        logger.info("=== Stage 2: Convergence Trials ===")
        tasks = [
            TrialTask(scheme=s.value, realization=0, N=self.config.system.N, K=k, collect_trace=True)
            for s in self.schemes
            if s.uses_pdd
            for k in self.config.convergence_k_values
        ]
        return await self._trials_stage("trials", tasks)

    async def _stage_2_sweep_trials(self) -> bool:
        logger.info("=== Stage 2: Sweep Trials ===")
        tasks = [
            TrialTask(scheme=s.value, realization=r, N=n, K=k)
            for k in self.config.k_values
            for n in self.config.n_values
            for s in self.schemes
            for r in range(self.config.realizations)
        ]
        return await self._trials_stage("trials", tasks)

    async def _stage_2_single_trials(self) -> bool:
        logger.info("=== Stage 2: Single Realization ===")
        tasks = [
            TrialTask(scheme=s.value, realization=0, N=self.config.system.N, K=self.config.system.K)
            for s in self.schemes
        ]
        return await self._trials_stage("trials", tasks)

    async def _stage_3_write_convergence(self) -> bool:
        logger.info("=== Stage 3: Convergence CSV ===")
        try:
            frame = pd.concat([o.trace for o in self.outcomes if o.trace is not None], ignore_index=True)
            dphi = [c for c in frame.columns if c.startswith("dphi_")]
            frame = frame[CONVERGENCE_COLUMNS + dphi]
            path = write_csv(frame, self.dirs["convergence"] / "convergence.csv")
            self.results["stages"]["output"] = {"success": True, "csv": str(path), "rows": len(frame)}
            logger.info(f"Wrote {len(frame)} trace rows to {path}")
            return True
        except OSError as e:
            self._fail("output", OSError(f"cannot write convergence CSV under {self.dirs['convergence']}: {e}"))
            return False

    async def _stage_3_write_sweep(self) -> bool:
        logger.info("=== Stage 3: Sweep CSV ===")
        try:
            trials = pd.DataFrame([o.row() for o in self.outcomes])
            trials = trials.sort_values(["K", "N", "scheme", "realization"], kind="mergesort")
            summary = summarize_sweep(trials)
            trials_path = write_csv(trials, self.dirs["sweep"] / "trials.csv")
            summary_path = write_csv(summary, self.dirs["sweep"] / "summary.csv")
            self.results["stages"]["output"] = {
                "success": True,
                "csv": str(summary_path),
                "trials_csv": str(trials_path),
                "summary": summary.to_dict(orient="records"),
            }
            logger.info(f"Wrote sweep summary ({len(summary)} rows) to {summary_path}")
            return True
        except OSError as e:
            self._fail("output", OSError(f"cannot write sweep CSV under {self.dirs['sweep']}: {e}"))
            return False

    async def _stage_3_write_single(self) -> bool:
        logger.info("=== Stage 3: Run Summary ===")
        try:
            rows = [o.row() for o in self.outcomes]
            for outcome, row in zip(self.outcomes, rows):
                row["phase_gaps"] = outcome.phase_gaps
            path = self.dirs["runs"] / f"run_seed{self.config.seed}.json"
            with open(path, "w", encoding="utf-8") as f:
                json.dump(rows, f, indent=2, ensure_ascii=False)
            self.results["stages"]["output"] = {"success": True, "json": str(path), "schemes": rows}
            return True
        except OSError as e:
            self._fail("output", OSError(f"cannot write run summary under {self.dirs['runs']}: {e}"))
            return False

    # --- execution -----------------------------------------------------

    async def _trials_stage(self, name: str, tasks: List[TrialTask]) -> bool:
        try:
            self.outcomes = await self._execute(tasks)
            not_converged = [
                f"{o.scheme}(N={o.N}, K={o.K}, r={o.realization})" for o in self.outcomes if not o.converged
            ]
            if not_converged:
                logger.warning(f"{len(not_converged)} trial(s) did not converge: {not_converged}")
            self.results["stages"][name] = {
                "success": True,
                "trials": len(tasks),
                "not_converged": not_converged,
                "workers": self.config.workers,
            }
            return True
        except StarRisError as e:
            self._fail(name, e)
            return False

    async def _execute(self, tasks: List[TrialTask]) -> List[TrialOutcome]:
        """Outcomes in task order regardless of completion order"""
        logger.info(f"Running {len(tasks)} trial(s) on {self.config.workers} worker(s)")
        if self.config.workers == 1:
            outcomes = []
            for task in tasks:
                outcomes.append(run_trial(self.config, task))
                logger.debug(f"Finished {task}")
            return outcomes

        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
            futures = [loop.run_in_executor(pool, run_trial, self.config, task) for task in tasks]
            return list(await asyncio.gather(*futures))

    def _fail(self, stage: str, error: BaseException) -> None:
        logger.error(f"Stage {stage} failed: {error}")
        self.failure = error
        self.results["stages"][stage] = {"success": False, "error": str(error)}

    # --- reporting -----------------------------------------------------

    @property
    def non_converged(self) -> List[str]:
        return self.results.get("stages", {}).get("trials", {}).get("not_converged", [])

    def generate_report(self) -> Dict[str, Any]:
        """Write the JSON experiment report and return it"""
        report = {
            "pipeline_info": {
                "version": __version__,
                "timestamp": time.strftime("%Y-%m-%d %H:%M:%S"),
                "work_directory": str(self.work_dir),
                "seed": self.config.seed,
            },
            "results": self.results,
            "recommendations": self._generate_recommendations(),
        }

        self.dirs["reports"].mkdir(parents=True, exist_ok=True)
        experiment = self.results.get("experiment", "experiment")
        report_file = self.dirs["reports"] / f"{experiment}_report_{int(time.time())}.json"
        with open(report_file, "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2, ensure_ascii=False, default=str)

        logger.info(f"Experiment report saved to: {report_file}")
        return report

    def _generate_recommendations(self) -> List[str]:
        recommendations = []

        if not self.results.get("success", False):
            recommendations.append("Experiment failed - check error messages in results")

        for stage_name, stage_result in self.results.get("stages", {}).items():
            if not stage_result.get("success", False):
                recommendations.append(f"Stage {stage_name} failed - review error details")

        if self.non_converged:
            recommendations.append(
                "Some PDD runs hit the outer iteration cap - raise pdd.outer_max_iter "
                "or lower pdd.c for a faster penalty schedule"
            )

        summary = self.results.get("stages", {}).get("output", {}).get("summary", [])
        for row in summary:
            if row.get("converged_fraction", 1.0) < 1.0:
                recommendations.append(
                    f"{row['scheme']} at N={row['N']}, K={row['K']}: "
                    f"only {row['converged_fraction']:.0%} of realizations converged"
                )

        return recommendations


def run_convergence(config: ExperimentConfig) -> Path:
    """Blocking helper: write the convergence CSV and return its path"""
    pipeline = ExperimentPipeline(config)
    if not asyncio.run(pipeline.run_convergence()):
        raise pipeline.failure or StarRisError("convergence experiment failed")
    return Path(pipeline.results["stages"]["output"]["csv"])


def run_sweep(config: ExperimentConfig) -> Path:
    """Blocking helper: write the sweep summary CSV and return its path"""
    pipeline = ExperimentPipeline(config)
    if not asyncio.run(pipeline.run_sweep()):
        raise pipeline.failure or StarRisError("sweep experiment failed")
    return Path(pipeline.results["stages"]["output"]["csv"])


def run_single(config: ExperimentConfig) -> List[Dict[str, Any]]:
    """Blocking helper: per-scheme summaries of realization 0"""
    pipeline = ExperimentPipeline(config)
    if not asyncio.run(pipeline.run_single()):
        raise pipeline.failure or StarRisError("run failed")
    return pipeline.results["stages"]["output"]["schemes"]
