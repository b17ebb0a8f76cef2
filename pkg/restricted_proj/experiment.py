"""
Seeded end-to-end experiments

An ExperimentRunner executes one ExperimentConfig:

    generate -> verify_regularity -> select_good_sets -> finitary_check (per δ)
             -> moment-curve stage -> dimensions -> lie verification

and writes every report into a run directory named by the config hash,
together with a manifest of content hashes. Outputs depend only on the
config, never on timing or the number of worker threads.
"""

import hashlib
import json
import logging
import math
import time
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from . import __version__
from .energy import energy_matrix, select_good_sets, summarize_energies, write_energy_profile
from .errors import ReportSchemaError
from .geometry import ProjectionFamily, factor_map, sample_annulus
from .lie import lie_verification_table
from .models import (
    DimensionReport,
    ExperimentConfig,
    FileRecord,
    GoodSetSelection,
    RegularityReport,
    RunManifest,
    Settings,
    StageTiming,
    SweepReport,
    TruncatedEnergyParams,
)
from .pointcloud import PointCloud, generate, save_cloud, verify_regularity
from .projection import finitary_check, moment_curve_concentration, projected_dimensions
from .settings import get_settings

logger = logging.getLogger(__name__)

MOMENT_GRID_SIZE = 33
LIE_TRIALS = 200


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate an experiment config file (every violated constraint is listed)."""
    path = Path(path)
    with open(path, "r") as f:
        return ExperimentConfig.model_validate_json(f.read())


def _write_json(path: Path, payload: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(payload)
        f.write("\n")
    return path


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _exponent(delta: float) -> int:
    return int(round(-math.log2(delta)))


class ExperimentRunner:
    """
    Run one experiment config and record its artifacts.

    Args:
        config (ExperimentConfig): The validated config
        output_root (str, optional): Root for run directories; config.output_dir
            wins, then this, then RPROJ_OUTPUT_ROOT
        settings (Settings, optional): Resolved environment settings
    """

    def __init__(
        self,
        config: ExperimentConfig,
        output_root: Optional[str] = None,
        settings: Optional[Settings] = None,
    ):
        self.config = config
        self.settings = settings or get_settings(load_env_file=False)
        self.workers = config.workers or self.settings.workers
        root = config.output_dir or output_root or self.settings.output_root
        self.run_dir = Path(root) / config.config_hash()

        self._cloud: Optional[PointCloud] = None
        self._family: Optional[ProjectionFamily] = None
        self._t_samples: Optional[np.ndarray] = None
        self._timings: List[StageTiming] = []
        self._files: List[Path] = []
        self._checks: Dict[str, bool] = {}
        self._failures: List[str] = []
        self._summary: List[Dict[str, object]] = []
        self._regularity_report: Optional[RegularityReport] = None
        self._selection: Optional[GoodSetSelection] = None

    @property
    def cloud(self) -> PointCloud:
        if self._cloud is None:
            generated = generate(self.config.generator, seed=self.config.seed)
            self._cloud = generated.with_claims(alpha=self.config.alpha, delta0=self.config.delta0)
        return self._cloud

    @property
    def family(self) -> ProjectionFamily:
        if self._family is None:
            self._family = ProjectionFamily.from_spec(self.config.family, self.cloud.n).require_valid()
        return self._family

    @property
    def t_samples(self) -> np.ndarray:
        """Parameters shared by every stage and every δ of the run."""
        if self._t_samples is None:
            self._t_samples = sample_annulus(self.family.m, self.config.t_sample_count, seed=self.config.seed)
        return self._t_samples

    def _record(self, path: Path) -> Path:
        self._files.append(path)
        return path

    def _check(self, name: str, passed: bool, detail: str) -> None:
        self._checks[name] = passed
        self._summary.append({"check": name, "passed": passed, "detail": detail})
        if not passed:
            self._failures.append(f"{name}: {detail}")
            logger.warning(f"Check {name} failed: {detail}")

    def _stage(self, name: str, func) -> None:
        logger.info(f"Stage {name} started")
        start = time.perf_counter()
        try:
            func()
        except Exception as e:
            logger.error(f"Stage {name} failed: {e}")
            self._checks[name] = False
            self._failures.append(f"{name}: {e}")
            self._summary.append({"check": name, "passed": False, "detail": str(e)})
        self._timings.append(StageTiming(stage=name, seconds=time.perf_counter() - start, passed=self._checks.get(name)))

    def _generate(self) -> None:
        cloud = self.cloud
        self._record(save_cloud(cloud, self.run_dir / "cloud.txt"))
        self._summary.append({"check": "generate", "passed": True, "detail": f"N={cloud.size} n={cloud.n}"})

    def _regularity(self) -> None:
        self._regularity_report = verify_regularity(self.cloud, seed=self.config.seed)
        self._record(_write_json(self.run_dir / "regularity.json", self._regularity_report.model_dump_json(indent=2)))
        report = self._regularity_report
        self._check("regularity", report.passed, f"worst ratio {report.worst_ratio:.6g} vs C {report.claimed_C:.6g}")

    def _energy(self) -> None:
        params = TruncatedEnergyParams(alpha=self.config.alpha, delta0=self.config.delta0)
        energies = energy_matrix(self.cloud, self.family, params, self.t_samples, self.workers)
        averaged = summarize_energies(energies, self.family.m, params.delta0)
        selection = select_good_sets(
            self.cloud, self.family, params, self.config.epsilon, self.t_samples, energies=energies
        )
        self._selection = selection
        for profile in selection.profiles:
            self._record(write_energy_profile(profile, self.run_dir / "energy" / f"profile_{profile.t_index:04d}.csv"))
        payload = {
            "averaged": json.loads(averaged.model_dump_json()),
            "selection": json.loads(selection.model_dump_json(exclude={"profiles"})),
        }
        self._record(_write_json(self.run_dir / "good_sets.json", json.dumps(payload, indent=2)))
        self._check(
            "good_sets",
            selection.rejected_t_fraction <= selection.chebyshev_bound,
            f"rejected {selection.rejected_t_fraction:.4g} of parameters, bound {selection.chebyshev_bound:.4g}",
        )

    def _finitary(self) -> None:
        regularity = self._regularity_report.worst_ratio
        rows = []
        worst = 0.0
        for delta in sorted(self.config.delta_ladder, reverse=True):
            report = finitary_check(
                self.cloud,
                self.family,
                delta,
                self.config.epsilon,
                self.t_samples,
                bound_form=self.config.bound_form,
                a_emp=self.config.a_emp,
                regularity=regularity,
                workers=self.workers,
                seed=self.config.seed,
            )
            self._record(_write_json(self.run_dir / f"sweep_{_exponent(delta):02d}.json", report.model_dump_json(indent=2)))
            worst = max(worst, report.exceptional_fraction)
            for sample in report.samples:
                row = {f"t_{i + 1}": v for i, v in enumerate(sample.t)}
                row.update(
                    delta=delta,
                    bad_fraction=sample.bad_fraction,
                    removed_fraction=sample.removed_fraction,
                    good=sample.good,
                )
                rows.append(row)
        sweep_csv = self.run_dir / "sweep.csv"
        pd.DataFrame(rows).to_csv(sweep_csv, index=False, float_format="%.17g")
        self._record(sweep_csv)
        limit = self.config.max_exceptional_fraction
        self._check("finitary", worst <= limit, f"largest exceptional fraction {worst:.4g}, limit {limit:.4g}")

    def _moment(self) -> None:
        selection = self._selection
        if not selection.good_t_indices:
            logger.warning("No good parameter for the moment-curve stage")
            return
        index = selection.good_t_indices[0]
        survivors = selection.profiles[index].surviving_indices
        triples = factor_map(self.family, self.t_samples[index], self.cloud.points[survivors])
        delta = min(self.config.delta_ladder) if self.config.delta_ladder else self.config.delta0
        report = moment_curve_concentration(
            triples,
            delta,
            self.config.epsilon,
            np.linspace(0.0, 2.0, MOMENT_GRID_SIZE),
            alpha=self.config.alpha,
            c_hat=selection.c_prime,
            workers=self.workers,
        )
        self._record(_write_json(self.run_dir / "moment.json", report.model_dump_json(indent=2, exclude={"reports"})))
        self._summary.append({"check": "moment", "passed": True, "detail": f"good s fraction {report.good_s_fraction:.4g}"})

    def _dimensions(self) -> None:
        count = min(self.config.dimension_samples, self.t_samples.shape[0])
        t0 = self.config.generator.t0 if self.config.generator.kind == "kernel_hyperplane" else None
        report = projected_dimensions(self.cloud, self.family, self.t_samples[:count], t0=t0, workers=self.workers)
        self._record(_write_json(self.run_dir / "dimensions.json", report.model_dump_json(indent=2)))
        self._summary.append({"check": "dimensions", "passed": True, "detail": f"median slope {report.median_slope:.4f}"})

    def _lie(self) -> None:
        table = lie_verification_table(ns=(self.cloud.n,), trials=LIE_TRIALS, seed=self.config.seed)
        path = self.run_dir / "lie.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            f.write(table.to_string(index=False))
            f.write("\n")
        self._record(path)
        self._check("lie", bool(table["passed"].all()), f"largest xi residual {table['xi_vs_projection'].max():.3e}")

    def run(self) -> RunManifest:
        """
        Execute all enabled stages and write the manifest.

        Returns:
            RunManifest: file hashes, per-stage timings and check outcomes;
            `passed` is true iff every enabled check passed
        """
        config = self.config
        self.run_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"Running experiment {config.config_hash()} into {self.run_dir}")
        _write_json(self.run_dir / "config.json", config.model_dump_json(indent=2, exclude={"output_dir", "workers"}))
        self._record(self.run_dir / "config.json")

        self._stage("generate", self._generate)
        if self._checks.get("generate", True):
            self._stage("regularity", self._regularity)
            if config.run_energy:
                self._stage("good_sets", self._energy)
                if self._selection is not None:
                    self._stage("moment", self._moment)
            if config.run_finitary and self._regularity_report is not None:
                self._stage("finitary", self._finitary)
            if config.dimension_samples:
                self._stage("dimensions", self._dimensions)
            if config.run_lie:
                self._stage("lie", self._lie)

        summary_csv = self.run_dir / "summary.csv"
        pd.DataFrame(self._summary, columns=["check", "passed", "detail"]).to_csv(summary_csv, index=False)
        self._record(summary_csv)

        records = [
            FileRecord(path=str(p.relative_to(self.run_dir)), sha256=_sha256(p), size=p.stat().st_size)
            for p in self._files
        ]
        manifest = RunManifest(
            config=config,
            code_version=__version__,
            run_dir=str(self.run_dir),
            timings=self._timings,
            files=records,
            checks=self._checks,
            failures=self._failures,
            passed=all(self._checks.values()) and not self._failures,
        )
        _write_json(self.run_dir / "manifest.json", manifest.model_dump_json(indent=2))
        status = "passed" if manifest.passed else "FAILED"
        logger.info(f"Experiment {config.config_hash()} {status}: {self._checks}")
        return manifest


def run(config: ExperimentConfig, output_root: Optional[str] = None, settings: Optional[Settings] = None) -> RunManifest:
    return ExperimentRunner(config, output_root=output_root, settings=settings).run()


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------

PLOT_COLUMNS = ["source", "series", "x", "y"]


def _report_paths(paths: Iterable[Union[str, Path]]) -> List[Path]:
    found = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            found.extend(sorted(p.glob("sweep_*.json")))
            if (p / "dimensions.json").exists():
                found.append(p / "dimensions.json")
        else:
            found.append(p)
    return found


def _load_report(path: Path) -> Union[SweepReport, DimensionReport]:
    try:
        with open(path, "r") as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ReportSchemaError(str(path), f"unreadable report: {e}")
    if not isinstance(raw, dict):
        raise ReportSchemaError(str(path), "report must be a JSON object")
    try:
        if "bound_form" in raw:
            return SweepReport.model_validate(raw)
        if "median_slope" in raw:
            return DimensionReport.model_validate(raw)
    except ValidationError as e:
        raise ReportSchemaError(str(path), f"does not match the report schema: {e.errors()[0]['msg']} at {e.errors()[0]['loc']}")
    raise ReportSchemaError(str(path), "neither a sweep report nor a dimension report")


def plotdata(paths: Iterable[Union[str, Path]]) -> pd.DataFrame:
    """
    Flatten reports into plotting series.

    Sweep reports give ("delta_scaling", log δ, log exceptional fraction),
    with the fraction floored at one over the number of parameter samples.
    Dimension reports give ("dimension_vs_distance", ‖t - t0‖, slope) when
    t0 was recorded, and ("box_counts[i]", log 1/δ, log N(δ)) per sample.

    Args:
        paths: Report files, or run directories to scan

    Returns:
        pd.DataFrame: columns source, series, x, y

    Raises:
        ReportSchemaError: for a file that is not a well-formed report
    """
    rows = []
    for path in _report_paths(paths):
        report = _load_report(path)
        if isinstance(report, SweepReport):
            floor = 1.0 / max(1, len(report.samples))
            rows.append((str(path), "delta_scaling", math.log(report.delta), math.log(max(report.exceptional_fraction, floor))))
            continue
        for i, sample in enumerate(report.samples):
            if sample.distance_to_t0 is not None:
                rows.append((str(path), "dimension_vs_distance", sample.distance_to_t0, sample.estimate.slope))
            for x, y in sample.estimate.series():
                rows.append((str(path), f"box_counts[{i}]", x, y))
    return pd.DataFrame(rows, columns=PLOT_COLUMNS)
