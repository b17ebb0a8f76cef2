"""
Data models for restricted_proj

Coordinates, reports and configuration records. Array-backed objects
(ProjectionFamily, PointCloud, WeightedMeasure) live next to the code that
uses them; everything here is a plain pydantic model so it can be dumped to
and read back from JSON.
"""

import hashlib
import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SCHEMA_VERSION = "1"


class Point(BaseModel):
    """A point of ℝⁿ in (r1, w, r2) coordinates."""

    model_config = ConfigDict(frozen=True)

    r1: float = Field(description="First coordinate")
    w: Tuple[float, ...] = Field(description="Middle block, length n-2")
    r2: float = Field(description="Last coordinate")

    @field_validator("w")
    @classmethod
    def _middle_block_not_empty(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(value) < 1:
            raise ValueError("w must have length n-2 >= 1 (n >= 3)")
        return value

    @property
    def n(self) -> int:
        return 2 + len(self.w)

    def to_array(self) -> np.ndarray:
        return np.array([self.r1, *self.w, self.r2], dtype=float)

    @classmethod
    def from_array(cls, values) -> "Point":
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size < 3:
            raise ValueError(f"need at least 3 coordinates, got {arr.size}")
        return cls(r1=float(arr[0]), w=tuple(float(v) for v in arr[1:-1]), r2=float(arr[-1]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_array()))


class RElement(Point):
    """Coordinates (r1, w, r2) of the element X(r1, w, r2) of the complement 𝔯."""


class ParamVector(BaseModel):
    """A parameter t ∈ ℝ^{n-2} of the projection family."""

    model_config = ConfigDict(frozen=True)

    t: Tuple[float, ...]

    @field_validator("t")
    @classmethod
    def _not_empty(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(value) < 1:
            raise ValueError("t must have length n-2 >= 1")
        return value

    def to_array(self) -> np.ndarray:
        return np.array(self.t, dtype=float)

    def in_annulus(self) -> bool:
        """Closed membership test for B = {1 <= ‖t‖ <= 2}."""
        r = float(np.linalg.norm(self.to_array()))
        return 1.0 <= r <= 2.0


class MomentVector(BaseModel):
    """A point s of the moment curve parameter interval [0, 2]."""

    model_config = ConfigDict(frozen=True)

    s: float = Field(ge=0.0, le=2.0)


class FamilyValidation(BaseModel):
    """Outcome of validating a projection family (L, q)."""

    valid: bool
    failures: List[str] = Field(default_factory=list)
    det_l: float
    l_norm: float = Field(description="Operator (spectral) norm of L")
    q_min: float = Field(description="min over the unit sphere of q, the smallest eigenvalue of Q")
    q_eigenvalues: List[float]


# ---------------------------------------------------------------------------
# pointcloud
# ---------------------------------------------------------------------------


class ScaleRatio(BaseModel):
    delta: float
    max_ratio: float


class RegularityReport(BaseModel):
    """Measured non-concentration constant of a point cloud."""

    alpha: float
    claimed_C: float
    point_count: int
    worst_ratio: float
    witnessing_pair: Tuple[int, float] = Field(description="(point index, delta) attaining worst_ratio")
    per_scale_table: List[ScaleRatio]
    passed: bool
    subsample_size: Optional[int] = None
    subsample_seed: Optional[int] = None


class DimensionEstimate(BaseModel):
    """Box-counting dimension fit over a dyadic range of scales."""

    slope: float
    intercept: float
    fit_range: Tuple[float, float]
    residual: float
    counts: List[Tuple[float, int]] = Field(description="(delta, occupied boxes)")

    def series(self) -> List[Tuple[float, float]]:
        """(log 1/δ, log N(δ)) pairs for plotting."""
        return [(math.log(1.0 / d), math.log(c)) for d, c in self.counts]


class FamilySpec(BaseModel):
    """Either the standard family or explicit matrices."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["standard", "matrix"] = "standard"
    L: Optional[List[List[float]]] = None
    Q: Optional[List[List[float]]] = None


class GeneratorSpec(BaseModel):
    """
    Parameters of a point cloud generator.

    Only the fields relevant to `kind` are read; the generator rejects
    missing or inconsistent ones.
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal[
        "cantor_product",
        "uniform_segment",
        "alpha_regular_random",
        "kernel_hyperplane",
        "finite_grid",
    ]
    n: int = Field(default=3, ge=3, description="Ambient dimension")
    size: Optional[int] = Field(default=None, description="Number of points (segment, random, hyperplane)")
    coordinates: List[int] = Field(default_factory=lambda: [0], description="Coordinates carrying the Cantor/grid factor")
    ratio: float = Field(default=1.0 / 3.0, description="Cantor contraction ratio")
    branches: int = Field(default=2, description="Cantor pieces per step")
    level: int = Field(default=8, description="Cantor construction depth")
    direction: Optional[List[float]] = Field(default=None, description="Segment direction, or the line carrying a one-coordinate Cantor set (defaults to the r1 axis)")
    target_alpha: Optional[float] = Field(default=None, description="Target exponent for alpha_regular_random")
    t0: Optional[List[float]] = Field(default=None, description="Degenerate parameter for kernel_hyperplane")
    c: float = Field(default=0.0, description="Level set value for kernel_hyperplane")
    k0: Optional[int] = Field(default=None, description="Scale floor exponent, delta0 = 2^-k0")
    family: Optional[FamilySpec] = Field(default=None, description="Family used by kernel_hyperplane (standard if omitted)")


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------


class TruncatedEnergyParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0.0, le=1.0)
    delta0: float = Field(gt=0.0, le=1.0)


class EnergyProfile(BaseModel):
    """Per-point truncated energies of one pushforward measure μ_t."""

    t_index: int
    per_point: List[Tuple[int, float]]
    mean: float
    threshold_used: float
    surviving_indices: List[int]
    in_good_set: bool = True


class AnnulusEntry(BaseModel):
    k: int
    count: int
    mass: float
    weighted: float


class AnnuliProfile(BaseModel):
    point_index: Optional[int]
    alpha: float
    k0: int
    per_k: List[AnnulusEntry]


class BallMassViolation(BaseModel):
    delta: float
    mass: float
    bound: float


class BallMassCheck(BaseModel):
    energy: float
    R: float
    passed: bool
    scales_checked: int
    violations: List[BallMassViolation] = Field(default_factory=list)


class AveragedEnergy(BaseModel):
    """Monte Carlo estimate of ∫_B mean_X Ê_{α,μ_t}(f_t X) dt."""

    per_t_mean: List[float]
    mc_estimate: float
    standard_error: float
    annulus_volume: float
    log_scale: float = Field(description="|log2 delta0|")
    kappa: float = Field(description="mc_estimate / |log2 delta0|")


class GoodSetSelection(BaseModel):
    """The two Chebyshev cuts selecting B′ and the sets F_t."""

    epsilon: float
    c_prime: float
    t_threshold: float
    x_threshold: float
    good_t_indices: List[int]
    rejected_t_fraction: float
    chebyshev_bound: float = Field(description="delta0^epsilon")
    exceptional_point_fractions: Dict[int, float]
    profiles: List[EnergyProfile]


class SuperlevelEstimate(BaseModel):
    R: float
    measure_estimate: float
    standard_error: float
    chebyshev_bound: float
    sample_count: int


# ---------------------------------------------------------------------------
# projection-analysis
# ---------------------------------------------------------------------------


class ConcentrationReport(BaseModel):
    """Windowed counts of one scalar projection of a cloud.

    For the moment-curve stage `t` holds the single moment parameter [s].
    """

    t: List[float]
    delta: float
    per_point_counts: List[Tuple[int, int]]
    max_count: int
    bad_fraction: float
    bound_used: float
    surviving_indices: List[int]


class TSampleSummary(BaseModel):
    t: List[float]
    max_count: int
    bad_fraction: float
    removed_fraction: float
    good: bool
    alternate_good: bool


class SweepConfigEcho(BaseModel):
    seed: Optional[int]
    point_count: int
    alpha: float
    epsilon: float
    delta0: float
    a_emp: float


class SweepReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    delta: float
    bound_form: Literal["theorem", "proof"]
    realization: Literal["projection", "adjoint"] = "projection"
    bound_used: float
    alternate_bound: float
    removal_budget: float
    regularity_constant: float
    samples: List[TSampleSummary]
    exceptional_fraction: float = Field(ge=0.0, le=1.0)
    alternate_exceptional_fraction: float = Field(ge=0.0, le=1.0)
    config: SweepConfigEcho


class TransversalityEstimate(BaseModel):
    epsilon: float
    measure_estimate: float
    standard_error: float
    sample_count: int
    seed: Optional[int] = None
    annulus_volume: float


class MomentCurveReport(BaseModel):
    delta: float
    epsilon: float
    alpha: float
    c_hat: float
    bound_used: float
    reports: List[ConcentrationReport]
    good_s: List[float]
    good_s_fraction: float


class DimensionSample(BaseModel):
    t: List[float]
    distance_to_t0: Optional[float] = None
    estimate: DimensionEstimate


class DimensionReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    samples: List[DimensionSample]
    median_slope: float


# ---------------------------------------------------------------------------
# lie-son1
# ---------------------------------------------------------------------------


class LieResidual(BaseModel):
    form_residual: float = Field(description="Frobenius norm of A^T Q0 + Q0 A")
    trace_residual: float
    passed: bool


class ContractionStep(BaseModel):
    s: float
    r_plus_residual: float = Field(description="‖Ad(a_s)X(r1,0,0) - e^s X(r1,0,0)‖")
    adjoint_norm: float = Field(description="‖Ad(a_s)X‖ for the full element")
    unipotent_deviation: float = Field(description="‖a_s u_t a_-s - I‖")


class ContractionReport(BaseModel):
    x: RElement
    steps: List[ContractionStep]
    passed: bool


class AdInvarianceReport(BaseModel):
    conjugate: LieResidual
    h_part: LieResidual
    h_part_column_residual: float
    xi_consistency: float
    passed: bool


# ---------------------------------------------------------------------------
# experiment-cli
# ---------------------------------------------------------------------------


class ExperimentConfig(BaseModel):
    """A seeded end-to-end experiment."""

    model_config = ConfigDict(extra="forbid")

    generator: GeneratorSpec
    family: FamilySpec = Field(default_factory=FamilySpec)
    alpha: float = Field(gt=0.0, le=1.0)
    delta0: float = Field(gt=0.0, le=1.0)
    epsilon: float = Field(gt=0.0, lt=1.0)
    t_sample_count: int = Field(default=64, ge=1)
    delta_ladder: List[float] = Field(default_factory=list)
    seed: int = 0
    output_dir: Optional[str] = None
    a_emp: float = 1.0
    bound_form: Literal["theorem", "proof"] = "theorem"
    run_finitary: bool = True
    run_energy: bool = True
    run_lie: bool = False
    dimension_samples: int = Field(default=0, ge=0)
    max_exceptional_fraction: float = Field(default=0.1, ge=0.0, le=1.0)
    workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_constraints(self) -> "ExperimentConfig":
        problems = []
        k0 = -math.log2(self.delta0)
        if abs(k0 - round(k0)) > 1e-12:
            problems.append(f"delta0={self.delta0} is not a power of two")
        if self.run_finitary and not self.epsilon < self.alpha / 100:
            problems.append(f"epsilon={self.epsilon} must be < alpha/100={self.alpha / 100}")
        if self.run_finitary and not self.delta_ladder:
            problems.append("delta_ladder is empty")
        for delta in self.delta_ladder:
            k = -math.log2(delta) if delta > 0 else float("nan")
            if not (self.delta0 <= delta <= 1.0):
                problems.append(f"delta={delta} outside [delta0, 1]")
            elif abs(k - round(k)) > 1e-12:
                problems.append(f"delta={delta} is not dyadic")
        if problems:
            raise ValueError("; ".join(problems))
        return self

    def config_hash(self) -> str:
        """Stable short hash naming the run directory (output_dir excluded)."""
        payload = self.model_dump_json(exclude={"output_dir", "workers"})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


class StageTiming(BaseModel):
    stage: str
    seconds: float
    passed: Optional[bool] = None


class FileRecord(BaseModel):
    path: str
    sha256: str
    size: int


class RunManifest(BaseModel):
    schema_version: str = SCHEMA_VERSION
    config: ExperimentConfig
    code_version: str
    run_dir: str
    timings: List[StageTiming]
    files: List[FileRecord]
    checks: Dict[str, bool]
    failures: List[str] = Field(default_factory=list)
    passed: bool


class AcceptanceResult(BaseModel):
    name: str
    passed: bool
    detail: str
    seconds: float


class Settings(BaseModel):
    output_root: str
    workers: int = Field(ge=1)
    log_level: str = "INFO"
