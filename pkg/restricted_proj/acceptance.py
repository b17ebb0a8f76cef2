"""
Replication suite

Ten end-to-end checks of the numerical claims: the ξ_t = π_t identity, the
moment-curve decomposition, the ball-mass bound, oracle equivalence of the
counting code, transversality scaling, logarithmic energy growth, the
finitary sweep on a Cantor product, recovery near a degenerate direction,
dimension preservation under projection and the SO(n, 1) structure.

`scale="full"` uses the published sample sizes; `scale="quick"` shrinks them
so the suite fits in a test run.
"""

import logging
import math
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import lie
from .energy import WeightedMeasure, average_projected_energy, ball_mass_bound_check, truncated_energy
from .geometry import ProjectionFamily, factor_map, make_rng, moment_expand, project, sample_annulus
from .models import AcceptanceResult, GeneratorSpec, TruncatedEnergyParams
from .pointcloud import GridIndex, PointCloud, brute_force_count, count_in_ball, generate, verify_regularity
from .projection import (
    brute_force_concentration,
    concentration_counts,
    finitary_check,
    projected_dimensions,
    transversality_measure,
)

logger = logging.getLogger(__name__)

# ratio r of a 3-branch Cantor set with log 3 / log(1/r) = log 2 / log 3
CANTOR_RATIO = math.exp(-(math.log(3.0) ** 2) / math.log(2.0))
CANTOR_ALPHA = math.log(2.0) / math.log(3.0)

# r1 = 0 on this line; the standard π_t scales it by |4t + t²/2| / √17 >= 0.84 on B
LINE_DIRECTION = [0.0, 4.0, 1.0]

SIZES: Dict[str, Dict[str, object]] = {
    "quick": {
        "trials": 100,
        "decomposition": 1000,
        "ball_mass": 200,
        "oracle_clouds": 20,
        "oracle_size": 300,
        "mc": 50_000,
        "energy_exponents": (6, 7, 8),
        "cantor_level": 6,
        "cantor_t": 50,
        "hyperplane_size": 1024,
        "dimension_t": 20,
    },
    "full": {
        "trials": 1000,
        "decomposition": 10_000,
        "ball_mass": 1000,
        "oracle_clouds": 100,
        "oracle_size": 300,
        "mc": 100_000,
        "energy_exponents": (8, 10, 12),
        "cantor_level": 8,
        "cantor_t": 500,
        "hyperplane_size": 4096,
        "dimension_t": 200,
    },
}


def slab_annulus_area(epsilon: float) -> float:
    """Area of {t ∈ ℝ² : 1 <= ‖t‖ <= 2, |t_1| <= ε} for ε < 1."""

    def disc_strip(radius: float) -> float:
        return 2.0 * (epsilon * math.sqrt(radius**2 - epsilon**2) + radius**2 * math.asin(epsilon / radius))

    return disc_strip(2.0) - disc_strip(1.0)


def _random_family(rng: np.random.Generator, m: int) -> ProjectionFamily:
    L = rng.uniform(-1.0, 1.0, size=(m, m)) + 2.0 * np.eye(m)
    B = rng.uniform(-1.0, 1.0, size=(m, m))
    return ProjectionFamily(L, B @ B.T + 0.1 * np.eye(m))


def check_xi_identity(sizes, rng) -> Tuple[bool, str]:
    worst = 0.0
    for n in range(3, 9):
        fam = ProjectionFamily.standard(n)
        ts = sample_annulus(n - 2, sizes["trials"], rng=rng)
        xs = rng.uniform(-1.0, 1.0, size=(sizes["trials"], n))
        for t, x in zip(ts, xs):
            worst = max(worst, abs(lie.xi(t, x) - project(fam, t, x)))
    return worst < 1e-12, f"max |xi - pi| = {worst:.3e}"


def check_decomposition(sizes, rng) -> Tuple[bool, str]:
    worst = 0.0
    for _ in range(sizes["decomposition"]):
        n = int(rng.integers(3, 9))
        fam = _random_family(rng, n - 2)
        t = rng.uniform(-2.0, 2.0, size=n - 2)
        s = float(rng.uniform(0.0, 2.0))
        x = rng.uniform(-1.0, 1.0, size=n)
        direct = project(fam, s * t, x)
        via_moment = float(moment_expand(s) @ factor_map(fam, t, x))
        worst = max(worst, abs(direct - via_moment) / max(1.0, abs(direct)))
    return worst < 1e-12, f"max relative error {worst:.3e}"


def check_ball_mass(sizes, rng) -> Tuple[bool, str]:
    violations = 0
    for _ in range(sizes["ball_mass"]):
        d = int(rng.integers(1, 5))
        size = int(rng.integers(1, 60))
        atoms = rng.uniform(-0.5, 0.5, size=(size, d)) / math.sqrt(d)
        rho = WeightedMeasure(atoms, rng.dirichlet(np.ones(size)))
        x = atoms[int(rng.integers(size))] if rng.random() < 0.5 else rng.uniform(-0.5, 0.5, size=d) / math.sqrt(d)
        params = TruncatedEnergyParams(alpha=float(rng.uniform(0.05, 1.0)), delta0=2.0 ** -int(rng.integers(0, 12)))
        report = ball_mass_bound_check(rho, x, params, truncated_energy(rho, x, params))
        violations += len(report.violations)
    return violations == 0, f"{violations} violations"


def check_oracle_equivalence(sizes, rng) -> Tuple[bool, str]:
    mismatches = 0
    for _ in range(sizes["oracle_clouds"]):
        n = int(rng.integers(3, 6))
        points = rng.uniform(-0.5, 0.5, size=(sizes["oracle_size"], n)) / math.sqrt(n)
        cloud = PointCloud(points, delta0=2.0**-10, claimed_alpha=1.0, claimed_C=1.0)
        delta = 2.0 ** -int(rng.integers(1, 8))
        grid = GridIndex(points, delta).count_queries(points, delta)
        brute = np.array([brute_force_count(points, p, delta) for p in points])
        mismatches += int(np.count_nonzero(grid != brute))
        center = points[int(rng.integers(points.shape[0]))]
        mismatches += int(count_in_ball(cloud, center, delta) != brute_force_count(points, center, delta))
        fam = ProjectionFamily.standard(n)
        t = sample_annulus(n - 2, 1, rng=rng)[0]
        report = concentration_counts(cloud, fam, t, delta)
        counts = np.array([c for _, c in report.per_point_counts])
        mismatches += int(np.count_nonzero(counts != brute_force_concentration(project(fam, t, points), delta)))
    return mismatches == 0, f"{mismatches} mismatches"


def check_transversality(sizes, rng) -> Tuple[bool, str]:
    fam = ProjectionFamily.standard(4)
    x, xp = np.zeros(4), np.array([0.0, 1.0, 0.0, 0.0])
    ratios, outside = [], []
    for epsilon in (0.1, 0.05, 0.02):
        estimate = transversality_measure(fam, x, xp, epsilon, sizes["mc"], seed=int(rng.integers(2**31)))
        ratios.append(estimate.measure_estimate / epsilon)
        error = abs(estimate.measure_estimate - slab_annulus_area(epsilon))
        if error > 2.0 * estimate.standard_error:
            outside.append(epsilon)
    spread = (max(ratios) - min(ratios)) / min(ratios)
    passed = spread <= 0.15 and not outside
    return passed, f"ratio spread {spread:.3f}, outside 2 SE at {outside}"


def check_energy_growth(sizes, rng) -> Tuple[bool, str]:
    kappas = []
    for k0 in sizes["energy_exponents"]:
        cloud = generate(GeneratorSpec(kind="uniform_segment", n=3, size=2**k0))
        fam = ProjectionFamily.standard(3)
        params = TruncatedEnergyParams(alpha=1.0, delta0=cloud.delta0)
        averaged = average_projected_energy(cloud, fam, params, sample_annulus(1, 4, rng=rng))
        kappas.append(averaged.kappa)
    variation = (max(kappas) - min(kappas)) / float(np.mean(kappas))
    return variation < 0.25, f"kappa {['%.4f' % k for k in kappas]}, variation {variation:.3f}"


def _cantor_cloud(level: int) -> PointCloud:
    return generate(
        GeneratorSpec(kind="cantor_product", n=3, branches=3, ratio=CANTOR_RATIO, level=level, direction=LINE_DIRECTION)
    )


def check_finitary_sweep(sizes, rng) -> Tuple[bool, str]:
    cloud = _cantor_cloud(sizes["cantor_level"])
    fam = ProjectionFamily.standard(3)
    regularity = verify_regularity(cloud).worst_ratio
    seed = int(rng.integers(2**31))
    ts = sample_annulus(1, sizes["cantor_t"], seed=seed)
    ladder = [2.0**-k for k in range(5, 11)]
    fractions = [
        finitary_check(
            cloud, fam, delta, 0.006, ts, bound_form="proof", a_emp=-1.0, regularity=regularity, seed=seed
        ).exceptional_fraction
        for delta in ladder
    ]
    x = np.log(ladder)
    y = np.log(np.array(fractions) + 1.0 / len(ts))
    slope = float(np.polyfit(x, y, 1)[0])
    passed = max(fractions) <= 0.1 and slope >= -1e-9
    return passed, f"N={cloud.size}, exceptional fractions {fractions}, slope {slope:.3g}"


def check_degenerate_direction(sizes, rng) -> Tuple[bool, str]:
    t0 = 1.5
    spec = GeneratorSpec(kind="kernel_hyperplane", n=3, size=sizes["hyperplane_size"], t0=[t0])
    cloud = generate(spec, seed=int(rng.integers(2**31)))
    fam = ProjectionFamily.standard(3)
    fit = (4.0 * cloud.delta0, 1.0 / 16.0)
    at_t0 = projected_dimensions(cloud, fam, [[t0]], fit_range=fit).median_slope
    ts = sample_annulus(1, 4 * sizes["dimension_t"], rng=rng)
    far = ts[np.abs(ts[:, 0] - t0) >= 0.5][: sizes["dimension_t"]]
    away = projected_dimensions(cloud, fam, far, fit_range=fit, t0=[t0]).median_slope
    target = min(1.0, cloud.claimed_alpha) - 0.15
    return at_t0 <= 0.05 and away >= target, f"dimension at t0 {at_t0:.3f}, median away {away:.3f}"


def check_dimension_preservation(sizes, rng) -> Tuple[bool, str]:
    fam = ProjectionFamily.standard(3)
    segment = generate(GeneratorSpec(kind="uniform_segment", n=3, size=4096, direction=LINE_DIRECTION))
    cantor = _cantor_cloud(sizes["cantor_level"])
    details, passed = [], True
    for cloud in (segment, cantor):
        ts = sample_annulus(1, sizes["dimension_t"], rng=rng)
        median = projected_dimensions(cloud, fam, ts).median_slope
        target = min(1.0, cloud.claimed_alpha)
        passed = passed and abs(median - target) <= 0.1
        details.append(f"{cloud.label}: {median:.3f} vs {target:.3f}")
    return passed, "; ".join(details)


def check_lie_structure(sizes, rng) -> Tuple[bool, str]:
    table = lie.lie_verification_table(trials=sizes["trials"], seed=int(rng.integers(2**31)))
    residual = float(table.drop(columns=["n", "passed"]).to_numpy().max())
    contraction = lie.contraction_check([1.0, 0.0, 0.0], [-1.0])
    passed = bool(table["passed"].all()) and contraction.passed
    return passed, f"largest residual {residual:.3e}"


CHECKS: List[Tuple[str, Callable]] = [
    ("xi_identity", check_xi_identity),
    ("decomposition", check_decomposition),
    ("ball_mass", check_ball_mass),
    ("oracle_equivalence", check_oracle_equivalence),
    ("transversality", check_transversality),
    ("energy_growth", check_energy_growth),
    ("finitary_sweep", check_finitary_sweep),
    ("degenerate_direction", check_degenerate_direction),
    ("dimension_preservation", check_dimension_preservation),
    ("lie_structure", check_lie_structure),
]


def replicate_acceptance(scale: str = "quick", seed: int = 0, only: Optional[Sequence[str]] = None) -> List[AcceptanceResult]:
    """
    Run the replication checks.

    Args:
        scale (str): "quick" or "full"
        seed (int): Seed of the generator every check draws from
        only (Sequence[str], optional): Names of the checks to run

    Returns:
        List[AcceptanceResult]: one result per check, in suite order
    """
    if scale not in SIZES:
        raise ValueError(f"Unknown scale {scale!r}; use one of {sorted(SIZES)}")
    unknown = set(only or []) - {name for name, _ in CHECKS}
    if unknown:
        raise ValueError(f"Unknown checks: {sorted(unknown)}")
    sizes = SIZES[scale]
    results = []
    for i, (name, check) in enumerate(CHECKS):
        if only and name not in only:
            continue
        rng = make_rng([seed, i])
        start = time.perf_counter()
        try:
            passed, detail = check(sizes, rng)
        except Exception as e:
            logger.error(f"Acceptance check {name} raised: {e}")
            passed, detail = False, f"error: {e}"
        seconds = time.perf_counter() - start
        level = logging.INFO if passed else logging.WARNING
        logger.log(level, f"{name}: {'passed' if passed else 'FAILED'} in {seconds:.1f}s ({detail})")
        results.append(AcceptanceResult(name=name, passed=bool(passed), detail=detail, seconds=seconds))
    return results
