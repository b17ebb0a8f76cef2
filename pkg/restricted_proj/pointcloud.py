"""
Finite point sets with a scale floor

A PointCloud is a finite F ⊂ B(0, 1) with diam(F) <= 1, a dyadic floor
delta0 = 2^-k0 and a claimed non-concentration law

    #(B(X, δ) ∩ F) <= C · δ^α · #F      for X ∈ F, δ >= delta0.

This module builds such clouds from generators with known regularity,
counts points in balls through a uniform grid index, measures the
non-concentration constant, estimates box-counting dimension and reads and
writes the plain-text cloud format.
"""

import itertools
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ContractViolation, Rejection
from .geometry import ProjectionFamily, make_rng
from .models import DimensionEstimate, GeneratorSpec, Point, RegularityReport, ScaleRatio

logger = logging.getLogger(__name__)

BRUTE_FORCE_BELOW = 512
SUBSAMPLE_ABOVE = 100_000
MAX_GENERATED_POINTS = 2_000_000
GEOMETRY_TOLERANCE = 1e-12
_BLOCK_ENTRIES = 1 << 22


def is_dyadic(value: float) -> bool:
    if not value > 0:
        return False
    k = -math.log2(value)
    return abs(k - round(k)) <= 1e-12


def dyadic_ladder(lo: float, hi: float = 1.0) -> List[float]:
    """Dyadic scales 2^-k with lo <= 2^-k <= hi, increasing."""
    k_max = math.floor(-math.log2(lo) + 1e-9)
    k_min = math.ceil(-math.log2(hi) - 1e-9)
    return [2.0**-k for k in range(k_max, k_min - 1, -1)]


def _distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _diameter(points: np.ndarray) -> float:
    center = points.mean(axis=0)
    radius = float(np.max(np.linalg.norm(points - center, axis=1)))
    if 2.0 * radius <= 1.0:
        return 2.0 * radius  # upper bound is enough to accept
    best = 0.0
    rows = max(1, _BLOCK_ENTRIES // max(1, points.shape[0] * points.shape[1]))
    for start in range(0, points.shape[0], rows):
        block = _distances(points[start : start + rows], points)
        best = max(best, float(block.max()))
    return best


class PointCloud:
    """
    A finite point set with scale floor and claimed regularity (α, C).

    Args:
        points: (N, n) array of coordinates (r1, w, r2), n >= 3
        delta0 (float): Scale floor, a power of two in (0, 1]
        claimed_alpha (float): Claimed exponent α in (0, 1]
        claimed_C (float): Claimed constant C >= 1
        label (str, optional): Free-form description (generator kind)
        meta (dict, optional): Extra generator parameters kept with the cloud
    """

    def __init__(
        self,
        points,
        delta0: float,
        claimed_alpha: float,
        claimed_C: float,
        label: Optional[str] = None,
        meta: Optional[Dict[str, object]] = None,
    ):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1 and pts.size:
            pts = pts[None, :]
        failures = []
        if pts.size == 0:
            failures.append("cloud is empty")
        elif pts.ndim != 2 or pts.shape[1] < 3:
            failures.append(f"points must be an (N, n) array with n >= 3, got shape {pts.shape}")
        elif not np.all(np.isfinite(pts)):
            failures.append("points must be finite")
        if not (0.0 < delta0 <= 1.0) or not is_dyadic(delta0):
            failures.append(f"delta0={delta0} must be 2^-k0 for an integer k0 >= 0")
        if not (0.0 < claimed_alpha <= 1.0):
            failures.append(f"claimed_alpha={claimed_alpha} must lie in (0, 1]")
        if not claimed_C >= 1.0:
            failures.append(f"claimed_C={claimed_C} must be >= 1")
        if not failures:
            norms = np.linalg.norm(pts, axis=1)
            if float(norms.max()) > 1.0 + GEOMETRY_TOLERANCE:
                failures.append(f"points leave the unit ball (max norm {norms.max():.6g})")
            diameter = _diameter(pts)
            if diameter > 1.0 + GEOMETRY_TOLERANCE:
                failures.append(f"diameter {diameter:.6g} exceeds 1")
        if failures:
            raise Rejection(failures, subject="point cloud")

        pts.setflags(write=False)
        self.points = pts
        self.delta0 = float(delta0)
        self.claimed_alpha = float(claimed_alpha)
        self.claimed_C = float(claimed_C)
        self.label = label
        self.meta = dict(meta or {})
        self._index_cache: Dict[float, "GridIndex"] = {}

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def k0(self) -> int:
        return int(round(-math.log2(self.delta0)))

    def point(self, index: int) -> Point:
        return Point.from_array(self.points[index])

    def with_claims(
        self,
        alpha: Optional[float] = None,
        delta0: Optional[float] = None,
        C: Optional[float] = None,
    ) -> "PointCloud":
        """A copy of the cloud with some claims replaced."""
        return PointCloud(
            self.points,
            delta0=self.delta0 if delta0 is None else delta0,
            claimed_alpha=self.claimed_alpha if alpha is None else alpha,
            claimed_C=self.claimed_C if C is None else C,
            label=self.label,
            meta=self.meta,
        )

    def grid_index(self, cell: float) -> "GridIndex":
        if cell not in self._index_cache:
            self._index_cache[cell] = GridIndex(self.points, cell)
        return self._index_cache[cell]

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return (
            f"PointCloud(N={self.size}, n={self.n}, delta0=2^-{self.k0}, "
            f"alpha={self.claimed_alpha:.4g}, C={self.claimed_C:.4g}, label={self.label!r})"
        )


class GridIndex:
    """
    Uniform grid over a point set with cells of side `cell`.

    A ball of radius <= cell around a point only meets the cell of its center
    and the neighbouring cells, so a query inspects at most 3^n cells.
    """

    def __init__(self, points: np.ndarray, cell: float):
        if not cell > 0:
            raise ContractViolation(f"cell size must be positive, got {cell}")
        self.points = points
        self.cell = float(cell)
        keys = np.floor(points / self.cell).astype(np.int64)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).ravel()
        order = np.argsort(inverse, kind="stable")
        bounds = np.searchsorted(inverse[order], np.arange(uniq.shape[0] + 1))
        self._keys = uniq
        self._members = [order[bounds[i] : bounds[i + 1]] for i in range(uniq.shape[0])]
        self._lookup = {tuple(key): i for i, key in enumerate(uniq.tolist())}
        dim = points.shape[1]
        # enumerate neighbour offsets only while that is cheaper than scanning all cells
        self._offsets = (
            [tuple(o) for o in itertools.product((-1, 0, 1), repeat=dim)] if 3**dim <= uniq.shape[0] else None
        )

    def _neighbour_cells(self, key: np.ndarray) -> List[int]:
        if self._offsets is not None:
            found = []
            for offset in self._offsets:
                idx = self._lookup.get(tuple(int(k + o) for k, o in zip(key, offset)))
                if idx is not None:
                    found.append(idx)
            return found
        close = np.all(np.abs(self._keys - key) <= 1, axis=1)
        return np.flatnonzero(close).tolist()

    def candidates(self, center: np.ndarray) -> np.ndarray:
        key = np.floor(center / self.cell).astype(np.int64)
        cells = self._neighbour_cells(key)
        if not cells:
            return np.empty(0, dtype=np.int64)
        return np.concatenate([self._members[i] for i in cells])

    def count(self, center: np.ndarray, delta: float) -> int:
        if delta > self.cell:
            raise ContractViolation(f"radius {delta} exceeds the grid cell {self.cell}")
        cand = self.candidates(center)
        if cand.size == 0:
            return 0
        dist = _distances(center[None, :], self.points[cand])[0]
        return int(np.count_nonzero(dist <= delta))

    def count_queries(self, queries: np.ndarray, delta: float) -> np.ndarray:
        """Ball counts for many centers, grouped by the cell they fall in."""
        if delta > self.cell:
            raise ContractViolation(f"radius {delta} exceeds the grid cell {self.cell}")
        counts = np.zeros(queries.shape[0], dtype=np.int64)
        keys = np.floor(queries / self.cell).astype(np.int64)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).ravel()
        order = np.argsort(inverse, kind="stable")
        bounds = np.searchsorted(inverse[order], np.arange(uniq.shape[0] + 1))
        for g in range(uniq.shape[0]):
            members = order[bounds[g] : bounds[g + 1]]
            cells = self._neighbour_cells(uniq[g])
            if not cells:
                continue
            cand = np.concatenate([self._members[i] for i in cells])
            cand_pts = self.points[cand]
            rows = max(1, _BLOCK_ENTRIES // max(1, cand.size * queries.shape[1]))
            for start in range(0, members.size, rows):
                chunk = members[start : start + rows]
                dist = _distances(queries[chunk], cand_pts)
                counts[chunk] = np.count_nonzero(dist <= delta, axis=1)
        return counts


def brute_force_count(points: np.ndarray, center: np.ndarray, delta: float) -> int:
    """#{X' : ‖X' - center‖ <= delta} by direct enumeration."""
    dist = _distances(np.asarray(center, dtype=float)[None, :], np.asarray(points, dtype=float))[0]
    return int(np.count_nonzero(dist <= delta))


def _brute_force_counts(points: np.ndarray, queries: np.ndarray, delta: float) -> np.ndarray:
    counts = np.zeros(queries.shape[0], dtype=np.int64)
    rows = max(1, _BLOCK_ENTRIES // max(1, points.shape[0] * points.shape[1]))
    for start in range(0, queries.shape[0], rows):
        dist = _distances(queries[start : start + rows], points)
        counts[start : start + rows] = np.count_nonzero(dist <= delta, axis=1)
    return counts


def _center_array(center: Union[Point, Sequence[float], np.ndarray], n: int) -> np.ndarray:
    arr = center.to_array() if isinstance(center, Point) else np.asarray(center, dtype=float)
    if arr.shape != (n,):
        raise ContractViolation(f"center has shape {arr.shape}, cloud points have dimension {n}")
    return arr


def count_in_ball(cloud: PointCloud, center: Union[Point, Sequence[float], np.ndarray], delta: float) -> int:
    """
    Exact #(B(center, delta) ∩ F), closed ball.

    Uses the grid index with cell size delta; clouds below 512 points are
    counted directly.
    """
    if not delta > 0:
        raise ContractViolation(f"delta must be positive, got {delta}")
    c = _center_array(center, cloud.n)
    if cloud.size < BRUTE_FORCE_BELOW:
        return brute_force_count(cloud.points, c, delta)
    return cloud.grid_index(delta).count(c, delta)


def count_in_balls(cloud: PointCloud, delta: float, queries: Optional[np.ndarray] = None) -> np.ndarray:
    """Ball counts around every point of the cloud (or around `queries`)."""
    if not delta > 0:
        raise ContractViolation(f"delta must be positive, got {delta}")
    centers = cloud.points if queries is None else np.asarray(queries, dtype=float)
    if cloud.size < BRUTE_FORCE_BELOW:
        return _brute_force_counts(cloud.points, centers, delta)
    return cloud.grid_index(delta).count_queries(centers, delta)


def regularity_constant(
    points: np.ndarray,
    alpha: float,
    scales: Sequence[float],
    query_indices: Optional[np.ndarray] = None,
) -> Tuple[float, Tuple[int, float], List[ScaleRatio]]:
    """
    max over query points X and scales δ of #(B(X, δ) ∩ P) / (δ^α · #P).

    Returns:
        (worst ratio, (point index, delta) witnessing it, per-scale maxima)
    """
    pts = np.asarray(points, dtype=float)
    total = pts.shape[0]
    idx = np.arange(total) if query_indices is None else np.asarray(query_indices)
    queries = pts[idx]
    worst, witness = -math.inf, (int(idx[0]), float(scales[0]))
    table = []
    for delta in scales:
        if total < BRUTE_FORCE_BELOW:
            counts = _brute_force_counts(pts, queries, delta)
        else:
            counts = GridIndex(pts, delta).count_queries(queries, delta)
        ratios = counts / (delta**alpha * total)
        j = int(np.argmax(ratios))
        table.append(ScaleRatio(delta=delta, max_ratio=float(ratios[j])))
        if ratios[j] > worst:
            worst, witness = float(ratios[j]), (int(idx[j]), float(delta))
        logger.debug(f"scale {delta:.3e}: max ratio {ratios[j]:.4g}")
    return worst, witness, table


def verify_regularity(
    cloud: PointCloud,
    alpha: Optional[float] = None,
    subsample_above: int = SUBSAMPLE_ABOVE,
    seed: int = 0,
) -> RegularityReport:
    """
    Measure #(B(X, δ) ∩ F) / (δ^α · #F) at every dyadic δ in [delta0, 1].

    Every point is a center unless the cloud has more than `subsample_above`
    points, in which case a seeded random subsample of that size is used and
    recorded in the report.
    """
    alpha = cloud.claimed_alpha if alpha is None else alpha
    scales = dyadic_ladder(cloud.delta0, 1.0)
    query = None
    subsample_size = subsample_seed = None
    if cloud.size > subsample_above:
        rng = make_rng(seed)
        query = np.sort(rng.choice(cloud.size, size=subsample_above, replace=False))
        subsample_size, subsample_seed = subsample_above, seed
        logger.warning(f"Verifying regularity on a subsample of {subsample_above} of {cloud.size} points (seed {seed})")

    if cloud.size < BRUTE_FORCE_BELOW:
        worst, witness, table = regularity_constant(cloud.points, alpha, scales, query)
    else:
        idx = np.arange(cloud.size) if query is None else query
        worst, witness, table = -math.inf, (int(idx[0]), scales[0]), []
        for delta in scales:
            counts = count_in_balls(cloud, delta, cloud.points[idx])
            ratios = counts / (delta**alpha * cloud.size)
            j = int(np.argmax(ratios))
            table.append(ScaleRatio(delta=delta, max_ratio=float(ratios[j])))
            if ratios[j] > worst:
                worst, witness = float(ratios[j]), (int(idx[j]), float(delta))

    passed = worst <= cloud.claimed_C
    logger.info(f"Regularity of {cloud.label or 'cloud'}: worst ratio {worst:.4g} (claimed C {cloud.claimed_C:.4g})")
    return RegularityReport(
        alpha=alpha,
        claimed_C=cloud.claimed_C,
        point_count=cloud.size,
        worst_ratio=worst,
        witnessing_pair=witness,
        per_scale_table=table,
        passed=passed,
        subsample_size=subsample_size,
        subsample_seed=subsample_seed,
    )


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _check_coordinates(spec: GeneratorSpec, failures: List[str]) -> List[int]:
    coords = list(spec.coordinates)
    if not coords:
        failures.append("coordinates must not be empty")
    if len(set(coords)) != len(coords):
        failures.append(f"coordinates must be distinct, got {coords}")
    bad = [c for c in coords if not 0 <= c < spec.n]
    if bad:
        failures.append(f"coordinates {bad} outside 0..{spec.n - 1}")
    return coords


def _cantor_values(ratio: float, branches: int, level: int) -> np.ndarray:
    offsets = np.arange(branches) * (1.0 - ratio) / (branches - 1)
    values = np.zeros(1)
    scale = 1.0
    for _ in range(level):
        values = (values[:, None] + scale * offsets[None, :]).ravel()
        scale *= ratio
    return np.sort(values)


def _product(columns: List[np.ndarray]) -> np.ndarray:
    grids = np.meshgrid(*columns, indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def _floor_exponent(length: float) -> int:
    """Smallest k with 2^-k <= length."""
    return max(0, math.ceil(-math.log2(length) - 1e-12))


def _generate_cantor_product(spec: GeneratorSpec, rng: np.random.Generator) -> PointCloud:
    failures = []
    coords = _check_coordinates(spec, failures)
    if spec.branches < 2:
        failures.append(f"branches must be >= 2, got {spec.branches}")
    if not 0.0 < spec.ratio < 1.0:
        failures.append(f"ratio must lie in (0, 1), got {spec.ratio}")
    elif spec.branches * spec.ratio > 1.0:
        failures.append(f"branches * ratio = {spec.branches * spec.ratio:.4g} exceeds 1 (pieces overlap)")
    if spec.level < 1:
        failures.append(f"level must be >= 1, got {spec.level}")
    if not failures and spec.branches ** (spec.level * len(coords)) > MAX_GENERATED_POINTS:
        failures.append(f"cloud would have {spec.branches ** (spec.level * len(coords))} points")
    if spec.direction is not None and len(coords) != 1:
        failures.append("direction needs exactly one coordinate")
    if failures:
        raise Rejection(failures, subject="cantor_product generator")

    m = len(coords)
    values = _cantor_values(spec.ratio, spec.branches, spec.level)
    extent = 1.0 - spec.ratio**spec.level
    side = 1.0 / math.sqrt(m)
    column = (values - extent / 2.0) * side
    if spec.direction is not None:
        # one Cantor column laid along a line through the origin
        points = column[:, None] * _unit_direction(spec, "cantor_product generator")[None, :]
    else:
        block = _product([column] * m)
        points = np.zeros((block.shape[0], spec.n))
        points[:, coords] = block

    coord_alpha = math.log(spec.branches) / math.log(1.0 / spec.ratio)
    alpha = min(1.0, m * coord_alpha)
    piece = spec.ratio**spec.level * side
    k0 = spec.k0 if spec.k0 is not None else _floor_exponent(piece)
    claimed_C = 2.0 * 3.0**m * spec.branches**m / (spec.ratio * side) ** alpha
    return PointCloud(
        points,
        delta0=2.0**-k0,
        claimed_alpha=alpha,
        claimed_C=claimed_C,
        label="cantor_product",
        meta={"coordinate_alpha": coord_alpha},
    )


def _unit_direction(spec: GeneratorSpec, subject: str = "uniform_segment generator") -> np.ndarray:
    if spec.direction is None:
        direction = np.zeros(spec.n)
        direction[0] = 1.0
        return direction
    direction = np.asarray(spec.direction, dtype=float)
    if direction.shape != (spec.n,):
        raise Rejection([f"direction must have length n={spec.n}"], subject=subject)
    norm = float(np.linalg.norm(direction))
    if not norm > 0:
        raise Rejection(["direction must be non-zero"], subject=subject)
    return direction / norm


def _generate_uniform_segment(spec: GeneratorSpec, rng: np.random.Generator) -> PointCloud:
    size = spec.size
    if size is None or size < 1:
        raise Rejection([f"size must be a positive integer, got {size}"], subject="uniform_segment generator")
    direction = _unit_direction(spec)
    k0 = spec.k0 if spec.k0 is not None else max(0, math.ceil(math.log2(size)))
    delta0 = 2.0**-k0
    if (size - 1) * delta0 > 1.0:
        raise Rejection([f"{size} points spaced 2^-{k0} do not fit in a unit segment"], subject="uniform_segment generator")
    offsets = (np.arange(size) - (size - 1) / 2.0) * delta0
    points = offsets[:, None] * direction[None, :]
    # a window of radius δ holds at most 2δ/delta0 + 1 points
    claimed_C = max(1.0, 3.0 / (delta0 * size))
    return PointCloud(points, delta0=delta0, claimed_alpha=1.0, claimed_C=claimed_C, label="uniform_segment")


def _generate_alpha_regular_random(spec: GeneratorSpec, rng: np.random.Generator) -> PointCloud:
    failures = []
    alpha = spec.target_alpha
    if alpha is None or not 0.0 < alpha <= 1.0:
        failures.append(f"target_alpha must lie in (0, 1], got {alpha}")
    size = spec.size if spec.size is not None else 4096
    if size < 2:
        failures.append(f"size must be >= 2, got {size}")
    if failures:
        raise Rejection(failures, subject="alpha_regular_random generator")

    n = spec.n
    levels = math.ceil(math.log2(size) / alpha)
    if levels > 40:
        raise Rejection([f"{levels} subdivision levels needed; lower size or raise target_alpha"], subject="alpha_regular_random generator")
    children = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    cells = np.zeros((1, n), dtype=np.int64)
    kept = 1
    for k in range(1, levels + 1):
        # keep 2 children while the running count stays below 2^{αk}, else 1
        branch = 2 if 2 * kept <= 2.0 ** (alpha * k) * (1 + 1e-12) else 1
        picks = np.argsort(rng.random((cells.shape[0], children.shape[0])), axis=1)[:, :branch]
        cells = (2 * cells[:, None, :] + children[picks]).reshape(-1, n)
        kept *= branch
    side = 1.0 / math.sqrt(n)
    points = ((cells + 0.5) * 2.0**-levels - 0.5) * side
    k0 = levels + math.ceil(math.log2(math.sqrt(n)))
    claimed_C = 4.0 * 5.0**n
    return PointCloud(points, delta0=2.0**-k0, claimed_alpha=alpha, claimed_C=claimed_C, label="alpha_regular_random")


def _generate_kernel_hyperplane(spec: GeneratorSpec, rng: np.random.Generator) -> PointCloud:
    failures = []
    n = spec.n
    family = ProjectionFamily.from_spec(spec.family, n) if spec.family is not None else ProjectionFamily.standard(n)
    if spec.t0 is None or len(spec.t0) != n - 2:
        failures.append(f"t0 must have length n-2={n - 2}")
    if not abs(spec.c) < 1.0:
        failures.append(f"|c| must be < 1, got {spec.c}")
    size = spec.size if spec.size is not None else 4096
    if size < 1:
        failures.append(f"size must be positive, got {size}")
    if failures:
        raise Rejection(failures, subject="kernel_hyperplane generator")

    t0 = np.asarray(spec.t0, dtype=float)
    lt0 = family.L @ t0
    q0 = family.q(t0)
    # linear map (w, r2) -> (-w·L(t0) - r2 q(t0), w, r2) parametrizing the hyperplane
    M = np.zeros((n, n - 1))
    M[0, :-1] = -lt0
    M[0, -1] = -q0
    M[1:, :] = np.eye(n - 1)
    scale = min(0.5, 1.0 - abs(spec.c)) / (math.sqrt(n - 1) * float(np.linalg.norm(M, 2)))
    u = rng.uniform(-scale, scale, size=(size, n - 1))
    w, r2 = u[:, :-1], u[:, -1]
    r1 = spec.c - w @ lt0 - r2 * q0
    points = np.column_stack((r1, w, r2))

    k0 = spec.k0 if spec.k0 is not None else max(0, math.ceil(math.log2(size)))
    delta0 = 2.0**-k0
    # the claim for a random sample is its measured constant
    worst, _, _ = regularity_constant(points, 1.0, dyadic_ladder(delta0, 1.0))
    return PointCloud(
        points,
        delta0=delta0,
        claimed_alpha=1.0,
        claimed_C=max(1.0, worst),
        label="kernel_hyperplane",
        meta={"t0": t0.tolist(), "c": spec.c},
    )


def _generate_finite_grid(spec: GeneratorSpec, rng: np.random.Generator) -> PointCloud:
    failures = []
    coords = _check_coordinates(spec, failures)
    k0 = spec.k0 if spec.k0 is not None else 6
    if k0 < 0:
        failures.append(f"k0 must be non-negative, got {k0}")
    if failures:
        raise Rejection(failures, subject="finite_grid generator")
    m = len(coords)
    delta0 = 2.0**-k0
    side = int(math.floor(2**k0 / math.sqrt(m) + 1e-9)) + 1
    if side**m > MAX_GENERATED_POINTS:
        raise Rejection([f"grid would have {side ** m} points"], subject="finite_grid generator")
    column = np.arange(side) * delta0
    points = np.zeros((side**m, spec.n))
    points[:, coords] = _product([column] * m)
    return PointCloud(points, delta0=delta0, claimed_alpha=1.0, claimed_C=3.0**m, label="finite_grid")


_GENERATORS = {
    "cantor_product": _generate_cantor_product,
    "uniform_segment": _generate_uniform_segment,
    "alpha_regular_random": _generate_alpha_regular_random,
    "kernel_hyperplane": _generate_kernel_hyperplane,
    "finite_grid": _generate_finite_grid,
}


def generate(spec: GeneratorSpec, seed: int = 0) -> PointCloud:
    """
    Build a point cloud of known regularity.

    Args:
        spec (GeneratorSpec): Generator kind and parameters
        seed (int): Seed of the PCG64 generator; output is deterministic in it

    Returns:
        PointCloud: The cloud with its claimed α and C
    """
    cloud = _GENERATORS[spec.kind](spec, make_rng(seed))
    logger.info(f"Generated {cloud!r}")
    return cloud


# ---------------------------------------------------------------------------
# box counting
# ---------------------------------------------------------------------------


def box_dimension(
    values,
    fit_range: Optional[Tuple[float, float]] = None,
    delta0: Optional[float] = None,
) -> DimensionEstimate:
    """
    Box-counting dimension from occupied dyadic boxes.

    Args:
        values: 1-D array of reals or (N, d) array of points
        fit_range: (δ_lo, δ_hi); defaults to (4·delta0, 1/4)
        delta0 (float, optional): Scale floor of the data; δ_lo may not go below it

    Returns:
        DimensionEstimate: least-squares slope of log N(δ) against log(1/δ)
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise Rejection(["values must be a non-empty 1-D array or (N, d) array"], subject="box_dimension")
    if fit_range is None:
        if delta0 is None:
            raise Rejection(["fit_range or delta0 is required"], subject="box_dimension")
        fit_range = (4.0 * delta0, 0.25)
    lo, hi = float(fit_range[0]), float(fit_range[1])
    failures = []
    if not 0.0 < lo < hi:
        failures.append(f"fit range ({lo}, {hi}) is empty")
    if delta0 is not None and lo < delta0:
        failures.append(f"fit range starts below delta0={delta0}")
    ks = []
    if not failures:
        ks = list(range(math.ceil(-math.log2(hi) - 1e-9), math.floor(-math.log2(lo) + 1e-9) + 1))
        if len(ks) < 4:
            failures.append(f"only {len(ks)} dyadic scales in ({lo}, {hi}); need 4")
    if failures:
        raise Rejection(failures, subject="box_dimension")

    counts = []
    for k in ks:
        delta = 2.0**-k
        keys = np.floor(arr / delta).astype(np.int64)
        counts.append((delta, int(np.unique(keys, axis=0).shape[0])))
    x = np.array([k * math.log(2.0) for k in ks])
    y = np.log(np.array([c for _, c in counts], dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((slope * x + intercept - y) ** 2)))
    return DimensionEstimate(
        slope=float(slope),
        intercept=float(intercept),
        fit_range=(lo, hi),
        residual=residual,
        counts=counts,
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def save_cloud(cloud: PointCloud, path: Union[str, Path]) -> Path:
    """
    Write the cloud as text: header `n delta0 alpha C N`, then one line of n
    coordinates per point, all at 17 significant digits.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = " ".join(
        [
            str(cloud.n),
            format(cloud.delta0, ".17g"),
            format(cloud.claimed_alpha, ".17g"),
            format(cloud.claimed_C, ".17g"),
            str(cloud.size),
        ]
    )
    np.savetxt(path, cloud.points, fmt="%.17g", header=header, comments="")
    return path


def load_cloud(path: Union[str, Path], label: Optional[str] = None) -> PointCloud:
    path = Path(path)
    with open(path, "r") as f:
        header = f.readline().split()
    if len(header) != 5:
        raise Rejection([f"{path}: header must be 'n delta0 alpha C N'"], subject="cloud file")
    n, delta0, alpha, C, size = int(header[0]), float(header[1]), float(header[2]), float(header[3]), int(header[4])
    points = np.loadtxt(path, skiprows=1, ndmin=2)
    if points.shape != (size, n):
        raise Rejection([f"{path}: expected {size} rows of {n} coordinates, got {points.shape}"], subject="cloud file")
    return PointCloud(points, delta0=delta0, claimed_alpha=alpha, claimed_C=C, label=label or path.stem)
