"""
Truncated α-energies

For a probability measure ρ = Σ w_i δ_{X_i} and a floor delta0,

    Ê_{α,ρ}(X) = Σ_i w_i · max(‖X - X_i‖, delta0)^{-α}.

This module evaluates Ê, checks the ball-mass bound it implies, splits a
cloud into dyadic annuli around a point, averages projected energies over
the parameter annulus B and selects the good parameters and points by
Chebyshev cuts.
"""

import logging
import math
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from .errors import ContractViolation, Rejection
from .geometry import ProjectionFamily, annulus_volume, factor_map, param_samples
from .models import (
    AnnuliProfile,
    AnnulusEntry,
    AveragedEnergy,
    BallMassCheck,
    BallMassViolation,
    EnergyProfile,
    GoodSetSelection,
    Point,
    SuperlevelEstimate,
    TruncatedEnergyParams,
)
from .parallel import map_ordered
from .pointcloud import PointCloud, dyadic_ladder

logger = logging.getLogger(__name__)

RELATIVE_SLACK = 1e-12
_BLOCK_ENTRIES = 1 << 22


class WeightedMeasure:
    """
    A finitely supported probability measure.

    Args:
        points: (N, d) array of atoms
        weights: N non-negative weights summing to 1 (uniform when omitted)
    """

    def __init__(self, points, weights=None):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ContractViolation(f"measure needs an (N, d) array of atoms, got shape {pts.shape}")
        if weights is None:
            w = np.full(pts.shape[0], 1.0 / pts.shape[0])
        else:
            w = np.array(weights, dtype=float).ravel()
        failures = []
        if w.shape[0] != pts.shape[0]:
            failures.append(f"{w.shape[0]} weights for {pts.shape[0]} atoms")
        elif np.any(w < 0):
            failures.append("weights must be non-negative")
        elif abs(float(np.sum(w)) - 1.0) > 1e-9:
            failures.append(f"weights sum to {float(np.sum(w))}, not 1")
        if failures:
            raise Rejection(failures, subject="measure")
        pts.setflags(write=False)
        w.setflags(write=False)
        self.points = pts
        self.weights = w

    @classmethod
    def uniform(cls, points) -> "WeightedMeasure":
        return cls(points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


def _as_vector(X: Union[Point, Sequence[float], np.ndarray]) -> np.ndarray:
    return X.to_array() if isinstance(X, Point) else np.asarray(X, dtype=float)


def truncated_norm(X, Y, delta0: float) -> float:
    """max(‖X - Y‖, delta0)."""
    x, y = _as_vector(X), _as_vector(Y)
    if x.shape != y.shape:
        raise ContractViolation(f"points have shapes {x.shape} and {y.shape}")
    return max(float(np.linalg.norm(x - y)), delta0)


def truncated_energies(rho: WeightedMeasure, X, params: TruncatedEnergyParams) -> np.ndarray:
    """
    Ê_{α,ρ} at every row of X.

    Each value is a pairwise (numpy) sum of w_i · max(‖X - X_i‖, delta0)^{-α}
    over the atoms in index order, so results do not depend on how rows are
    blocked.
    """
    queries = np.asarray(X, dtype=float)
    if queries.ndim == 1:
        queries = queries[None, :]
    if queries.shape[1] != rho.dim:
        raise ContractViolation(f"evaluation points have dimension {queries.shape[1]}, measure lives in {rho.dim}")
    out = np.empty(queries.shape[0])
    rows = max(1, _BLOCK_ENTRIES // max(1, len(rho) * rho.dim))
    for start in range(0, queries.shape[0], rows):
        diff = queries[start : start + rows, None, :] - rho.points[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        terms = rho.weights[None, :] * np.maximum(dist, params.delta0) ** (-params.alpha)
        out[start : start + rows] = np.sum(terms, axis=1)
    return out


def truncated_energy(rho: WeightedMeasure, X, params: TruncatedEnergyParams) -> float:
    return float(truncated_energies(rho, _as_vector(X), params)[0])


def ball_mass_bound_check(rho: WeightedMeasure, X, params: TruncatedEnergyParams, R: float) -> BallMassCheck:
    """
    Check ρ(B(X, δ)) <= R·δ^α at every dyadic δ in [delta0, 1].

    The bound follows from Ê_{α,ρ}(X) <= R, so the check refuses to run when
    that hypothesis fails.

    Raises:
        Rejection: if Ê_{α,ρ}(X) > R
    """
    x = _as_vector(X)
    energy = truncated_energy(rho, x, params)
    if energy > R * (1.0 + RELATIVE_SLACK):
        raise Rejection([f"energy {energy:.6g} exceeds R={R:.6g}; the ball-mass bound does not apply"], subject="ball-mass check")
    dist = np.sqrt(np.sum((rho.points - x) ** 2, axis=1))
    scales = dyadic_ladder(params.delta0, 1.0)
    violations = []
    for delta in scales:
        mass = float(np.sum(rho.weights[dist <= delta]))
        bound = R * delta**params.alpha
        if mass > bound * (1.0 + RELATIVE_SLACK):
            violations.append(BallMassViolation(delta=delta, mass=mass, bound=bound))
    if violations:
        logger.warning(f"Ball-mass bound violated at {len(violations)} scales")
    return BallMassCheck(energy=energy, R=R, passed=not violations, scales_checked=len(scales), violations=violations)


def annuli_profile(cloud: PointCloud, X: Union[int, Point, Sequence[float]], alpha: float, k0: Optional[int] = None) -> AnnuliProfile:
    """
    Split the cloud into dyadic annuli around X.

    F_k(X) = {X' : 2^{-k-1} < ‖X - X'‖ <= 2^{-k}} for k < k0 and
    F_{k0}(X) = {X' : ‖X - X'‖ <= 2^{-k0}}. Masses are for the uniform
    measure on the cloud.

    Args:
        cloud (PointCloud): The cloud F
        X: Index of a cloud point, or the point itself
        alpha (float): Exponent of the weights μ(F_k)·2^{kα}
        k0 (int, optional): Finest annulus; the cloud's floor exponent by default
    """
    k0 = cloud.k0 if k0 is None else k0
    if isinstance(X, (int, np.integer)):
        index = int(X)
        x = cloud.points[index]
    else:
        x = _as_vector(X)
        matches = np.flatnonzero(np.all(cloud.points == x, axis=1))
        if matches.size == 0:
            raise ContractViolation("X is not a point of the cloud")
        index = int(matches[0])
    dist = np.sqrt(np.sum((cloud.points - x) ** 2, axis=1))
    ks = np.full(cloud.size, k0, dtype=np.int64)
    for k in range(k0 - 1, -1, -1):
        ks[dist > 2.0 ** (-k - 1)] = k
    counts = np.bincount(ks, minlength=k0 + 1)
    per_k = [
        AnnulusEntry(
            k=k,
            count=int(counts[k]),
            mass=counts[k] / cloud.size,
            weighted=counts[k] / cloud.size * 2.0 ** (k * alpha),
        )
        for k in range(k0 + 1)
    ]
    return AnnuliProfile(point_index=index, alpha=alpha, k0=k0, per_k=per_k)


def _projected_energies(cloud: PointCloud, fam: ProjectionFamily, params: TruncatedEnergyParams, t: np.ndarray) -> np.ndarray:
    images = factor_map(fam, t, cloud.points)
    return truncated_energies(WeightedMeasure.uniform(images), images, params)


def energy_matrix(
    cloud: PointCloud,
    fam: ProjectionFamily,
    params: TruncatedEnergyParams,
    t_samples,
    workers: Optional[int] = None,
) -> np.ndarray:
    """(M, N) array of Ê_{α,μ_t}(f_t X) for every sampled t and point X."""
    ts = param_samples(fam.m, t_samples)
    if cloud.n != fam.n:
        raise ContractViolation(f"cloud has n={cloud.n}, family acts on n={fam.n}")
    rows = map_ordered(lambda t: _projected_energies(cloud, fam, params, t), list(ts), workers)
    return np.vstack(rows)


def average_projected_energy(
    cloud: PointCloud,
    fam: ProjectionFamily,
    params: TruncatedEnergyParams,
    t_samples,
    workers: Optional[int] = None,
) -> AveragedEnergy:
    """
    Monte Carlo estimate of ∫_B mean_X Ê_{α,μ_t}(f_t X) dt.

    Args:
        t_samples: Parameters drawn uniformly from B (see sample_annulus)

    Returns:
        AveragedEnergy: per-t means, vol(B)·(sample mean), its standard error
        and κ = estimate / |log2 delta0|
    """
    return summarize_energies(energy_matrix(cloud, fam, params, t_samples, workers), fam.m, params.delta0)


def summarize_energies(energies: np.ndarray, m: int, delta0: float) -> AveragedEnergy:
    """AveragedEnergy from a precomputed energy_matrix."""
    per_t = energies.mean(axis=1)
    volume = annulus_volume(m)
    estimate = volume * float(np.mean(per_t))
    spread = float(np.std(per_t, ddof=1)) if per_t.size > 1 else 0.0
    log_scale = abs(math.log2(delta0))
    kappa = estimate / log_scale if log_scale > 0 else math.nan
    logger.info(f"Averaged projected energy {estimate:.6g} over {per_t.size} parameters (kappa {kappa:.4g})")
    return AveragedEnergy(
        per_t_mean=per_t.tolist(),
        mc_estimate=estimate,
        standard_error=volume * spread / math.sqrt(per_t.size),
        annulus_volume=volume,
        log_scale=log_scale,
        kappa=kappa,
    )


def select_good_sets(
    cloud: PointCloud,
    fam: ProjectionFamily,
    params: TruncatedEnergyParams,
    epsilon: float,
    t_samples,
    workers: Optional[int] = None,
    energies: Optional[np.ndarray] = None,
) -> GoodSetSelection:
    """
    Two Chebyshev cuts on the projected energies.

    With C′ the mean of Ê over all sampled (t, X):
      - t is kept in B′ iff mean_X Ê < C′·delta0^{-2ε}
      - for kept t, X is kept in F_t iff Ê(f_t X) < C′·delta0^{-3ε}

    Args:
        epsilon (float): In (0, 1)
        energies (np.ndarray, optional): Precomputed energy_matrix output
    """
    if not 0.0 < epsilon < 1.0:
        raise ContractViolation(f"epsilon must lie in (0, 1), got {epsilon}")
    if energies is None:
        energies = energy_matrix(cloud, fam, params, t_samples, workers)
    per_t = energies.mean(axis=1)
    c_prime = float(np.mean(per_t))
    t_threshold = c_prime * params.delta0 ** (-2.0 * epsilon)
    x_threshold = c_prime * params.delta0 ** (-3.0 * epsilon)

    good_t = [i for i in range(per_t.size) if per_t[i] < t_threshold]
    good_lookup = set(good_t)
    profiles = []
    fractions = {}
    for i, row in enumerate(energies):
        # F_t is only defined for t in B'
        surviving = np.flatnonzero(row < x_threshold) if i in good_lookup else np.array([], dtype=int)
        profiles.append(
            EnergyProfile(
                t_index=i,
                per_point=list(zip(range(row.size), row.tolist())),
                mean=float(per_t[i]),
                threshold_used=x_threshold,
                surviving_indices=surviving.tolist(),
                in_good_set=i in good_lookup,
            )
        )
        if i in good_lookup:
            fractions[i] = 1.0 - surviving.size / row.size

    rejected = 1.0 - len(good_t) / per_t.size
    bound = params.delta0**epsilon
    if rejected > bound:
        logger.warning(f"Rejected parameter fraction {rejected:.4g} exceeds delta0^eps={bound:.4g}")
    logger.info(f"Good sets: {len(good_t)}/{per_t.size} parameters kept, C'={c_prime:.6g}")
    return GoodSetSelection(
        epsilon=epsilon,
        c_prime=c_prime,
        t_threshold=t_threshold,
        x_threshold=x_threshold,
        good_t_indices=good_t,
        rejected_t_fraction=rejected,
        chebyshev_bound=bound,
        exceptional_point_fractions=fractions,
        profiles=profiles,
    )


def energy_superlevel_measure(
    cloud: PointCloud,
    fam: ProjectionFamily,
    params: TruncatedEnergyParams,
    R: float,
    t_samples,
    workers: Optional[int] = None,
) -> SuperlevelEstimate:
    """
    Measure of {t ∈ B : mean_X Ê_{α,μ_t}(f_t X) > R}, with the Chebyshev bound
    (∫_B mean_X Ê dt) / R it must respect.
    """
    if not R > 0:
        raise ContractViolation(f"R must be positive, got {R}")
    per_t = energy_matrix(cloud, fam, params, t_samples, workers).mean(axis=1)
    volume = annulus_volume(fam.m)
    p = float(np.mean(per_t > R))
    return SuperlevelEstimate(
        R=R,
        measure_estimate=volume * p,
        standard_error=volume * math.sqrt(p * (1.0 - p) / per_t.size),
        chebyshev_bound=volume * float(np.mean(per_t)) / R,
        sample_count=per_t.size,
    )


def energy_profile_frame(profile: EnergyProfile) -> pd.DataFrame:
    return pd.DataFrame(profile.per_point, columns=["index", "energy"])


def annuli_profile_frame(profile: AnnuliProfile) -> pd.DataFrame:
    return pd.DataFrame(
        [(e.k, e.mass, e.weighted) for e in profile.per_k],
        columns=["k", "mass", "weighted"],
    )


def write_energy_profile(profile: EnergyProfile, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    energy_profile_frame(profile).to_csv(path, index=False, float_format="%.17g")
    return path


def write_annuli_profile(profile: AnnuliProfile, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    annuli_profile_frame(profile).to_csv(path, index=False, float_format="%.17g")
    return path
