"""
Projection analysis

Concentration of the scalar projections π_t(F) at scale δ, the finitary
check that most parameters t admit a large subset of F without
concentration, the transversality measure of the factor map and the
moment-curve stage s ↦ (1, s, s²)·f_t(X).
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import lie
from .errors import ContractViolation, Rejection
from .geometry import (
    ProjectionFamily,
    annulus_volume,
    make_rng,
    moment_expand,
    param_samples,
    project,
)
from .models import (
    ConcentrationReport,
    DimensionReport,
    DimensionSample,
    MomentCurveReport,
    SweepConfigEcho,
    SweepReport,
    TransversalityEstimate,
    TSampleSummary,
)
from .parallel import map_ordered
from .pointcloud import PointCloud, box_dimension, dyadic_ladder, regularity_constant, verify_regularity

logger = logging.getLogger(__name__)


def _windows(values: np.ndarray, delta: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Sort the values and find, for each sorted position i, the half-open range
    [lo_i, hi_i) of positions j with |s_j - s_i| <= delta.

    The binary search bounds are corrected with the same floating point
    differences a direct comparison would use, so the ranges agree exactly
    with brute force.
    """
    order = np.argsort(values, kind="stable")
    s = values[order]
    size = s.size
    pos = np.arange(size)
    lo = np.searchsorted(s, s - delta, side="left")
    hi = np.searchsorted(s, s + delta, side="right")
    while True:
        grow = (lo > 0) & (s - s[np.maximum(lo - 1, 0)] <= delta)
        if not grow.any():
            break
        lo[grow] -= 1
    while True:
        shrink = (lo < pos) & (s - s[np.minimum(lo, size - 1)] > delta)
        if not shrink.any():
            break
        lo[shrink] += 1
    while True:
        grow = (hi < size) & (s[np.minimum(hi, size - 1)] - s <= delta)
        if not grow.any():
            break
        hi[grow] += 1
    while True:
        shrink = (hi > pos + 1) & (s[np.maximum(hi - 1, 0)] - s > delta)
        if not shrink.any():
            break
        hi[shrink] -= 1
    return order, lo, hi


def window_counts(values, delta: float) -> np.ndarray:
    """#{j : |v_j - v_i| <= delta} for every i, self included, in input order."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return np.zeros(0, dtype=np.int64)
    order, lo, hi = _windows(v, delta)
    counts = np.empty(v.size, dtype=np.int64)
    counts[order] = hi - lo
    return counts


def brute_force_concentration(values, delta: float) -> np.ndarray:
    """O(N²) oracle for window_counts."""
    v = np.asarray(values, dtype=float).ravel()
    return np.count_nonzero(np.abs(v[:, None] - v[None, :]) <= delta, axis=1)


def greedy_removal(values, delta: float, bound: float, budget: int) -> Tuple[np.ndarray, bool]:
    """
    Remove the point with the largest window count until every survivor's
    count is at most `bound` or `budget` points are gone.

    Ties go to the lowest sorted position.

    Returns:
        (alive mask in input order, whether the bound holds for the survivors)
    """
    v = np.asarray(values, dtype=float).ravel()
    order, lo, hi = _windows(v, delta)
    counts = (hi - lo).astype(np.int64)
    dead = -(v.size + 1)
    removed = 0
    success = False
    while True:
        j = int(np.argmax(counts))
        if counts[j] <= bound:
            success = True
            break
        if removed >= budget:
            break
        counts[lo[j] : hi[j]] -= 1
        counts[j] = dead
        removed += 1
    alive = np.empty(v.size, dtype=bool)
    alive[order] = counts >= 0
    return alive, success


def theorem_bound(C: float, delta0: float, delta: float, alpha: float, size: int) -> float:
    """C·delta0^{-10}·δ^α·N."""
    return C * delta0**-10 * delta**alpha * size


def proof_bound(C: float, delta0: float, delta: float, alpha: float, epsilon: float, size: int) -> float:
    """C·delta0^{-10ε}·δ^α·N."""
    return C * delta0 ** (-10.0 * epsilon) * delta**alpha * size


def removal_budget(epsilon: float, delta: float, a_emp: float = 1.0) -> float:
    """Fraction min(1, ε^{-A}·δ^ε) of points that may be discarded."""
    return min(1.0, epsilon ** (-a_emp) * delta**epsilon)


def concentration_counts(
    cloud: PointCloud,
    fam: ProjectionFamily,
    t,
    delta: float,
    restrict_to: Optional[Sequence[int]] = None,
    bound: Optional[float] = None,
) -> ConcentrationReport:
    """
    Window counts of π_t over the cloud (or the restricted subset).

    Args:
        cloud (PointCloud): The cloud F
        fam (ProjectionFamily): The family (L, q)
        t: Parameter of length n-2
        delta (float): Window half-width, at least cloud.delta0
        restrict_to (Sequence[int], optional): Indices forming the subset
        bound (float, optional): Count bound for bad_fraction; the theorem
            form C·delta0^{-10}·δ^α·N with the cloud's claims by default

    Returns:
        ConcentrationReport: counts per restricted index; surviving indices
        are those whose count is within the bound
    """
    if delta < cloud.delta0:
        raise Rejection([f"delta={delta} is below the resolution floor delta0={cloud.delta0}"], subject="concentration counts")
    values = project(fam, t, cloud.points)
    idx = np.arange(cloud.size) if restrict_to is None else np.unique(np.asarray(restrict_to, dtype=np.int64))
    counts = window_counts(values[idx], delta)
    if bound is None:
        bound = theorem_bound(cloud.claimed_C, cloud.delta0, delta, cloud.claimed_alpha, idx.size)
    within = counts <= bound
    t_list = np.atleast_1d(np.asarray(getattr(t, "t", t), dtype=float)).tolist()
    return ConcentrationReport(
        t=t_list,
        delta=delta,
        per_point_counts=list(zip(idx.tolist(), counts.tolist())),
        max_count=int(counts.max()) if counts.size else 0,
        bad_fraction=float(np.mean(~within)) if counts.size else 0.0,
        bound_used=bound,
        surviving_indices=idx[within].tolist(),
    )


def _scalar_values(cloud: PointCloud, fam: ProjectionFamily, t: np.ndarray, realization: str) -> np.ndarray:
    if realization == "adjoint":
        return lie.xi_values(t, cloud.points)
    return project(fam, t, cloud.points)


def finitary_check(
    cloud: PointCloud,
    fam: ProjectionFamily,
    delta: float,
    epsilon: float,
    t_samples,
    bound_form: str = "theorem",
    a_emp: float = 1.0,
    regularity: Optional[float] = None,
    realization: str = "projection",
    workers: Optional[int] = None,
    seed: Optional[int] = None,
) -> SweepReport:
    """
    Sweep the parameter samples at one scale.

    For each t, points are removed worst-first until every survivor's window
    count is within the bound; t is good when that takes at most
    min(1, ε^{-A}·δ^ε)·N removals. Both bound forms are evaluated and the one
    named by `bound_form` decides `good`.

    Args:
        delta (float): Scale in [delta0, 1]
        epsilon (float): Exponent ε of the removal budget and the proof-form bound
        t_samples: Parameters in B
        bound_form (str): "theorem" (C·delta0^{-10}·δ^α·N) or "proof" (C·delta0^{-10ε}·δ^α·N)
        a_emp (float): Exponent A of the budget
        regularity (float, optional): Measured constant C; measured here when omitted
        realization (str): "projection" for π_t, "adjoint" for ξ_t (standard family only)
        seed (int, optional): Seed that produced t_samples, echoed in the report
    """
    if not cloud.delta0 <= delta <= 1.0:
        raise Rejection([f"delta={delta} outside [delta0={cloud.delta0}, 1]"], subject="finitary check")
    if bound_form not in ("theorem", "proof"):
        raise ContractViolation(f"unknown bound form {bound_form!r}")
    if realization not in ("projection", "adjoint"):
        raise ContractViolation(f"unknown realization {realization!r}")
    if realization == "adjoint" and not fam.is_standard():
        raise Rejection(["the adjoint realization only exists for the standard family (id, q_st)"], subject="finitary check")
    ts = param_samples(fam.m, t_samples)

    if regularity is None:
        regularity = verify_regularity(cloud).worst_ratio
    alpha, size = cloud.claimed_alpha, cloud.size
    bounds = {
        "theorem": theorem_bound(regularity, cloud.delta0, delta, alpha, size),
        "proof": proof_bound(regularity, cloud.delta0, delta, alpha, epsilon, size),
    }
    alternate_form = "proof" if bound_form == "theorem" else "theorem"
    budget_fraction = removal_budget(epsilon, delta, a_emp)
    budget = int(math.floor(budget_fraction * size + 1e-9))

    def sweep_one(t: np.ndarray) -> TSampleSummary:
        values = _scalar_values(cloud, fam, t, realization)
        counts = window_counts(values, delta)
        alive, good = greedy_removal(values, delta, bounds[bound_form], budget)
        _, alternate_good = greedy_removal(values, delta, bounds[alternate_form], budget)
        return TSampleSummary(
            t=t.tolist(),
            max_count=int(counts.max()),
            bad_fraction=float(np.mean(counts > bounds[bound_form])),
            removed_fraction=1.0 - float(np.count_nonzero(alive)) / size,
            good=good,
            alternate_good=alternate_good,
        )

    samples = map_ordered(sweep_one, list(ts), workers)
    exceptional = sum(not s.good for s in samples) / len(samples)
    alternate = sum(not s.alternate_good for s in samples) / len(samples)
    logger.info(f"delta={delta:.3e}: exceptional fraction {exceptional:.4g} ({bound_form}), {alternate:.4g} ({alternate_form})")
    return SweepReport(
        delta=delta,
        bound_form=bound_form,
        realization=realization,
        bound_used=bounds[bound_form],
        alternate_bound=bounds[alternate_form],
        removal_budget=budget_fraction,
        regularity_constant=regularity,
        samples=samples,
        exceptional_fraction=exceptional,
        alternate_exceptional_fraction=alternate,
        config=SweepConfigEcho(
            seed=seed,
            point_count=size,
            alpha=alpha,
            epsilon=epsilon,
            delta0=cloud.delta0,
            a_emp=a_emp,
        ),
    )


def _stratified_cube(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Jittered grid over [-2, 2]^m: the same number of uniform draws in each of k^m cells."""
    k = max(1, int(round(count ** (1.0 / m))))
    while k > 1 and k**m > count:
        k -= 1
    while (k + 1) ** m <= count:
        k += 1
    cells = k**m
    per_cell = count // cells
    index = np.tile(np.arange(cells), per_cell)
    corners = np.stack(np.unravel_index(index, (k,) * m), axis=1)
    return -2.0 + (corners + rng.random(corners.shape)) * (4.0 / k)


def transversality_measure(
    fam: ProjectionFamily,
    X,
    X_prime,
    epsilon: float,
    mc_samples: int = 100_000,
    seed: Optional[int] = 0,
) -> TransversalityEstimate:
    """
    Monte Carlo estimate of |{t ∈ B : ‖f_t(X) - f_t(X')‖ <= ε}|.

    The difference X - X' is rescaled to unit length first. Parameters are
    drawn on a jittered grid over the cube [-2, 2]^m, which contains B, and
    the indicator of B is folded into the estimate. sample_count is the
    number of draws actually used (the largest k^m multiple not above
    mc_samples). The reported standard error is the binomial one for the
    same number of independent uniform draws; stratifying with equal draws
    per cell never has larger variance, so it bounds the true error.

    Raises:
        Rejection: if X == X'
    """
    x = X.to_array() if hasattr(X, "to_array") else np.asarray(X, dtype=float)
    xp = X_prime.to_array() if hasattr(X_prime, "to_array") else np.asarray(X_prime, dtype=float)
    if x.shape != (fam.n,) or xp.shape != (fam.n,):
        raise ContractViolation(f"points must have dimension n={fam.n}")
    diff = x - xp
    length = float(np.linalg.norm(diff))
    if length == 0.0:
        raise Rejection(["X and X' coincide"], subject="transversality measure")
    diff = diff / length
    if mc_samples < 1:
        raise ContractViolation(f"mc_samples must be positive, got {mc_samples}")

    ts = _stratified_cube(fam.m, mc_samples, make_rng(seed))
    used = ts.shape[0]
    radii = np.linalg.norm(ts, axis=1)
    in_b = (radii >= 1.0) & (radii <= 2.0)
    middle = ts @ fam.L.T @ diff[1:-1]
    quad = np.einsum("ij,jk,ik->i", ts, fam.Q, ts) * diff[-1]
    norms = np.sqrt(diff[0] ** 2 + middle**2 + quad**2)
    p = float(np.mean(in_b & (norms <= epsilon)))
    cube = 4.0**fam.m
    return TransversalityEstimate(
        epsilon=epsilon,
        measure_estimate=cube * p,
        standard_error=cube * math.sqrt(p * (1.0 - p) / used),
        sample_count=used,
        seed=seed,
        annulus_volume=annulus_volume(fam.m),
    )


def moment_curve_concentration(
    triples,
    delta: float,
    epsilon: float,
    s_grid: Sequence[float],
    alpha: float = 1.0,
    c_hat: Optional[float] = None,
    workers: Optional[int] = None,
) -> MomentCurveReport:
    """
    Window counts of (1, s, s²)·Y over the triples for every s in the grid.

    s passes when every count is at most Ĉ·δ^{α-7ε}·N. Ĉ defaults to the
    non-concentration constant of the triples over dyadic scales >= √δ.
    """
    Y = np.asarray(triples, dtype=float)
    if Y.ndim == 1:
        Y = Y[None, :]
    if Y.shape[0] == 0 or Y.shape[1] != 3:
        raise ContractViolation(f"triples must be a non-empty (N, 3) array, got shape {Y.shape}")
    if not delta > 0:
        raise ContractViolation(f"delta must be positive, got {delta}")
    if c_hat is None:
        scales = dyadic_ladder(math.sqrt(delta), 1.0) if delta <= 1.0 else [1.0]
        c_hat, _, _ = regularity_constant(Y, alpha, scales or [1.0])
    size = Y.shape[0]
    bound = c_hat * delta ** (alpha - 7.0 * epsilon) * size

    def count_one(s: float) -> ConcentrationReport:
        counts = window_counts(Y @ moment_expand(s), delta)
        within = counts <= bound
        return ConcentrationReport(
            t=[float(s)],
            delta=delta,
            per_point_counts=list(enumerate(counts.tolist())),
            max_count=int(counts.max()),
            bad_fraction=float(np.mean(~within)),
            bound_used=bound,
            surviving_indices=np.flatnonzero(within).tolist(),
        )

    reports = map_ordered(count_one, [float(s) for s in s_grid], workers)
    good_s = [r.t[0] for r in reports if r.max_count <= bound]
    return MomentCurveReport(
        delta=delta,
        epsilon=epsilon,
        alpha=alpha,
        c_hat=c_hat,
        bound_used=bound,
        reports=reports,
        good_s=good_s,
        good_s_fraction=len(good_s) / len(reports) if reports else 0.0,
    )


def projected_dimensions(
    cloud: PointCloud,
    fam: ProjectionFamily,
    t_samples,
    fit_range: Optional[Tuple[float, float]] = None,
    t0: Optional[Sequence[float]] = None,
    workers: Optional[int] = None,
) -> DimensionReport:
    """Box-counting dimension of π_t(F) for each sampled t."""
    ts = param_samples(fam.m, t_samples)
    anchor = None if t0 is None else np.asarray(t0, dtype=float)

    def estimate_one(t: np.ndarray) -> DimensionSample:
        estimate = box_dimension(project(fam, t, cloud.points), fit_range=fit_range, delta0=cloud.delta0)
        distance = None if anchor is None else float(np.linalg.norm(t - anchor))
        return DimensionSample(t=t.tolist(), distance_to_t0=distance, estimate=estimate)

    samples: List[DimensionSample] = map_ordered(estimate_one, list(ts), workers)
    median = float(np.median([s.estimate.slope for s in samples]))
    logger.info(f"Median box dimension of {len(samples)} projections: {median:.4f}")
    return DimensionReport(samples=samples, median_slope=median)
