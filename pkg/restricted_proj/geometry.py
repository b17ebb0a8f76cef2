"""
Projection family, factor map and moment curve

Coordinates on ℝⁿ are (r1, w, r2) with w ∈ ℝ^{n-2}. A family is a pair
(L, q) of an isomorphism L of ℝ^{n-2} and a positive definite quadratic form
q(t) = tᵀQt. For each parameter t it gives

    π_t(r1, w, r2) = r1 + w·L(t) + r2 q(t)            (project)
    f_t(r1, w, r2) = (r1, w·L(t), r2 q(t))            (factor_map)

and the two are tied by π_{st}(X) = (1, s, s²)·f_t(X).
"""

import logging
import math
from functools import cached_property
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ContractViolation, Rejection
from .models import FamilySpec, FamilyValidation, MomentVector, ParamVector, Point

logger = logging.getLogger(__name__)

TOLERANCE = 1e-12

PointLike = Union[Point, Sequence[float], np.ndarray]
ParamLike = Union[ParamVector, Sequence[float], np.ndarray, float]


def make_rng(seed: Union[int, Sequence[int], None]) -> np.random.Generator:
    """The package RNG: numpy's PCG64 bit generator, portable across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


class ProjectionFamily:
    """
    The pair (L, q) defining π_{L,q,t} and f_t.

    The quadratic form is stored as its symmetric matrix Q. Both matrices are
    read-only once the family is built.

    Args:
        L: (n-2) × (n-2) matrix, or a scalar when n = 3
        Q: (n-2) × (n-2) symmetric matrix of q, or a scalar when n = 3
    """

    def __init__(self, L, Q):
        L = np.array(L, dtype=float)
        Q = np.array(Q, dtype=float)
        if L.ndim == 0:
            L = L.reshape(1, 1)
        if Q.ndim == 0:
            Q = Q.reshape(1, 1)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ContractViolation(f"L must be square, got shape {L.shape}")
        if Q.shape != L.shape:
            raise ContractViolation(f"Q must have the shape of L {L.shape}, got {Q.shape}")
        if not np.all(np.isfinite(L)) or not np.all(np.isfinite(Q)):
            raise ContractViolation("L and Q must have finite entries")
        if not np.allclose(Q, Q.T, rtol=0.0, atol=TOLERANCE):
            raise ContractViolation("Q must be symmetric")
        L.setflags(write=False)
        Q.setflags(write=False)
        self.L = L
        self.Q = Q

    @classmethod
    def standard(cls, n: int) -> "ProjectionFamily":
        """(id, q_st) with q_st(t) = ½‖t‖², the family realized by the adjoint action."""
        if n < 3:
            raise ContractViolation(f"n must be at least 3, got {n}")
        m = n - 2
        return cls(np.eye(m), 0.5 * np.eye(m))

    @classmethod
    def from_spec(cls, spec: FamilySpec, n: int) -> "ProjectionFamily":
        if spec.kind == "standard":
            return cls.standard(n)
        if spec.L is None or spec.Q is None:
            raise Rejection(["matrix family needs both L and Q"], subject="family")
        family = cls(spec.L, spec.Q)
        if family.n != n:
            raise Rejection([f"family acts on n={family.n}, cloud has n={n}"], subject="family")
        return family

    @property
    def m(self) -> int:
        """Parameter dimension n-2."""
        return self.L.shape[0]

    @property
    def n(self) -> int:
        return self.m + 2

    def q(self, t: np.ndarray) -> float:
        return float(t @ self.Q @ t)

    @cached_property
    def q_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.Q)

    @cached_property
    def q_min(self) -> float:
        """min_{‖t‖=1} q(t), the smallest eigenvalue of Q."""
        return float(self.q_eigenvalues[0])

    @cached_property
    def l_norm(self) -> float:
        return float(np.linalg.norm(self.L, 2))

    def is_standard(self) -> bool:
        m = self.m
        return bool(np.array_equal(self.L, np.eye(m)) and np.array_equal(self.Q, 0.5 * np.eye(m)))

    def require_valid(self) -> "ProjectionFamily":
        report = validate_family(self)
        if not report.valid:
            raise Rejection(report.failures, subject="projection family")
        return self

    def __repr__(self) -> str:
        return f"ProjectionFamily(n={self.n}, standard={self.is_standard()})"


def _param_array(fam: ProjectionFamily, t: ParamLike) -> np.ndarray:
    if isinstance(t, ParamVector):
        arr = t.to_array()
    else:
        arr = np.atleast_1d(np.asarray(t, dtype=float))
    if arr.ndim != 1 or arr.shape[0] != fam.m:
        raise ContractViolation(f"parameter has length {arr.size}, family needs n-2={fam.m}")
    return arr


def _point_array(fam: ProjectionFamily, X: PointLike) -> Tuple[np.ndarray, bool]:
    if isinstance(X, Point):
        arr = X.to_array()[None, :]
        single = True
    else:
        arr = np.asarray(X, dtype=float)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != fam.n:
        raise ContractViolation(f"points have dimension {arr.shape[-1]}, family needs n={fam.n}")
    return arr, single


def _w_dot(pts: np.ndarray, lt: np.ndarray) -> np.ndarray:
    # rows accumulate in index order whatever N is
    acc = np.zeros(pts.shape[0])
    for k, coefficient in enumerate(lt):
        acc = acc + pts[:, 1 + k] * coefficient
    return acc


def project(fam: ProjectionFamily, t: ParamLike, X: PointLike):
    """
    Evaluate π_t(X) = r1 + w·L(t) + r2 q(t).

    Args:
        fam (ProjectionFamily): The family (L, q)
        t: Parameter of length n-2
        X: A Point, a length-n vector, or an (N, n) array of points

    Returns:
        float for a single point, otherwise an array of N values
    """
    tv = _param_array(fam, t)
    pts, single = _point_array(fam, X)
    lt = fam.L @ tv
    values = pts[:, 0] + _w_dot(pts, lt) + pts[:, -1] * fam.q(tv)
    return float(values[0]) if single else values


def factor_map(fam: ProjectionFamily, t: ParamLike, X: PointLike) -> np.ndarray:
    """
    Evaluate f_t(X) = (r1, w·L(t), r2 q(t)).

    Returns:
        np.ndarray: shape (3,) for a single point, (N, 3) otherwise
    """
    tv = _param_array(fam, t)
    pts, single = _point_array(fam, X)
    lt = fam.L @ tv
    triples = np.column_stack((pts[:, 0], _w_dot(pts, lt), pts[:, -1] * fam.q(tv)))
    return triples[0] if single else triples


def moment_expand(m: Union[MomentVector, float]) -> np.ndarray:
    """(1, s, s²)."""
    s = m.s if isinstance(m, MomentVector) else float(m)
    return np.array([1.0, s, s * s])


def validate_family(fam: ProjectionFamily) -> FamilyValidation:
    """
    Check the invertibility of L and the positive-definiteness of q.

    Reports ‖L‖ and q_min, the constants the implied constants of the
    finitary estimates depend on.
    """
    failures = []
    det_l = float(np.linalg.det(fam.L))
    if not abs(det_l) > TOLERANCE:
        failures.append(f"L is singular (|det L| = {abs(det_l):.3e})")

    eigenvalues = fam.q_eigenvalues
    positive = bool(eigenvalues[0] > TOLERANCE)
    if positive:
        try:
            np.linalg.cholesky(fam.Q)
        except np.linalg.LinAlgError:
            positive = False
    if not positive:
        failures.append(f"q is not positive definite (smallest eigenvalue {eigenvalues[0]:.3e})")

    if failures:
        logger.debug(f"Family rejected: {failures}")
    return FamilyValidation(
        valid=not failures,
        failures=failures,
        det_l=det_l,
        l_norm=fam.l_norm,
        q_min=fam.q_min,
        q_eigenvalues=[float(v) for v in eigenvalues],
    )


def annulus_volume(m: int) -> float:
    """Lebesgue measure of B = {t ∈ ℝ^m : 1 <= ‖t‖ <= 2}."""
    if m < 1:
        raise ContractViolation(f"m must be positive, got {m}")
    unit_ball = math.pi ** (m / 2) / math.gamma(m / 2 + 1)
    return unit_ball * (2.0**m - 1.0)


def sample_annulus(m: int, count: int, seed: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Draw `count` points uniformly from B by rejection from [-2, 2]^m.

    Args:
        m (int): Parameter dimension n-2
        count (int): Number of samples
        seed (int, optional): Seed for a fresh generator (ignored when rng is given)
        rng (np.random.Generator, optional): Generator to draw from

    Returns:
        np.ndarray: (count, m) array
    """
    if count < 0:
        raise ContractViolation(f"count must be non-negative, got {count}")
    rng = rng if rng is not None else make_rng(seed)
    acceptance = annulus_volume(m) / 4.0**m
    accepted = []
    have = 0
    while have < count:
        batch = max(64, int(1.2 * (count - have) / acceptance) + 1)
        draws = rng.uniform(-2.0, 2.0, size=(batch, m))
        norms = np.linalg.norm(draws, axis=1)
        keep = draws[(norms >= 1.0) & (norms <= 2.0)]
        accepted.append(keep)
        have += keep.shape[0]
    return np.concatenate(accepted, axis=0)[:count] if accepted else np.empty((0, m))


def param_samples(m: int, t_samples) -> np.ndarray:
    """Coerce a list of ParamVectors (or an array) into an (M, m) array."""
    rows = [s.to_array() if isinstance(s, ParamVector) else np.atleast_1d(np.asarray(s, dtype=float)) for s in t_samples]
    if not rows:
        raise Rejection(["t_samples is empty"], subject="parameter samples")
    arr = np.vstack(rows)
    if arr.shape[1] != m:
        raise ContractViolation(f"parameter samples have length {arr.shape[1]}, family needs n-2={m}")
    return arr
