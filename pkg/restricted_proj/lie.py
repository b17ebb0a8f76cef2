"""
Matrix realization inside SO(n, 1)

G = SO(Q0) for the form Q0(x) = 2 x_1 x_{n+1} - Σ_{i=2}^{n} x_i², acting on
ℝ^{n+1}. H is the stabilizer of e_n; its Lie algebra is the set of
A ∈ Lie(G) with zero n-th column, and 𝔯 is the complement spanned by the
matrices X(r1, w, r2). Conjugating X by the unipotent u_t and reading off the
coefficient of X(1, 0, 0) gives ξ_t, which coincides with the standard
projection π_t.

Indices in docstrings are 1-based, matching the block displays; arrays are
0-based.
"""

import logging
import math
from typing import Iterable, Sequence, Union

import numpy as np
import pandas as pd

from .errors import ContractViolation, Rejection
from .geometry import ProjectionFamily, make_rng, project, sample_annulus
from .models import (
    AdInvarianceReport,
    ContractionReport,
    ContractionStep,
    LieResidual,
    Point,
    RElement,
)

logger = logging.getLogger(__name__)

LIE_TOLERANCE = 1e-12

RLike = Union[Point, Sequence[float], np.ndarray]


def _coordinates(x: RLike) -> np.ndarray:
    arr = x.to_array() if isinstance(x, Point) else np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 3:
        raise ContractViolation(f"need coordinates (r1, w, r2) with n >= 3, got shape {arr.shape}")
    return arr


def q0_matrix(n: int) -> np.ndarray:
    """Q0 with Q[1, n+1] = Q[n+1, 1] = 1 and Q[i, i] = -1 for 2 <= i <= n."""
    if n < 3:
        raise Rejection([f"n must be at least 3, got {n}"], subject="q0_matrix")
    Q = np.zeros((n + 1, n + 1))
    Q[0, n] = Q[n, 0] = 1.0
    for i in range(1, n):
        Q[i, i] = -1.0
    return Q


def lie_membership(A, n: int) -> LieResidual:
    """‖AᵀQ0 + Q0A‖_F and |tr A|; passes when both are below 1e-12."""
    A = np.asarray(A, dtype=float)
    if A.shape != (n + 1, n + 1):
        raise Rejection([f"matrix has shape {A.shape}, expected {(n + 1, n + 1)}"], subject="lie_membership")
    Q = q0_matrix(n)
    form = float(np.linalg.norm(A.T @ Q + Q @ A))
    trace = abs(float(np.trace(A)))
    return LieResidual(
        form_residual=form,
        trace_residual=trace,
        passed=form < LIE_TOLERANCE and trace < LIE_TOLERANCE,
    )


def embed_r(x: RLike) -> np.ndarray:
    """
    The matrix X(r1, w, r2) ∈ 𝔯.

    Nonzero entries: X[1, n] = r1, X[n, n+1] = r1, X[n, 1] = r2,
    X[n+1, n] = r2, and X[i, n] = w_{i-1}, X[n, i] = -w_{i-1} for
    2 <= i <= n-1.
    """
    c = _coordinates(x)
    n = c.size
    r1, w, r2 = c[0], c[1:-1], c[-1]
    X = np.zeros((n + 1, n + 1))
    col = n - 1
    X[0, col] = r1
    X[col, n] = r1
    X[col, 0] = r2
    X[n, col] = r2
    X[1:col, col] = w
    X[col, 1:col] = -w
    return X


def u_matrix(t) -> np.ndarray:
    """
    The unipotent u_t: identity plus t in row 1 (columns 2..n-1), t in
    column n+1 (rows 2..n-1) and ½‖t‖² at [1, n+1]. It fixes e_n.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = t.size + 2
    U = np.eye(n + 1)
    U[0, 1 : n - 1] = t
    U[1 : n - 1, n] = t
    U[0, n] = 0.5 * float(t @ t)
    return U


def a_matrix(s: float, n: int) -> np.ndarray:
    """diag(e^s, 1, ..., 1, e^{-s})."""
    diag = np.ones(n + 1)
    diag[0] = math.exp(s)
    diag[n] = math.exp(-s)
    return np.diag(diag)


def conjugate(t, x: RLike) -> np.ndarray:
    """u_t · X · u_{-t}."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return u_matrix(t) @ embed_r(x) @ u_matrix(-t)


def xi(t, x: RLike) -> float:
    """ξ_t(X): entry [1, n] of u_t · X(r1, w, r2) · u_{-t}."""
    c = _coordinates(x)
    return float(conjugate(t, c)[0, c.size - 1])


def xi_values(t, points) -> np.ndarray:
    """ξ_t for every row of an (N, n) coordinate array, by batched conjugation."""
    pts = np.asarray(points, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = pts.shape[1]
    if t.size != n - 2:
        raise ContractViolation(f"t has length {t.size}, points need n-2={n - 2}")
    col = n - 1
    X = np.zeros((pts.shape[0], n + 1, n + 1))
    X[:, 0, col] = pts[:, 0]
    X[:, col, n] = pts[:, 0]
    X[:, col, 0] = pts[:, -1]
    X[:, n, col] = pts[:, -1]
    X[:, 1:col, col] = pts[:, 1:-1]
    X[:, col, 1:col] = -pts[:, 1:-1]
    conj = u_matrix(t) @ X @ u_matrix(-t)
    return conj[:, 0, col]


def r_component(A) -> RElement:
    """𝔯-coordinates of A ∈ Lie(G), read from its n-th column."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0] - 1
    col = n - 1
    return RElement(r1=float(A[0, col]), w=tuple(float(v) for v in A[1:col, col]), r2=float(A[n, col]))


def ad_invariance_check(t, x: RLike) -> AdInvarianceReport:
    """
    Split u_t X u_{-t} into its Lie(H) and 𝔯 parts and check both halves:
    the conjugate and the Lie(H) part lie in Lie(G), the Lie(H) part has a
    zero n-th column, and the r1-coordinate of the 𝔯 part is ξ_t(X).
    """
    c = _coordinates(x)
    n = c.size
    conj = conjugate(t, c)
    r_part = r_component(conj)
    h_part = conj - embed_r(r_part)
    conj_residual = lie_membership(conj, n)
    h_residual = lie_membership(h_part, n)
    column = float(np.linalg.norm(h_part[:, n - 1]))
    consistency = abs(r_part.r1 - xi(t, c))
    return AdInvarianceReport(
        conjugate=conj_residual,
        h_part=h_residual,
        h_part_column_residual=column,
        xi_consistency=consistency,
        passed=conj_residual.passed and h_residual.passed and column < LIE_TOLERANCE and consistency < LIE_TOLERANCE,
    )


def contraction_check(x: RLike, s_values: Iterable[float], t=None) -> ContractionReport:
    """
    Conjugate by a_s for each s.

    Reports ‖Ad(a_s)X(r1, 0, 0) - e^s·X(r1, 0, 0)‖, the norm of Ad(a_s)X for
    the full element, and ‖a_s u_t a_{-s} - I‖ (t defaults to the all-ones
    vector).
    """
    c = _coordinates(x)
    n = c.size
    t = np.ones(n - 2) if t is None else np.atleast_1d(np.asarray(t, dtype=float))
    plus = np.zeros(n)
    plus[0] = c[0]
    X_plus = embed_r(plus)
    X_full = embed_r(c)
    U = u_matrix(t)
    steps = []
    for s in s_values:
        a, a_inv = a_matrix(s, n), a_matrix(-s, n)
        steps.append(
            ContractionStep(
                s=float(s),
                r_plus_residual=float(np.linalg.norm(a @ X_plus @ a_inv - math.exp(s) * X_plus)),
                adjoint_norm=float(np.linalg.norm(a @ X_full @ a_inv)),
                unipotent_deviation=float(np.linalg.norm(a @ U @ a_inv - np.eye(n + 1))),
            )
        )
    passed = all(step.r_plus_residual < LIE_TOLERANCE for step in steps)
    return ContractionReport(x=RElement.from_array(c), steps=steps, passed=passed)


def lie_verification_table(ns: Sequence[int] = (3, 4, 5, 6, 7, 8), trials: int = 1000, seed: int = 0) -> pd.DataFrame:
    """
    Largest residual per n over random trials.

    Columns: n, xi_vs_projection, lie_membership, ad_invariance, u_group_law,
    a_group_law, contraction, passed.
    """
    rng = make_rng(seed)
    rows = []
    for n in ns:
        fam = ProjectionFamily.standard(n)
        ts = sample_annulus(n - 2, trials, rng=rng)
        xs = rng.uniform(-1.0, 1.0, size=(trials, n))
        xi_err = max(abs(xi(t, x) - project(fam, t, x)) for t, x in zip(ts, xs))
        membership = max(lie_membership(embed_r(x), n).form_residual for x in xs[: min(trials, 100)])
        ad = max(
            ad_invariance_check(t, x).conjugate.form_residual for t, x in zip(ts[: min(trials, 100)], xs[: min(trials, 100)])
        )
        t2 = sample_annulus(n - 2, 2, rng=rng)
        u_law = float(np.max(np.abs(u_matrix(t2[0]) @ u_matrix(t2[1]) - u_matrix(t2[0] + t2[1]))))
        s1, s2 = rng.uniform(-2.0, 2.0, size=2)
        a_law = float(np.max(np.abs(a_matrix(s1, n) @ a_matrix(s2, n) - a_matrix(s1 + s2, n))))
        unit = np.zeros(n)
        unit[0] = 1.0
        contraction = max(step.r_plus_residual for step in contraction_check(unit, [-3.0, -1.0, 0.0, 1.0]).steps)
        worst = max(xi_err, membership, ad, u_law, a_law, contraction)
        rows.append(
            {
                "n": n,
                "xi_vs_projection": xi_err,
                "lie_membership": membership,
                "ad_invariance": ad,
                "u_group_law": u_law,
                "a_group_law": a_law,
                "contraction": contraction,
                "passed": worst < LIE_TOLERANCE,
            }
        )
        logger.debug(f"n={n}: worst residual {worst:.3e}")
    return pd.DataFrame(rows)
