"""Correlation-preserving projection onto the binary-model constraint sets.

The constraint set is K = { Q symmetric : ||Q||_inf <= tau, Q + S0 psd }.
Given a direction X, a correlation level c and a scale M, the projection
finds the minimum-Frobenius-norm Q with Q in K and <X, Q> >= (c/2) M ||X||_F.
That is the projection of the zero matrix onto an intersection of three
closed convex sets, computed by cyclic Dykstra iterations (half-space,
entrywise cap, PSD shift, in that order).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EigenFailure, Infeasible, InvalidSpec, MaxIterations

MAX_CYCLES = 5000
FEAS_TOL = 1e-6


@dataclass(frozen=True)
class ConstraintSetK:
    """Entrywise cap tau plus the shifted PSD constraint Q + shift >= 0."""

    tau: float
    shift: np.ndarray

    def __post_init__(self):
        if self.tau < 0:
            raise InvalidSpec("tau must be nonnegative")
        s = np.asarray(self.shift, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise InvalidSpec("shift must be a square matrix")
        if not np.allclose(s, s.T, atol=1e-10):
            raise InvalidSpec("shift must be symmetric")
        object.__setattr__(self, "shift", s)

    @property
    def n(self) -> int:
        return self.shift.shape[0]


def cap_for_pds(p1: float, n: int) -> ConstraintSetK:
    """Constraint set for the planted dense subgraph: cap p1, plain PSD."""
    return ConstraintSetK(tau=p1, shift=np.zeros((n, n)))


def cap_for_sbm(q: int, lam: float, d: float, n: int) -> ConstraintSetK:
    """Constraint set for the SBM: cap (q-1) lam d / n, shift (lam d / n) I."""
    return ConstraintSetK(tau=(q - 1) * lam * d / n,
                          shift=(lam * d / n) * np.eye(n))


def cap_with_ones_shift(tau: float, k: float, n: int) -> ConstraintSetK:
    """The generic set with shift (1/k) * all-ones matrix."""
    return ConstraintSetK(tau=tau, shift=np.ones((n, n)) / k)


@dataclass
class ProjectionResult:
    Q_hat: np.ndarray
    iterations: int
    residual: float
    feasible: bool
    residual_history: Optional[list] = None


def project_entrywise_cap(Y: np.ndarray, tau: float) -> np.ndarray:
    """Exact projection onto {||Q||_inf <= tau}: clamp entries to [-tau, tau]."""
    if tau < 0:
        raise InvalidSpec("tau must be nonnegative")
    return np.clip(Y, -tau, tau)


def project_psd_shift(Y: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Frobenius projection onto {Q : Q + shift psd}.

    Eigendecompose Y + shift, clip negative eigenvalues, subtract shift.
    """
    s = np.asarray(Y) + np.asarray(shift)
    s = 0.5 * (s + s.T)
    try:
        w, v = np.linalg.eigh(s)
    except np.linalg.LinAlgError as exc:   # pragma: no cover - rare
        raise EigenFailure(str(exc)) from exc
    w = np.maximum(w, 0.0)
    return (v * w) @ v.T - shift


def _project_halfspace(Q: np.ndarray, X: np.ndarray, beta: float,
                       x_norm_sq: float) -> np.ndarray:
    gap = beta - float(np.vdot(X, Q))
    if gap <= 0:
        return Q
    return Q + (gap / x_norm_sq) * X


def min_norm_correlated(X: np.ndarray, c: float, M: float, K: ConstraintSetK,
                        max_cycles: int = MAX_CYCLES,
                        track_history: bool = False) -> ProjectionResult:
    """Minimum-norm matrix in K with <X, Q> >= (c/2) M ||X||_F.

    Infeasibility is certified up front by the Holder bound
    max_{Q in K} <X, Q> <= tau ||X||_1.  Dykstra cycles run until the
    successive-iterate Frobenius gap drops below 1e-8 (1 + ||X||_F); past
    max_cycles the call raises MaxIterations.
    """
    X = np.asarray(X, dtype=float)
    if not np.any(X):
        raise InvalidSpec("X must be nonzero")
    if not 0 < c <= 1:
        raise InvalidSpec("c must lie in (0, 1]")
    if not M > 0:
        raise InvalidSpec("M must be positive")
    X = 0.5 * (X + X.T)
    x_norm = float(np.linalg.norm(X))
    beta = 0.5 * c * M * x_norm
    if K.tau * float(np.abs(X).sum()) < beta:
        raise Infeasible("tau ||X||_1 bound falls below the correlation requirement")

    n = K.n
    q = np.zeros((n, n))
    # one Dykstra correction per set
    inc_half = np.zeros((n, n))
    inc_cap = np.zeros((n, n))
    inc_psd = np.zeros((n, n))
    x_norm_sq = x_norm * x_norm
    stop = 1e-8 * (1.0 + x_norm)
    history = [] if track_history else None
    residual = np.inf
    for cycle in range(1, max_cycles + 1):
        q_prev = q
        y = _project_halfspace(q + inc_half, X, beta, x_norm_sq)
        inc_half = q + inc_half - y
        q = y
        y = project_entrywise_cap(q + inc_cap, K.tau)
        inc_cap = q + inc_cap - y
        q = y
        y = project_psd_shift(q + inc_psd, K.shift)
        inc_psd = q + inc_psd - y
        q = y
        residual = float(np.linalg.norm(q - q_prev))
        if history is not None:
            history.append(residual)
        if residual < stop:
            return ProjectionResult(
                Q_hat=q, iterations=cycle, residual=residual,
                feasible=_is_feasible(q, X, beta, K), residual_history=history,
            )
    raise MaxIterations(f"no convergence in {max_cycles} Dykstra cycles "
                        f"(residual {residual:.3e})")


def _is_feasible(q: np.ndarray, X: np.ndarray, beta: float,
                 K: ConstraintSetK) -> bool:
    scale = 1.0 + float(np.linalg.norm(X))
    if float(np.vdot(X, q)) < beta - FEAS_TOL * scale:
        return False
    if float(np.abs(q).max(initial=0.0)) > K.tau + FEAS_TOL:
        return False
    w = np.linalg.eigvalsh(0.5 * (q + q.T) + K.shift)
    return bool(w.min() >= -FEAS_TOL)
