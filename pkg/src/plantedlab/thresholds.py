"""Threshold functionals for the multi-layer model: the generalized
Kesten-Stigum value and the layer transfer matrix.

With Delta_l = lam_l^2 d_l, the KS functional is

    F = max( max_l Delta_l,
             sum_l rho^4 Delta_l / (1 - (1 - rho^4) Delta_l) )

and the transfer matrix is P = diag(Delta) (I + rho^4 (J - I)).  F < 1 is
equivalent to the spectral radius of P being below 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidSpec, TooLarge

BRUTE_FORCE_GUARD = 10 ** 7


@dataclass(frozen=True)
class ThresholdReport:
    F_value: float
    sigma_plus: float
    below_threshold: bool


@dataclass(frozen=True)
class TransferChainResult:
    recursion: float
    brute_force: Optional[float]   # None when the word count exceeds the guard
    sigma_plus: float


def transfer_matrix(rho: float, delta_list: Sequence[float]) -> np.ndarray:
    """P = diag(Delta) (I + rho^4 (J - I))."""
    delta = np.asarray(delta_list, dtype=float)
    L = len(delta)
    r4 = rho ** 4
    mix = np.full((L, L), r4)
    np.fill_diagonal(mix, 1.0)
    return delta[:, None] * mix


def sigma_plus(P: np.ndarray, tol: float = 1e-13, max_iter: int = 100_000) -> float:
    """Largest eigenvalue of the (nonnegative) transfer matrix by power iteration."""
    L = P.shape[0]
    v = np.ones(L) / math.sqrt(L)
    prev = 0.0
    for _ in range(max_iter):
        w = P @ v
        s = float(np.linalg.norm(w))
        if s == 0.0:
            return 0.0
        v = w / s
        if abs(s - prev) <= tol * max(1.0, s):
            return s
        prev = s
    return prev


def ks_threshold(rho: float, d_list: Sequence[float],
                 lam_list: Sequence[float]) -> ThresholdReport:
    """Generalized Kesten-Stigum functional and the transfer spectral radius.

    Reports F = +inf when some denominator 1 - (1 - rho^4) lam^2 d is not
    positive.  below_threshold is F < 1.
    """
    d = np.asarray(d_list, dtype=float)
    lam = np.asarray(lam_list, dtype=float)
    if d.shape != lam.shape or d.ndim != 1 or len(d) == 0:
        raise InvalidSpec("d_list and lam_list must be equal-length nonempty lists")
    if not 0 <= rho <= 1:
        raise InvalidSpec("rho must lie in [0,1]")
    delta = lam * lam * d
    r4 = rho ** 4
    denom = 1.0 - (1.0 - r4) * delta
    if np.any(denom <= 0):
        f = math.inf
    else:
        f = max(float(delta.max()), float(np.sum(r4 * delta / denom)))
    sp = sigma_plus(transfer_matrix(rho, delta))
    return ThresholdReport(F_value=f, sigma_plus=sp, below_threshold=f < 1.0)


def transfer_chain_sum(aleph: int, rho: float, delta_list: Sequence[float],
                       brute_force: str = "auto") -> TransferChainResult:
    """Weighted sum over layer words of length aleph, computed two ways.

    The sum is over words w in [L]^aleph of
    rho^(4 |dif(w)|) * prod_l Delta_l^(count of l in w), where |dif(w)| is
    the number of adjacent layer changes.  The recursion evaluates it as
    1^T P^(aleph-1) Delta; the brute force enumerates the words.  The two
    agree to the float rounding of a length-aleph product.

    brute_force: "auto" (skip past the guard), "always" (TooLarge past the
    guard), or "never".
    """
    if aleph < 1:
        raise InvalidSpec("aleph must be at least 1")
    delta = np.asarray(delta_list, dtype=float)
    L = len(delta)
    P = transfer_matrix(rho, delta)
    x = delta.copy()
    for _ in range(aleph - 1):
        x = P @ x
    recursion = float(x.sum())

    bf: Optional[float] = None
    count = L ** aleph
    if brute_force == "always" and count > BRUTE_FORCE_GUARD:
        raise TooLarge(f"{count} words exceed the brute-force guard")
    if brute_force != "never" and count <= BRUTE_FORCE_GUARD:
        r4 = rho ** 4
        total = []
        chunk = 1 << 16
        for start in range(0, count, chunk):
            idx = np.arange(start, min(start + chunk, count), dtype=np.int64)
            words = np.empty((len(idx), aleph), dtype=np.int64)
            rem = idx
            for pos in range(aleph - 1, -1, -1):
                words[:, pos] = rem % L
                rem = rem // L
            difs = (words[:, 1:] != words[:, :-1]).sum(axis=1) if aleph > 1 \
                else np.zeros(len(idx), dtype=np.int64)
            weights = (r4 ** difs) * np.prod(delta[words], axis=1)
            total.append(float(weights.sum()))
        bf = math.fsum(total)
    return TransferChainResult(recursion=recursion, brute_force=bf,
                               sigma_plus=sigma_plus(P))
