"""Noise splitting: turn one observation into an estimation half A and an
independent validation half B.

Gaussian split (split ratio kappa > 0, fresh noise Z with the observation's
null law):

    A = (Y + kappa Z) / sqrt(1 + kappa^2)
    B = (Y - Z / kappa) / sqrt(1 + kappa^-2)

Under the null, A and B are independent copies of the null.  Under a planted
law Y = Theta' + W, A is again a planted instance with signal
Theta' / sqrt(1 + kappa^2) and B's noise is independent of A.

Bernoulli split (base rate p, retention a, b): a coupled pair (xi, xi') with
joint law (p a b, a - p a b, b - p a b, 1 - a - b + p a b) on
(1,1), (1,0), (0,1), (0,0); then A_i = Y_i xi_i and B_i = Y_i xi'_i.
If Y ~ Ber(p)^N the halves are independent with rates p a and p b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    DegenerateConditioning, InvalidParams, NonBinaryInput, ShapeMismatch,
)
from .models import hermitian_gaussian, symmetric_gaussian
from .rng import RandomStream, as_generator

DEFAULT_KAPPA = 0.1        # small signal loss in the A half
# Largest retention that keeps the joint law a probability vector for every
# base rate: the (0,0) cell is 1 - a - b + p a b, so a = b = 1/2 is always valid.
DEFAULT_RETENTION = 0.5


@dataclass(frozen=True)
class GaussianSplitParams:
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParams("kappa must be positive")


@dataclass(frozen=True)
class BernoulliSplitParams:
    """Base rate p and retentions a, b.  Valid only when a + b <= 1 + p a b."""

    p: float
    a: float = DEFAULT_RETENTION
    b: float = DEFAULT_RETENTION

    def __post_init__(self):
        for name, v in (("p", self.p), ("a", self.a), ("b", self.b)):
            if not 0 <= v <= 1:
                raise InvalidParams(f"{name} must lie in [0,1]")
        bernoulli_pair_pmf(self)  # validates the four cell masses


@dataclass
class SplitPair:
    A: np.ndarray
    B: np.ndarray
    params: Union[GaussianSplitParams, BernoulliSplitParams]


def bernoulli_pair_pmf(params: BernoulliSplitParams) -> np.ndarray:
    """Joint law of (xi, xi') as masses on (1,1), (1,0), (0,1), (0,0).

    Computed with compensated arithmetic so the four cells sum to 1 exactly.
    """
    p, a, b = params.p, params.a, params.b
    p11 = p * a * b
    p10 = a - p11
    p01 = b - p11
    p00 = math.fsum([1.0, -p11, -p10, -p01])
    cells = np.array([p11, p10, p01, p00])
    if np.any(cells < 0):
        raise InvalidParams(f"joint law has a negative cell: {cells.tolist()}")
    return cells


def gaussian_split(Y: np.ndarray, params: GaussianSplitParams,
                   rng: RandomStream | np.random.Generator) -> SplitPair:
    """Split a symmetric (or Hermitian) observation, or a stack of them.

    The external noise Z is drawn from the matching null law: real symmetric
    with N(0,2) diagonal, or GUE-style Hermitian for complex input.  All
    entries are split, diagonal included, at their raw scale.
    """
    Y = np.asarray(Y)
    gen = as_generator(rng)
    if Y.ndim == 3:
        halves = [_split_one(Y[k], params, gen) for k in range(Y.shape[0])]
        return SplitPair(
            A=np.stack([h[0] for h in halves]),
            B=np.stack([h[1] for h in halves]),
            params=params,
        )
    if Y.ndim != 2:
        raise ShapeMismatch(f"expected a matrix or stack of matrices, got ndim={Y.ndim}")
    a, b = _split_one(Y, params, gen)
    return SplitPair(A=a, B=b, params=params)


def _split_one(Y: np.ndarray, params: GaussianSplitParams,
               gen: np.random.Generator):
    n, m = Y.shape
    if n != m:
        raise ShapeMismatch(f"observation must be square, got {Y.shape}")
    if np.iscomplexobj(Y):
        if abs(Y - Y.conj().T).max(initial=0.0) > 1e-8:
            raise ShapeMismatch("complex observation must be Hermitian")
        z = hermitian_gaussian(n, gen)
    else:
        if np.abs(Y - Y.T).max(initial=0.0) > 1e-8:
            raise ShapeMismatch("observation must be symmetric")
        z = symmetric_gaussian(n, gen, diag_var=2.0)
    k = params.kappa
    a = (Y + k * z) / np.sqrt(1.0 + k * k)
    b = (Y - z / k) / np.sqrt(1.0 + 1.0 / (k * k))
    return a, b


def bernoulli_split(Y: np.ndarray, params: BernoulliSplitParams,
                    rng: RandomStream | np.random.Generator) -> SplitPair:
    """Entrywise Bernoulli split A_i = Y_i xi_i, B_i = Y_i xi'_i.

    (xi, xi') pairs are drawn by inverse CDF on the four-cell table from a
    single uniform per entry, so the split is order-independent.  Y may have
    any shape; entries must be 0/1.
    """
    Y = np.asarray(Y)
    if not np.isin(Y, (0, 1)).all():
        raise NonBinaryInput("observation entries must be 0 or 1")
    cells = bernoulli_pair_pmf(params)
    c1, c2, c3 = cells[0], cells[0] + cells[1], cells[0] + cells[1] + cells[2]
    u = as_generator(rng).random(Y.shape)
    xi = (u < c2).astype(np.int8)                    # cells (1,1) and (1,0)
    xi_p = ((u < c1) | ((u >= c2) & (u < c3))).astype(np.int8)
    yint = Y.astype(np.int8)
    return SplitPair(A=yint * xi, B=yint * xi_p, params=params)


def split_symmetric_binary(Y: np.ndarray, params: BernoulliSplitParams,
                           rng: RandomStream | np.random.Generator) -> SplitPair:
    """Bernoulli split of a symmetric 0/1 adjacency matrix.

    Splits the upper triangle entrywise and mirrors, so both halves stay
    symmetric with zero diagonal.
    """
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got {Y.shape}")
    n = Y.shape[0]
    iu = np.triu_indices(n, k=1)
    pair = bernoulli_split(Y[iu], params, rng)
    a = np.zeros((n, n), dtype=np.int8)
    b = np.zeros((n, n), dtype=np.int8)
    a[iu] = pair.A
    b[iu] = pair.B
    return SplitPair(A=a + a.T, B=b + b.T, params=params)


def conditional_mean_b(q: float, params: BernoulliSplitParams,
                       a_val: float) -> float:
    """E[Y xi' | Y xi = a_val] for Y ~ Ber(q) independent of (xi, xi').

    Exact closed form: q b - (q - p) b (a_val - q a) / (1 - q a).
    """
    p, a, b = params.p, params.a, params.b
    if q * a == 1:
        raise DegenerateConditioning("qa = 1: conditioning on Y xi = 0 is degenerate")
    if not q * a < 1:
        raise InvalidParams("need qa < 1")
    return q * b - (q - p) * b / (1.0 - q * a) * (a_val - q * a)


def split_to_json(pair: SplitPair, rng: RandomStream) -> dict:
    """JSON block recording a split next to its instance document.

    Schema ("plantedlab.split.v1"): {"schema", "params": {...}, "seed",
    "stream_id", "A": <array block>, "B": <array block>}.
    """
    from .models import _array_to_block  # shared array encoding

    if isinstance(pair.params, GaussianSplitParams):
        pblock = {"kind": "gaussian", "kappa": pair.params.kappa}
    else:
        pblock = {"kind": "bernoulli", "p": pair.params.p,
                  "a": pair.params.a, "b": pair.params.b}
    return {
        "schema": "plantedlab.split.v1",
        "params": pblock,
        "seed": rng.seed,
        "stream_id": rng.stream_id,
        "A": _array_to_block(np.asarray(pair.A)),
        "B": _array_to_block(np.asarray(pair.B)),
    }
