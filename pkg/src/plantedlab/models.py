"""Seeded samplers for the six planted models and their null counterparts.

Each sampler returns an Instance holding the observation, the latent signal,
and the signal matrix Theta of the additive-Gaussian / binary-observation
representation.  Conventions:

* Planted submatrix: Y = lam * theta theta^T + W with W symmetric,
  off-diagonal N(0,1), diagonal N(0,2).
* Planted dense subgraph / SBM / multi-layer SBM: 0/1 adjacency matrices,
  zero diagonal, entries defined on unordered pairs i < j.
* Angular synchronization: L Hermitian matrices; noise off-diagonal is
  standard complex Gaussian (x + iy with x, y ~ N(0, 1/2)), diagonal real
  N(0,1).
* Orthogonal synchronization: an (n d) x (n d) symmetric matrix; noise
  off-diagonal N(0,1), diagonal N(0,2).

Graph observations are dense 0/1 matrices up to n = 4096 and edge lists
beyond; EdgeListGraph.to_dense() is a lossless conversion.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .errors import InvalidSpec, ShapeMismatch
from .rng import RandomStream, as_generator

DENSE_GRAPH_LIMIT = 4096


# ---------------------------------------------------------------------------
# Model specs
# ---------------------------------------------------------------------------

def _check(cond: bool, msg: str):
    if not cond:
        raise InvalidSpec(msg)


@dataclass(frozen=True)
class PlantedSubmatrix:
    """Rank-one spike lam * theta theta^T in symmetric Gaussian noise."""

    n: int
    lam: float
    rho: float
    kind = "planted_submatrix"

    def __post_init__(self):
        _check(self.n >= 1, "n must be positive")
        _check(self.lam >= 0, "lam must be nonnegative")
        _check(0 <= self.rho <= 1, "rho must lie in [0,1]")


@dataclass(frozen=True)
class PlantedDenseSubgraph:
    """Bernoulli graph with an elevated edge rate p1 on a planted vertex set."""

    n: int
    rho: float
    p0: float
    p1: float
    kind = "planted_dense_subgraph"

    def __post_init__(self):
        _check(self.n >= 1, "n must be positive")
        _check(0 <= self.rho <= 1, "rho must lie in [0,1]")
        _check(0 <= self.p0 <= self.p1 <= 1, "need 0 <= p0 <= p1 <= 1")

    @property
    def effective_snr(self) -> float:
        """(p1 - p0) / sqrt(p0 (1 - p0)), the scale the advantage sums use."""
        return (self.p1 - self.p0) / np.sqrt(self.p0 * (1.0 - self.p0))


@dataclass(frozen=True)
class SBM:
    """q-community stochastic block model in the (d, lam) parametrization.

    Within-community edge probability (1 + (q-1) lam) d / n, cross-community
    (1 - lam) d / n.
    """

    n: int
    q: int
    d: float
    lam: float
    kind = "sbm"

    def __post_init__(self):
        _check(self.n >= 1, "n must be positive")
        _check(self.q >= 2, "q must be at least 2")
        _check(self.d > 0, "d must be positive")
        _check(0 <= self.lam <= 1, "lam must lie in [0,1]")
        _check(self.d / self.n <= 1, "d/n must not exceed 1")
        _check(
            (1 + (self.q - 1) * self.lam) * self.d / self.n <= 1,
            "within-community probability exceeds 1",
        )

    @property
    def p_in(self) -> float:
        return (1 + (self.q - 1) * self.lam) * self.d / self.n

    @property
    def p_out(self) -> float:
        return (1 - self.lam) * self.d / self.n


@dataclass(frozen=True)
class AngularSync:
    """Multi-frequency phase synchronization: L Hermitian spiked matrices."""

    n: int
    L: int
    lam: float
    kind = "angular_sync"

    def __post_init__(self):
        _check(self.n >= 1, "n must be positive")
        _check(self.L >= 1, "L must be positive")
        _check(self.lam >= 0, "lam must be nonnegative")


@dataclass(frozen=True)
class OrthSync:
    """Orthogonal group synchronization with d x d blocks."""

    n: int
    d: int
    lam: float
    kind = "orth_sync"

    def __post_init__(self):
        _check(self.n >= 1, "n must be positive")
        _check(self.d >= 1, "d must be a positive integer")
        _check(self.lam >= 0, "lam must be nonnegative")


@dataclass(frozen=True)
class MultiLayerSBM:
    """L correlated SBM layers sharing a latent labeling.

    Each layer resamples every vertex label: kept with probability
    (1 + (q-1) rho) / q, otherwise uniform over the other labels.
    """

    n: int
    q: int
    L: int
    rho: float
    d_layers: tuple[float, ...]
    lam_layers: tuple[float, ...]
    kind = "multilayer_sbm"

    def __post_init__(self):
        object.__setattr__(self, "d_layers", tuple(float(x) for x in self.d_layers))
        object.__setattr__(self, "lam_layers", tuple(float(x) for x in self.lam_layers))
        _check(self.n >= 1, "n must be positive")
        _check(self.q >= 2, "q must be at least 2")
        _check(self.L >= 1, "L must be positive")
        _check(0 <= self.rho <= 1, "rho must lie in [0,1]")
        _check(
            len(self.d_layers) == self.L and len(self.lam_layers) == self.L,
            "per-layer parameter lists must have length exactly L",
        )
        for d, lam in zip(self.d_layers, self.lam_layers):
            _check(d > 0, "every d_l must be positive")
            _check(0 <= lam <= 1, "every lam_l must lie in [0,1]")
            _check(d / self.n <= 1, "d_l/n must not exceed 1")
            _check(
                (1 + (self.q - 1) * lam) * d / self.n <= 1,
                "within-community probability exceeds 1 in some layer",
            )

    def layer(self, ell: int) -> SBM:
        return SBM(n=self.n, q=self.q, d=self.d_layers[ell], lam=self.lam_layers[ell])


ModelSpec = Union[
    PlantedSubmatrix, PlantedDenseSubgraph, SBM, AngularSync, OrthSync, MultiLayerSBM
]

_SPEC_KINDS = {
    cls.kind: cls
    for cls in (
        PlantedSubmatrix, PlantedDenseSubgraph, SBM, AngularSync, OrthSync,
        MultiLayerSBM,
    )
}


@dataclass(frozen=True)
class EdgeListGraph:
    """Sparse graph observation: sorted (m, 2) array of i < j pairs."""

    n: int
    edges: np.ndarray

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int8)
        if len(self.edges):
            i, j = self.edges[:, 0], self.edges[:, 1]
            a[i, j] = 1
            a[j, i] = 1
        return a


@dataclass
class Instance:
    """One observation with its latent signal and signal matrix Theta.

    observation: ndarray (model dependent shape) or EdgeListGraph(s).
    latent: dict of latent variables; empty for null draws.
    theta_matrix: Theta of the additive/binary representation; None for null.
    """

    spec: ModelSpec
    observation: object
    latent: dict = field(default_factory=dict)
    theta_matrix: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# Noise primitives
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _triu_cache(n: int):
    return np.triu_indices(n, k=1)


def symmetric_gaussian(n: int, gen: np.random.Generator,
                       diag_var: float = 2.0) -> np.ndarray:
    """Symmetric matrix, independent N(0,1) above the diagonal, N(0,diag_var) on it."""
    w = np.zeros((n, n))
    iu = _triu_cache(n)
    w[iu] = gen.standard_normal(len(iu[0]))
    w = w + w.T
    w[np.diag_indices(n)] = gen.standard_normal(n) * np.sqrt(diag_var)
    return w


def hermitian_gaussian(n: int, gen: np.random.Generator) -> np.ndarray:
    """GUE-style Hermitian matrix: off-diagonal x+iy with x,y ~ N(0,1/2), diagonal N(0,1)."""
    w = np.zeros((n, n), dtype=complex)
    iu = _triu_cache(n)
    m = len(iu[0])
    w[iu] = (gen.standard_normal(m) + 1j * gen.standard_normal(m)) / np.sqrt(2.0)
    w = w + w.conj().T
    w[np.diag_indices(n)] = gen.standard_normal(n)
    return w


def haar_orthogonal(d: int, rng: RandomStream | np.random.Generator) -> np.ndarray:
    """One d x d orthogonal matrix drawn from Haar measure.

    QR of a Gaussian matrix with the R-diagonal sign correction, which makes
    the factorization unique and the law exactly Haar.
    """
    return haar_orthogonal_batch(d, 1, as_generator(rng))[0]


def haar_orthogonal_batch(d: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """(size, d, d) stack of independent Haar orthogonal matrices."""
    g = gen.standard_normal((size, d, d))
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1).copy()
    sign = np.where(diag >= 0, 1.0, -1.0)
    return q * sign[:, None, :]


def _dense_pair_bernoulli(p: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """Symmetric 0/1 matrix with P(Y_ij = 1) = p_ij on i < j, zero diagonal."""
    n = p.shape[0]
    u = gen.random((n, n))
    iu = _triu_cache(n)
    y = np.zeros((n, n), dtype=np.int8)
    y[iu] = (u[iu] < p[iu]).astype(np.int8)
    return y + y.T


def _sparse_pair_indices(n: int, m: int, gen: np.random.Generator) -> np.ndarray:
    """m distinct unordered-pair indices out of C(n,2), by rejection."""
    total = n * (n - 1) // 2
    chosen: set[int] = set()
    while len(chosen) < m:
        need = m - len(chosen)
        draw = gen.integers(0, total, size=int(need * 1.2) + 8)
        for v in draw:
            chosen.add(int(v))
            if len(chosen) == m:
                break
    return np.sort(np.fromiter(chosen, dtype=np.int64))


def _pair_index_to_ij(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # row i owns pairs [i*n - i(i+1)/2 - ... ]; invert the triangular numbering
    # idx = i*(2n - i - 1)/2 + (j - i - 1)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2.0).astype(np.int64)
    base = i * (2 * n - i - 1) // 2
    j = idx - base + i + 1
    return i, j


def _sparse_pair_bernoulli(n: int, pmax: float, accept_fn,
                           gen: np.random.Generator) -> EdgeListGraph:
    """Edge-list sampler: candidates at rate pmax, thinned by accept_fn(i, j)."""
    total = n * (n - 1) // 2
    m = gen.binomial(total, pmax)
    idx = _sparse_pair_indices(n, int(m), gen)
    i, j = _pair_index_to_ij(idx, n)
    keep = gen.random(len(idx)) < accept_fn(i, j)
    edges = np.stack([i[keep], j[keep]], axis=1)
    return EdgeListGraph(n=n, edges=edges)


# ---------------------------------------------------------------------------
# Planted and null samplers
# ---------------------------------------------------------------------------

def sample_planted(spec: ModelSpec,
                   rng: RandomStream | np.random.Generator) -> Instance:
    """Draw one instance from the planted law of `spec`."""
    gen = as_generator(rng)
    if isinstance(spec, PlantedSubmatrix):
        theta = (gen.random(spec.n) < spec.rho).astype(np.float64)
        big_theta = spec.lam * np.outer(theta, theta)
        y = big_theta + symmetric_gaussian(spec.n, gen, diag_var=2.0)
        return Instance(spec, y, {"theta": theta}, big_theta)

    if isinstance(spec, PlantedDenseSubgraph):
        theta = (gen.random(spec.n) < spec.rho).astype(np.int8)
        big_theta = (spec.p1 - spec.p0) * np.outer(theta, theta).astype(np.float64)
        np.fill_diagonal(big_theta, 0.0)
        if spec.n <= DENSE_GRAPH_LIMIT:
            p = spec.p0 + big_theta
            y = _dense_pair_bernoulli(p, gen)
        else:
            t = theta.astype(bool)
            y = _sparse_pair_bernoulli(
                spec.n, spec.p1,
                lambda i, j: np.where(t[i] & t[j], 1.0, spec.p0 / spec.p1),
                gen,
            )
        return Instance(spec, y, {"theta": theta}, big_theta)

    if isinstance(spec, SBM):
        sigma = gen.integers(0, spec.q, size=spec.n)
        y, big_theta = _sample_sbm_layer(spec, sigma, gen)
        return Instance(spec, y, {"sigma": sigma}, big_theta)

    if isinstance(spec, AngularSync):
        phases = gen.random(spec.n) * 2.0 * np.pi
        x = np.exp(1j * phases)
        obs = np.empty((spec.L, spec.n, spec.n), dtype=complex)
        thetas = np.empty_like(obs)
        for ell in range(1, spec.L + 1):
            xe = x ** ell
            thetas[ell - 1] = (spec.lam / np.sqrt(spec.n)) * np.outer(xe, xe.conj())
            obs[ell - 1] = thetas[ell - 1] + hermitian_gaussian(spec.n, gen)
        return Instance(spec, obs, {"phases": phases}, thetas)

    if isinstance(spec, OrthSync):
        blocks = haar_orthogonal_batch(spec.d, spec.n, gen)
        u = np.concatenate(list(blocks), axis=1)  # d x (n d)
        big_theta = (spec.lam / np.sqrt(spec.n)) * (u.T @ u)
        y = big_theta + symmetric_gaussian(spec.n * spec.d, gen, diag_var=2.0)
        return Instance(spec, y, {"blocks": blocks}, big_theta)

    if isinstance(spec, MultiLayerSBM):
        sigma = gen.integers(0, spec.q, size=spec.n)
        keep_prob = (1 + (spec.q - 1) * spec.rho) / spec.q
        obs, thetas, layer_sigmas = [], [], []
        for ell in range(spec.L):
            kept = gen.random(spec.n) < keep_prob
            shift = gen.integers(1, spec.q, size=spec.n)  # uniform over other labels
            sig_l = np.where(kept, sigma, (sigma + shift) % spec.q)
            y, th = _sample_sbm_layer(spec.layer(ell), sig_l, gen)
            obs.append(y)
            thetas.append(th)
            layer_sigmas.append(sig_l)
        dense = spec.n <= DENSE_GRAPH_LIMIT
        observation = np.stack(obs) if dense else obs
        return Instance(
            spec,
            observation,
            {"sigma": sigma, "sigma_layers": np.stack(layer_sigmas)},
            np.stack(thetas),
        )

    raise InvalidSpec(f"unknown model spec {spec!r}")


def _sample_sbm_layer(spec: SBM, sigma: np.ndarray,
                      gen: np.random.Generator):
    same = sigma[:, None] == sigma[None, :]
    big_theta = np.where(same, (spec.q - 1.0), -1.0) * (spec.lam * spec.d / spec.n)
    np.fill_diagonal(big_theta, 0.0)
    if spec.n <= DENSE_GRAPH_LIMIT:
        p = spec.d / spec.n + big_theta
        y = _dense_pair_bernoulli(p, gen)
    else:
        y = _sparse_pair_bernoulli(
            spec.n, spec.p_in,
            lambda i, j: np.where(sigma[i] == sigma[j], 1.0,
                                  spec.p_out / spec.p_in),
            gen,
        )
    return y, big_theta


def sample_null(spec: ModelSpec,
                rng: RandomStream | np.random.Generator) -> Instance:
    """Draw one instance from the paired null law of `spec` (empty latent)."""
    gen = as_generator(rng)
    if isinstance(spec, PlantedSubmatrix):
        return Instance(spec, symmetric_gaussian(spec.n, gen, diag_var=2.0))
    if isinstance(spec, PlantedDenseSubgraph):
        return Instance(spec, _null_graph(spec.n, spec.p0, gen))
    if isinstance(spec, SBM):
        return Instance(spec, _null_graph(spec.n, spec.d / spec.n, gen))
    if isinstance(spec, AngularSync):
        obs = np.stack([hermitian_gaussian(spec.n, gen) for _ in range(spec.L)])
        return Instance(spec, obs)
    if isinstance(spec, OrthSync):
        return Instance(spec, symmetric_gaussian(spec.n * spec.d, gen, diag_var=2.0))
    if isinstance(spec, MultiLayerSBM):
        layers = [_null_graph(spec.n, d / spec.n, gen) for d in spec.d_layers]
        dense = spec.n <= DENSE_GRAPH_LIMIT
        return Instance(spec, np.stack(layers) if dense else layers)
    raise InvalidSpec(f"unknown model spec {spec!r}")


def _null_graph(n: int, p: float, gen: np.random.Generator):
    if not 0 <= p <= 1:
        raise InvalidSpec(f"edge probability {p} outside [0,1]")
    if n <= DENSE_GRAPH_LIMIT:
        return _dense_pair_bernoulli(np.full((n, n), p), gen)
    return _sparse_pair_bernoulli(n, p, lambda i, j: 1.0, gen)


# ---------------------------------------------------------------------------
# JSON serialization (documented interchange schema)
# ---------------------------------------------------------------------------
#
# Instance JSON schema ("plantedlab.instance.v1"):
# {
#   "schema": "plantedlab.instance.v1",
#   "model": {"kind": <str>, ...parameters...},
#   "observation": <array block> | {"format": "edge_list", "n": int,
#                                    "edges": [[i, j], ...]}
#                 | {"format": "layers", "items": [<block>, ...]},
#   "latent":  {name: <array block>, ...}          (optional)
#   "theta":   <array block>                       (optional)
# }
# where an <array block> is {"format": "dense", "dtype": "float"|"int"|"complex",
# "shape": [...], "data": [... row-major ...]} and complex data is stored as
# [re, im] pairs.


def _array_to_block(a: np.ndarray) -> dict:
    a = np.asarray(a)
    if np.iscomplexobj(a):
        flat = [[float(z.real), float(z.imag)] for z in a.ravel()]
        dtype = "complex"
    elif np.issubdtype(a.dtype, np.integer):
        flat = [int(v) for v in a.ravel()]
        dtype = "int"
    else:
        flat = [float(v) for v in a.ravel()]
        dtype = "float"
    return {"format": "dense", "dtype": dtype, "shape": list(a.shape), "data": flat}


def _block_to_array(block: dict) -> np.ndarray:
    shape = tuple(block["shape"])
    if block["dtype"] == "complex":
        data = np.array([complex(re, im) for re, im in block["data"]])
    elif block["dtype"] == "int":
        data = np.array(block["data"], dtype=np.int64)
    else:
        data = np.array(block["data"], dtype=np.float64)
    return data.reshape(shape)


def _obs_to_json(obs) -> dict:
    if isinstance(obs, EdgeListGraph):
        return {"format": "edge_list", "n": obs.n,
                "edges": [[int(i), int(j)] for i, j in obs.edges]}
    if isinstance(obs, list):
        return {"format": "layers", "items": [_obs_to_json(o) for o in obs]}
    return _array_to_block(np.asarray(obs))


def _obs_from_json(block: dict):
    if block["format"] == "edge_list":
        edges = np.array(block["edges"], dtype=np.int64).reshape(-1, 2)
        return EdgeListGraph(n=block["n"], edges=edges)
    if block["format"] == "layers":
        return [_obs_from_json(b) for b in block["items"]]
    return _block_to_array(block)


def spec_to_json(spec: ModelSpec) -> dict:
    out = {"kind": spec.kind}
    for f in fields(spec):
        v = getattr(spec, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def spec_from_json(d: dict) -> ModelSpec:
    d = dict(d)
    kind = d.pop("kind")
    cls = _SPEC_KINDS.get(kind)
    if cls is None:
        raise InvalidSpec(f"unknown model kind {kind!r}")
    if cls is MultiLayerSBM:
        d["d_layers"] = tuple(d["d_layers"])
        d["lam_layers"] = tuple(d["lam_layers"])
    return cls(**d)


def instance_to_json(inst: Instance, include_latent: bool = True) -> dict:
    doc = {
        "schema": "plantedlab.instance.v1",
        "model": spec_to_json(inst.spec),
        "observation": _obs_to_json(inst.observation),
    }
    if include_latent and inst.latent:
        doc["latent"] = {k: _array_to_block(np.asarray(v))
                         for k, v in inst.latent.items()}
    if inst.theta_matrix is not None:
        doc["theta"] = _array_to_block(inst.theta_matrix)
    return doc


def instance_from_json(doc: dict) -> Instance:
    if doc.get("schema") != "plantedlab.instance.v1":
        raise ShapeMismatch("not a plantedlab.instance.v1 document")
    latent = {k: _block_to_array(b) for k, b in doc.get("latent", {}).items()}
    theta = _block_to_array(doc["theta"]) if "theta" in doc else None
    return Instance(
        spec=spec_from_json(doc["model"]),
        observation=_obs_from_json(doc["observation"]),
        latent=latent,
        theta_matrix=theta,
    )


def instance_to_json_str(inst: Instance, **kw) -> str:
    return json.dumps(instance_to_json(inst, **kw), sort_keys=True)
