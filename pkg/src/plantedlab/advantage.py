"""Low-degree advantage bounds: exact sums, Monte-Carlo estimates, and
Gaussian surrogates for the six planted models.

All quantities here are squared advantages (or upper bounds on them).  The
degree-D truncated exponential exp_trunc is the common kernel:

    exp_trunc(x, D) = sum_{k=0}^{D} x^k / k!

Methods by model:

* planted submatrix: binomial overlap sum
  sum_k P(Bin(n, rho^2) = k) * exp_trunc(lam^2 k^2, D), an upper bound.
* planted dense subgraph: exact sum over labeled edge subsets S of K_n of
  lam^(2|E(S)|) rho^(2|V(S)|).
* SBM: exact sum over edge subsets H of coef^|E(H)| * E[prod omega]^2 with
  coef = lam^2 d / (n (1 - d/n)) and omega(s, t) = q 1{s=t} - 1.
* angular / orthogonal synchronization: Monte-Carlo averages of products of
  truncated exponentials of normalized coordinate sums, plus the Gaussian
  surrogate obtained by replacing those sums with their limiting normals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .errors import InvalidSpec, TooLarge
from .graphs import LabeledGraph, connected_components, degrees, enumerate_edge_subsets
from .rng import RandomStream, blocked_mc

# method tags
OVERLAP_EXACT = "OverlapExact"
GRAPH_SUM = "GraphSum"
SBM_EXACT = "SBMExact"
MONTE_CARLO = "MonteCarlo"
GAUSSIAN_SURROGATE = "GaussianSurrogate"
CLOSED_FORM_BOUND = "ClosedFormBound"

# meaning tags
UPPER_BOUND = "UpperBoundOnAdvSq"
EXACT = "ExactAdvSq"
MC_ESTIMATE = "MCEstimateOfBound"

MC_BLOCK = 2048


@dataclass(frozen=True)
class AdvantageReport:
    """A computed squared-advantage value (or bound / MC estimate of one)."""

    degree: int
    value: float
    stderr: float
    method: str
    meaning: str
    extras: dict = field(default_factory=dict)


def exp_trunc(x: float, D: int) -> float:
    """Degree-D Taylor partial sum of e^x, with compensated summation."""
    if D < 0:
        raise InvalidSpec("D must be nonnegative")
    terms = []
    t = 1.0
    for k in range(D + 1):
        terms.append(t)
        if k < D:
            t *= x / (k + 1)
            if math.isinf(t):
                return math.inf
    return math.fsum(terms)


def _exp_trunc_array(x: np.ndarray, D: int) -> np.ndarray:
    """Vectorized exp_trunc for nonnegative arrays."""
    out = np.ones_like(x)
    t = np.ones_like(x)
    for k in range(1, D + 1):
        t = t * x / k
        out = out + t
    return out


def log_exp_trunc(logx: float, D: int) -> float:
    """log(exp_trunc(x, D)) given log x, stable for huge x."""
    if D == 0:
        return 0.0
    ks = np.arange(D + 1)
    return float(logsumexp(ks * logx - [math.lgamma(k + 1) for k in ks]))


# ---------------------------------------------------------------------------
# Planted submatrix: binomial overlap sum
# ---------------------------------------------------------------------------

def adv2_submatrix_overlap(n: int, lam: float, rho: float, D: int) -> AdvantageReport:
    """Upper bound on the squared advantage for the planted submatrix model.

    The overlap of two independent support vectors is Bin(n, rho^2); the
    bound is E[exp_trunc(lam^2 <theta, theta'>^2, D)].  Everything is done
    in log space so n can be large; if the value exceeds the float range the
    report carries +inf.
    """
    if not 0 <= rho <= 1:
        raise InvalidSpec("rho must lie in [0,1]")
    if lam < 0:
        raise InvalidSpec("lam must be nonnegative")
    ks = np.arange(n + 1)
    logpmf = binom.logpmf(ks, n, rho * rho)
    finite = logpmf > -np.inf
    logterms = []
    for k in ks[finite]:
        arg = lam * lam * float(k) * float(k)
        logarg = -math.inf if arg == 0 else math.log(arg)
        logterms.append(logpmf[k] + log_exp_trunc(logarg, D))
    total = float(logsumexp(logterms))
    value = math.inf if total > 709.0 else float(math.exp(total))
    return AdvantageReport(D, value, 0.0, OVERLAP_EXACT, UPPER_BOUND,
                           {"n": n, "lam": lam, "rho": rho})


# ---------------------------------------------------------------------------
# Planted dense subgraph: exact labeled-subgraph sum
# ---------------------------------------------------------------------------

def adv2_graph_sum_binary(n: int, lam: float, rho: float, D: int) -> AdvantageReport:
    """Exact squared advantage for the binary rank-one model.

    Parseval over the standardized-edge-monomial basis gives
    sum over labeled S in K_n with |E(S)| <= D of lam^(2|E|) rho^(2|V|);
    lam is the effective SNR (p1 - p0) / sqrt(p0 (1 - p0)).
    """
    if not (n <= 12 or D <= 3):
        raise TooLarge("guard: need n <= 12 or D <= 3")
    terms = []
    for g in enumerate_edge_subsets(n, D):
        e = g.num_edges
        v = len(g.vertices)
        terms.append((lam ** (2 * e)) * (rho ** (2 * v)))
    return AdvantageReport(D, math.fsum(terms), 0.0, GRAPH_SUM, EXACT,
                           {"n": n, "lam": lam, "rho": rho})


# ---------------------------------------------------------------------------
# SBM: omega-product expectations and the exact basis sum
# ---------------------------------------------------------------------------

def omega_scalar(s: int, t: int, q: int) -> int:
    """omega(s, t) = q 1{s = t} - 1."""
    return q - 1 if s == t else -1


def _omega_sum_component(comp: LabeledGraph, q: int) -> Fraction:
    """Exact E[prod omega] over one connected component, by brute force."""
    verts = comp.vertices
    v = len(verts)
    if q ** v > 10 ** 8:
        raise TooLarge(f"q^{v} labelings exceed the brute-force guard")
    index = {u: i for i, u in enumerate(verts)}
    edges = [(index[i], index[j]) for i, j in comp.edges]
    use_int64 = comp.num_edges * math.log2(max(q - 1, 2)) <= 62
    if use_int64 and q ** v > 200_000:
        labelings = np.stack(
            np.meshgrid(*([np.arange(q)] * v), indexing="ij"), axis=-1
        ).reshape(-1, v)
        prod = np.ones(len(labelings), dtype=np.int64)
        for i, j in edges:
            prod *= np.where(labelings[:, i] == labelings[:, j], q - 1, -1)
        total = int(prod.sum())
    else:
        total = 0
        for labeling in np.ndindex(*([q] * v)):
            p = 1
            for i, j in edges:
                p *= q - 1 if labeling[i] == labeling[j] else -1
            total += p
    return Fraction(total, q ** v)


def omega_expectation(h: LabeledGraph, q: int) -> float:
    """Exact E[prod over edges of omega(sigma_i, sigma_j)] for uniform labels.

    Zero whenever H has a leaf (the degree-1 vertex integrates to zero).
    Otherwise the expectation factorizes over connected components, each
    evaluated by exact integer brute force over its q^(#vertices) labelings.
    """
    if q < 2:
        raise InvalidSpec("q must be at least 2")
    if len(h.vertices) > 14:
        raise TooLarge("omega_expectation supports at most 14 vertices")
    if not h.edges:
        return 1.0
    if any(d == 1 for d in degrees(h).values()):
        return 0.0
    result = Fraction(1)
    for comp in connected_components(h):
        result *= _omega_sum_component(comp, q)
    return float(result)


def adv2_sbm_exact(n: int, q: int, d: float, lam: float, D: int) -> AdvantageReport:
    """Exact squared advantage for the SBM at desk scale.

    Uses the exact pre-limit edge normalization lam^2 d / (n (1 - d/n)), so
    small-n oracle comparisons are exact rather than up to 1 + o(1).
    """
    if n > 8 or D > 5:
        raise TooLarge("guard: need n <= 8 and D <= 5")
    if d / n >= 1:
        raise InvalidSpec("d/n must be below 1")
    coef = lam * lam * d / (n * (1.0 - d / n))
    terms = []
    for g in enumerate_edge_subsets(n, D):
        if g.edges and any(deg == 1 for deg in degrees(g).values()):
            continue
        w = omega_expectation(g, q)
        if w != 0.0:
            terms.append((coef ** g.num_edges) * w * w)
    return AdvantageReport(D, math.fsum(terms), 0.0, SBM_EXACT, EXACT,
                           {"n": n, "q": q, "d": d, "lam": lam})


def chain_expectation(a: float, b: float, l: int, q: int,
                      sigma0: int, sigmal: int) -> float:
    """E[prod_{i=1..l} (a + b omega(s_{i-1}, s_i))] given the endpoints.

    Interior labels are i.i.d. uniform on [q]; the closed form is
    a^l + b^l omega(sigma0, sigmal).
    """
    if l < 1:
        raise InvalidSpec("l must be at least 1")
    if not (0 <= sigma0 < q and 0 <= sigmal < q):
        raise InvalidSpec("endpoint labels must lie in range(q)")
    return a ** l + (b ** l) * omega_scalar(sigma0, sigmal, q)


# ---------------------------------------------------------------------------
# Synchronization models: MC bounds and Gaussian surrogates
# ---------------------------------------------------------------------------

def _angular_trial_values(gen: np.random.Generator, size: int, n: int, L: int,
                          lam: float, D: int) -> np.ndarray:
    theta = gen.random((size, n)) * 2.0 * np.pi
    vals = np.ones(size)
    for ell in range(1, L + 1):
        u = np.sin(ell * theta).sum(axis=1) / np.sqrt(n)
        v = np.cos(ell * theta).sum(axis=1) / np.sqrt(n)
        vals = vals * _exp_trunc_array(lam * lam * u * u, D)
        vals = vals * _exp_trunc_array(lam * lam * v * v, D)
    return vals


def _mc_report(values_by_block, D, extras) -> AdvantageReport:
    vals = np.concatenate(values_by_block)
    t = len(vals)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(t)) if t > 1 else 0.0
    return AdvantageReport(D, mean, stderr, MONTE_CARLO, MC_ESTIMATE, extras)


def adv2_angular_mc(n: int, L: int, lam: float, D: int, trials: int,
                    rng: RandomStream) -> AdvantageReport:
    """Monte-Carlo estimate of the phase-sum advantage bound.

    Averages prod_l exp_trunc(lam^2 U_l^2, D) exp_trunc(lam^2 V_l^2, D)
    over uniform phase draws, with U_l, V_l the normalized sums of
    sin(l theta_t) and cos(l theta_t).  Unbiased for the bound.
    """
    if trials < 100:
        raise InvalidSpec("need at least 100 trials")
    blocks = [
        _angular_trial_values(gen, size, n, L, lam, D)
        for _, size, gen in blocked_mc(trials, MC_BLOCK, rng)
    ]
    return _mc_report(blocks, D, {"n": n, "L": L, "lam": lam, "trials": trials})


def gaussian_surrogate_factor(lam: float, D: int, variance: float) -> float:
    """E[exp_trunc(lam^2 Z^2, D)] for Z ~ N(0, variance), exactly.

    Term k is lam^(2k) (2k-1)!! variance^k / k!.
    """
    terms = []
    t = 1.0
    for k in range(D + 1):
        terms.append(t)
        t *= lam * lam * variance * (2 * k + 1) / (k + 1)
        if math.isinf(t):
            return math.inf
    return math.fsum(terms)


def adv2_angular_surrogate(L: int, lam: float, D: int) -> AdvantageReport:
    """Gaussian surrogate for the angular bound: the 2L normalized trig sums
    replaced by independent N(0, 1/2) variables.

    Converges to (1 - lam^2)^(-L) as D grows when lam < 1; reports +inf when
    the partial sums overflow (lam >= 1 and D large).
    """
    factor = gaussian_surrogate_factor(lam, D, 0.5)
    try:
        value = factor ** (2 * L)
    except OverflowError:
        value = math.inf
    return AdvantageReport(D, value, 0.0, GAUSSIAN_SURROGATE, UPPER_BOUND,
                           {"L": L, "lam": lam})


def _orth_trial_values(gen: np.random.Generator, size: int, n: int, d: int,
                       lam: float, D: int) -> np.ndarray:
    from .models import haar_orthogonal_batch

    blocks = haar_orthogonal_batch(d, size * n, gen).reshape(size, n, d, d)
    u = blocks.sum(axis=1) / np.sqrt(n)           # (size, d, d)
    factors = _exp_trunc_array(lam * lam * u * u, D)
    return factors.reshape(size, -1).prod(axis=1)


def adv2_orth_mc(n: int, d: int, lam: float, D: int, trials: int,
                 rng: RandomStream) -> AdvantageReport:
    """Monte-Carlo estimate of the orthogonal-synchronization advantage bound.

    Averages prod over (l, m) of exp_trunc(lam^2 U(l,m)^2, D) with U(l,m)
    the normalized sum of Haar-orthogonal matrix entries.
    """
    if trials < 100:
        raise InvalidSpec("need at least 100 trials")
    if d > 12:
        raise TooLarge("desk-scale guard: d <= 12")
    blocks = [
        _orth_trial_values(gen, size, n, d, lam, D)
        for _, size, gen in blocked_mc(trials, MC_BLOCK, rng)
    ]
    return _mc_report(blocks, D, {"n": n, "d": d, "lam": lam, "trials": trials})


def adv2_orth_surrogate(d: int, lam: float, D: int) -> AdvantageReport:
    """Gaussian surrogate for the orthogonal bound: d^2 sums replaced by
    independent N(0, 1/d) variables."""
    factor = gaussian_surrogate_factor(lam, D, 1.0 / d)
    try:
        value = factor ** (d * d)
    except OverflowError:
        value = math.inf
    return AdvantageReport(D, value, 0.0, GAUSSIAN_SURROGATE, UPPER_BOUND,
                           {"d": d, "lam": lam})


# ---------------------------------------------------------------------------
# Lindeberg interpolation check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InterpolationGap:
    """Estimates of the hybrid-moment functionals F_t and F_{t+1}."""

    t: int
    f_t: float
    f_t_stderr: float
    f_t1: float
    f_t1_stderr: float
    rel_gap: float
    rel_gap_stderr: float


def moment_interpolation_gap(n: int, L: int, lam: float, D: int, t: int,
                             trials: int, rng: RandomStream) -> InterpolationGap:
    """Estimate (F_t, F_{t+1}) for the phase model's Lindeberg interpolation.

    F_t replaces the first t phase coordinates of each normalized trig sum
    with independent N(0, 1/2) draws.  Both functionals are estimated from
    common random numbers: a trial shares all coordinates except position
    t+1, which is a phase for F_t and a Gaussian for F_{t+1}.  The relative
    gap stderr comes from the per-trial differences (delta method).
    """
    if not 0 <= t < n:
        raise InvalidSpec("need 0 <= t < n")
    if trials < 100:
        raise InvalidSpec("need at least 100 trials")
    vt_blocks, vt1_blocks = [], []
    for _, size, gen in blocked_mc(trials, MC_BLOCK, rng):
        theta = gen.random((size, n - t)) * 2.0 * np.pi  # positions t+1..n
        zeta = gen.standard_normal((size, L, t + 1)) * np.sqrt(0.5)
        eta = gen.standard_normal((size, L, t + 1)) * np.sqrt(0.5)
        vt = np.ones(size)
        vt1 = np.ones(size)
        for ell in range(1, L + 1):
            s_shared_u = zeta[:, ell - 1, :t].sum(axis=1) + np.sin(ell * theta[:, 1:]).sum(axis=1)
            s_shared_v = eta[:, ell - 1, :t].sum(axis=1) + np.cos(ell * theta[:, 1:]).sum(axis=1)
            u_t = (s_shared_u + np.sin(ell * theta[:, 0])) / np.sqrt(n)
            v_t = (s_shared_v + np.cos(ell * theta[:, 0])) / np.sqrt(n)
            u_t1 = (s_shared_u + zeta[:, ell - 1, t]) / np.sqrt(n)
            v_t1 = (s_shared_v + eta[:, ell - 1, t]) / np.sqrt(n)
            vt = vt * _exp_trunc_array(lam * lam * u_t * u_t, D)
            vt = vt * _exp_trunc_array(lam * lam * v_t * v_t, D)
            vt1 = vt1 * _exp_trunc_array(lam * lam * u_t1 * u_t1, D)
            vt1 = vt1 * _exp_trunc_array(lam * lam * v_t1 * v_t1, D)
        vt_blocks.append(vt)
        vt1_blocks.append(vt1)
    vt = np.concatenate(vt_blocks)
    vt1 = np.concatenate(vt1_blocks)
    m_t, m_t1 = float(vt.mean()), float(vt1.mean())
    se_t = float(vt.std(ddof=1) / np.sqrt(len(vt)))
    se_t1 = float(vt1.std(ddof=1) / np.sqrt(len(vt1)))
    ratio = m_t1 / m_t
    resid = vt1 - ratio * vt
    se_gap = float(resid.std(ddof=1) / (np.sqrt(len(vt)) * abs(m_t)))
    return InterpolationGap(
        t=t, f_t=m_t, f_t_stderr=se_t, f_t1=m_t1, f_t1_stderr=se_t1,
        rel_gap=ratio - 1.0, rel_gap_stderr=se_gap,
    )
