"""One-sided detection experiments built on the split-estimate-validate
reduction, plus baseline estimators, the hidden-sample amplification, and the
finite-scale contiguity verdict.

Pipeline per trial: split the observation into (A, B), run the estimator on
A, form the validation statistic on B, and compare against a threshold.

Statistic conventions.  Observations are vectors of unordered-pair
coordinates.  For a symmetric Gaussian observation (off-diagonal variance 1,
diagonal variance 2) the statistic of an estimator matrix X is

    S = sum_{i<j} X_ij (B - center)_ij + 1/2 sum_i X_ii (B - center)_ii,

whose null standard deviation is exactly
sqrt(sum_{i<j} X_ij^2 + 1/2 sum_i X_ii^2), so S standardizes to N(0,1).
For a 0/1 observation, S = sum_{i<j} X_ij (B_ij - rate).  Threshold rules
are expressed per unit of the full Frobenius norm of X.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg
from scipy.stats import beta as beta_dist

from .errors import EigenFailure, InvalidSpec, ZeroEstimator
from .models import (
    AngularSync, Instance, ModelSpec, MultiLayerSBM, OrthSync,
    PlantedDenseSubgraph, PlantedSubmatrix, SBM, sample_null, sample_planted,
)
from .rng import RandomStream
from .splitting import (
    BernoulliSplitParams, GaussianSplitParams, bernoulli_split, gaussian_split,
)

DEFAULT_C = 0.3


# ---------------------------------------------------------------------------
# Confidence intervals
# ---------------------------------------------------------------------------

def wilson_interval(k: int, n: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion (default 95%)."""
    if n == 0:
        return (0.0, 1.0)
    ph = k / n
    denom = 1.0 + z * z / n
    center = (ph + z * z / (2 * n)) / denom
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def one_sided_upper(k: int, n: int, conf: float = 0.95) -> float:
    """Exact (Clopper-Pearson) one-sided upper confidence bound on a rate."""
    if n == 0 or k >= n:
        return 1.0
    return float(beta_dist.ppf(conf, k + 1, n - k))


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def spectral_estimator(A: np.ndarray) -> np.ndarray:
    """Rank-one projector v1 v1^T onto the top eigenvector of A.

    Frobenius norm 1 by construction.  Ties in a degenerate spectrum are
    broken by the LAPACK solver's ordering.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    try:
        _, v = scipy.linalg.eigh(A, subset_by_index=[n - 1, n - 1])
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise EigenFailure(str(exc)) from exc
    v1 = v[:, 0]
    v1 = v1 / np.linalg.norm(v1)
    return np.outer(v1, v1)


def degree_estimator(A: np.ndarray, rho: float) -> np.ndarray:
    """0/1 block indicator on the ceil(rho n) highest-degree vertices."""
    A = np.asarray(A)
    n = A.shape[0]
    k = max(1, math.ceil(rho * n))
    deg = A.sum(axis=0)
    order = np.argsort(-deg, kind="stable")  # stable: deterministic ties
    ind = np.zeros(n)
    ind[order[:k]] = 1.0
    return np.outer(ind, ind)


def oracle_estimator(A: np.ndarray, instance: Instance) -> np.ndarray:
    """Pass-through estimator: theta theta^T from the latent signal.

    Falls back to the constant all-ones direction on null draws (which have
    no latent), keeping the statistic well defined on the Q side.
    """
    n = A.shape[0]
    theta = instance.latent.get("theta")
    if theta is None:
        return np.ones((n, n)) / n
    return np.outer(theta, theta)


oracle_estimator.wants_instance = True


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

def one_sided_statistic(X: np.ndarray, B: np.ndarray,
                        center: Optional[np.ndarray] = None) -> float:
    """<X, B - center> / ||X||_F with full matrix inner products."""
    X = np.asarray(X, dtype=float)
    norm = float(np.linalg.norm(X))
    if norm == 0.0:
        raise ZeroEstimator("estimator matrix is zero")
    diff = np.asarray(B, dtype=float)
    if center is not None:
        diff = diff - center
    return float(np.vdot(X, diff)) / norm


def pair_statistic_gaussian(X: np.ndarray, B: np.ndarray,
                            center: float | np.ndarray = 0.0,
                            diag_var: float = 2.0):
    """Pair-coordinate statistic of a symmetric Gaussian observation.

    Returns (value, null_std); value / null_std is exactly N(0,1) under the
    null with the given diagonal variance.
    """
    X = np.asarray(X, dtype=float)
    xr = X.ravel()
    sumsq = float(np.dot(xr, xr))
    if sumsq == 0.0:
        raise ZeroEstimator("estimator matrix is zero")
    B = np.asarray(B, dtype=float)
    value = float(np.dot(xr, B.ravel()))
    if np.ndim(center) == 0:
        if center != 0.0:
            value -= float(center) * float(X.sum())
    else:
        value -= float(np.vdot(X, center))
    value *= 0.5  # = sum_{i<j} + 1/2 diag, for symmetric X, B
    dsq = float(np.dot(np.diag(X), np.diag(X)))
    offsq = 0.5 * (sumsq - dsq)
    std = math.sqrt(offsq + 0.25 * diag_var * dsq)
    return value, std


def pair_statistic_binary(X: np.ndarray, B: np.ndarray, rate: float):
    """Pair-coordinate statistic sum_{i<j} X_ij (B_ij - rate) and the pair norm."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    iu = np.triu_indices(n, k=1)
    xp = X[iu]
    norm = float(np.linalg.norm(xp))
    if norm == 0.0:
        raise ZeroEstimator("estimator matrix is zero on off-diagonal pairs")
    value = float(np.dot(xp, np.asarray(B, dtype=float)[iu] - rate))
    return value, norm


# ---------------------------------------------------------------------------
# One-sided experiment
# ---------------------------------------------------------------------------

@dataclass
class TestReport:
    threshold: float          # per unit ||X||_F
    trials_P: int
    trials_Q: int
    typeI_accuracy: float
    typeI_ci: tuple[float, float]
    typeII_error: float
    typeII_upper: float
    seed: int
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema": "plantedlab.test_report.v1",
            "model": self.extras.get("model"),
            "params": self.extras.get("params"),
            "split": self.extras.get("split"),
            "estimator": self.extras.get("estimator"),
            "threshold": self.threshold,
            "trials": {"P": self.trials_P, "Q": self.trials_Q},
            "typeI": self.typeI_accuracy,
            "typeI_ci": list(self.typeI_ci),
            "typeII": self.typeII_error,
            "typeII_ci": [0.0, self.typeII_upper],
            "seed": self.seed,
            "extras": {k: v for k, v in self.extras.items()
                       if k not in ("model", "params", "split", "estimator")},
        }


def _boosted_gaussian(spec, kappa: float):
    s = math.sqrt(1.0 + kappa * kappa)
    if isinstance(spec, PlantedSubmatrix):
        return PlantedSubmatrix(n=spec.n, lam=s * spec.lam, rho=spec.rho)
    if isinstance(spec, OrthSync):
        return OrthSync(n=spec.n, d=spec.d, lam=s * spec.lam)
    raise InvalidSpec(f"no gaussian split pipeline for {spec.kind}")


def _boosted_binary(spec, a: float):
    k = 1.0 / a
    if isinstance(spec, PlantedDenseSubgraph):
        return PlantedDenseSubgraph(n=spec.n, rho=spec.rho,
                                    p0=k * spec.p0, p1=k * spec.p1)
    if isinstance(spec, SBM):
        return SBM(n=spec.n, q=spec.q, d=k * spec.d, lam=spec.lam)
    if isinstance(spec, MultiLayerSBM):
        return MultiLayerSBM(n=spec.n, q=spec.q, L=spec.L, rho=spec.rho,
                             d_layers=tuple(k * d for d in spec.d_layers),
                             lam_layers=spec.lam_layers)
    raise InvalidSpec(f"no bernoulli split pipeline for {spec.kind}")


def lemma_threshold_const(spec: ModelSpec, c: float, kappa: float) -> float:
    """The reduction lemmas' threshold per unit ||X||_F.

    Planted submatrix: (c/4) lam rho n kappa, using
    sqrt((1+kappa^2)/(1+kappa^-2)) = kappa.  Other models use the generic
    (c/8) scale with M the Frobenius size of the signal matrix.
    """
    if isinstance(spec, PlantedSubmatrix):
        return 0.25 * c * spec.lam * spec.rho * spec.n * kappa
    if isinstance(spec, OrthSync):
        m = spec.lam * math.sqrt(spec.d * spec.n)
        return 0.125 * c * m * kappa
    if isinstance(spec, PlantedDenseSubgraph):
        return 0.125 * c * (spec.p1 - spec.p0) * spec.rho * spec.n
    if isinstance(spec, SBM):
        return 0.125 * c * spec.lam * spec.d * math.sqrt(spec.q - 1)
    if isinstance(spec, MultiLayerSBM):
        return 0.125 * c * spec.lam_layers[0] * spec.d_layers[0] \
            * math.sqrt(spec.q - 1)
    raise InvalidSpec(f"no lemma threshold for {spec.kind}")


def _theta_correlation(X: np.ndarray, theta_matrix: np.ndarray) -> float:
    t = np.asarray(theta_matrix, dtype=float)
    if t.ndim == 3:
        t = t[0]
    nx = float(np.linalg.norm(X))
    nt = float(np.linalg.norm(t))
    if nx == 0.0 or nt == 0.0:
        return 0.0
    return float(np.vdot(X, t)) / (nx * nt)


def _run_estimator(estimator, a_obs, instance):
    if getattr(estimator, "wants_instance", False):
        return estimator(a_obs, instance)
    return estimator(a_obs)


def _split_and_layers(spec, inst, split_params, gen):
    """Split the observation; return (A-observation, B-statistic inputs)."""
    if isinstance(split_params, GaussianSplitParams):
        pair = gaussian_split(inst.observation, split_params, gen)
        return pair.A, pair.B, None
    # binary: split each layer at its own boosted base rate
    if isinstance(spec, MultiLayerSBM):
        a_layers, b_layers = [], []
        for ell in range(spec.L):
            rate = spec.d_layers[ell] / spec.n
            params = BernoulliSplitParams(p=rate, a=split_params.a,
                                          b=split_params.b)
            obs = inst.observation[ell]
            pr = _split_binary_symmetric(obs, params, gen)
            a_layers.append(pr[0])
            b_layers.append(pr[1])
        rate0 = spec.d_layers[0] / spec.n * split_params.b
        return np.stack(a_layers), b_layers[0], rate0
    if isinstance(spec, SBM):
        base = spec.d / spec.n
    else:
        base = spec.p0
    params = BernoulliSplitParams(p=base, a=split_params.a, b=split_params.b)
    a, b = _split_binary_symmetric(inst.observation, params, gen)
    return a, b, base * split_params.b


def _split_binary_symmetric(Y, params, gen):
    n = Y.shape[0]
    iu = np.triu_indices(n, k=1)
    pair = bernoulli_split(np.asarray(Y)[iu], params, gen)
    a = np.zeros((n, n), dtype=np.int8)
    b = np.zeros((n, n), dtype=np.int8)
    a[iu] = pair.A
    b[iu] = pair.B
    return a + a.T, b + b.T


def run_one_sided_experiment(spec: ModelSpec, estimator: Callable,
                             split_params, threshold_rule,
                             trials_p: int, trials_q: int, rng: RandomStream,
                             c: float = DEFAULT_C,
                             pilot_trials: int = 0) -> TestReport:
    """Monte-Carlo evaluation of the one-sided test built from an estimator.

    P trials draw from the boosted planted law (lam' = sqrt(1+kappa^2) lam
    for Gaussian splits; rates scaled by 1/a for Bernoulli splits), so the A
    half is distributed as the base model the estimator expects.  Q trials
    draw from the boosted null.

    threshold_rule: "lemma" for the reduction lemmas' rule, or a float
    threshold per unit ||X||_F.  With pilot_trials > 0, the correlation
    constant c is first estimated from that many calibration P trials
    (using the latent signal) and the estimate replaces c in the rule.

    Trials that raise ZeroEstimator count as non-detections (P side) or
    non-alarms (Q side); their fraction is reported in extras.
    """
    gaussian = isinstance(split_params, GaussianSplitParams)
    if gaussian:
        boosted = _boosted_gaussian(spec, split_params.kappa)
        kappa = split_params.kappa
    else:
        boosted = _boosted_binary(spec, split_params.a)
        kappa = 1.0 / split_params.a

    c_used = c
    if pilot_trials > 0:
        corrs = []
        for i in range(pilot_trials):
            gen = rng.generator(0, i)
            inst = sample_planted(boosted, gen)
            a_obs, _, _ = _split_and_layers(boosted, inst, split_params, gen)
            try:
                x = _run_estimator(estimator, a_obs, inst)
                corrs.append(_theta_correlation(x, inst.theta_matrix))
            except ZeroEstimator:
                corrs.append(0.0)
        c_used = min(1.0, max(0.01, float(np.mean(corrs))))

    if threshold_rule == "lemma":
        tconst = lemma_threshold_const(spec, c_used, kappa)
    else:
        tconst = float(threshold_rule)

    def run_side(planted: bool, phase: int, trials: int):
        hits = 0
        invalid = 0
        for i in range(trials):
            gen = rng.generator(phase, i)
            inst = sample_planted(boosted, gen) if planted \
                else sample_null(boosted, gen)
            a_obs, b_obs, rate = _split_and_layers(boosted, inst,
                                                   split_params, gen)
            try:
                x = _run_estimator(estimator, a_obs, inst)
                if gaussian:
                    value, _ = pair_statistic_gaussian(x, b_obs)
                else:
                    value, _ = pair_statistic_binary(x, b_obs, rate)
                if value >= tconst * float(np.linalg.norm(x)):
                    hits += 1
            except ZeroEstimator:
                invalid += 1
        return hits, invalid

    hits_p, invalid_p = run_side(True, 1, trials_p)
    hits_q, invalid_q = run_side(False, 2, trials_q)
    type1 = hits_p / trials_p if trials_p else float("nan")
    type2 = hits_q / trials_q if trials_q else float("nan")
    from .models import spec_to_json

    split_desc = ({"kind": "gaussian", "kappa": split_params.kappa}
                  if gaussian else
                  {"kind": "bernoulli", "a": split_params.a,
                   "b": split_params.b})
    return TestReport(
        threshold=tconst,
        trials_P=trials_p,
        trials_Q=trials_q,
        typeI_accuracy=type1,
        typeI_ci=wilson_interval(hits_p, trials_p),
        typeII_error=type2,
        typeII_upper=one_sided_upper(hits_q, trials_q),
        seed=rng.seed,
        extras={
            "model": spec.kind,
            "params": spec_to_json(spec),
            "split": split_desc,
            "estimator": getattr(estimator, "__name__", str(estimator)),
            "c_used": c_used,
            "invalid_fraction_P": invalid_p / trials_p if trials_p else 0.0,
            "invalid_fraction_Q": invalid_q / trials_q if trials_q else 0.0,
        },
    )


# ---------------------------------------------------------------------------
# Hidden informative sample
# ---------------------------------------------------------------------------

@dataclass
class HiddenSampleReport:
    M: int
    power: float
    power_ci: tuple[float, float]
    false_alarm: float
    false_alarm_ci: tuple[float, float]
    eps_hat: float
    eps_trials: int
    trials_h1: int
    trials_h0: int
    seed: int

    def to_json(self) -> dict:
        return {
            "schema": "plantedlab.hidden_report.v1",
            "M": self.M,
            "power": self.power,
            "power_ci": list(self.power_ci),
            "false_alarm": self.false_alarm,
            "false_alarm_ci": list(self.false_alarm_ci),
            "eps_hat": self.eps_hat,
            "eps_trials": self.eps_trials,
            "trials": {"H1": self.trials_h1, "H0": self.trials_h0},
            "seed": self.seed,
        }


def hidden_sample_experiment(spec: ModelSpec, M: int,
                             detector: Callable[[Instance], bool],
                             trials: int, rng: RandomStream,
                             trials_h0: Optional[int] = None,
                             eps_trials: int = 0) -> HiddenSampleReport:
    """OR-rule test on M samples with one planted sample hidden at a uniform
    index (H1) versus all-null draws (H0).

    The decision is the OR of the per-sample detector outputs, so the H0
    false alarm is at most M times the detector's single-sample rate; that
    single-sample rate is measured on eps_trials extra null draws and
    reported as eps_hat.
    """
    if M < 1:
        raise InvalidSpec("M must be at least 1")
    trials_h0 = trials if trials_h0 is None else trials_h0

    def h1_trial(gen):
        kappa_idx = int(gen.integers(0, M))
        for j in range(M):
            inst = sample_planted(spec, gen) if j == kappa_idx \
                else sample_null(spec, gen)
            if detector(inst):
                return True
        return False

    def h0_trial(gen):
        return any(detector(sample_null(spec, gen)) for _ in range(M))

    hits1 = sum(h1_trial(rng.generator(1, i)) for i in range(trials))
    hits0 = sum(h0_trial(rng.generator(2, i)) for i in range(trials_h0))
    eps_hits = sum(
        detector(sample_null(spec, rng.generator(3, i)))
        for i in range(eps_trials)
    )
    return HiddenSampleReport(
        M=M,
        power=hits1 / trials if trials else float("nan"),
        power_ci=wilson_interval(hits1, trials),
        false_alarm=hits0 / trials_h0 if trials_h0 else float("nan"),
        false_alarm_ci=wilson_interval(hits0, trials_h0),
        eps_hat=eps_hits / eps_trials if eps_trials else float("nan"),
        eps_trials=eps_trials,
        trials_h1=trials,
        trials_h0=trials_h0,
        seed=rng.seed,
    )


def statistic_detector(direction: np.ndarray, z_threshold: float,
                       kind: str = "gaussian", rate: float = 0.0):
    """Detector thresholding the standardized pair statistic of a fixed direction."""
    direction = np.asarray(direction, dtype=float)

    def detect(inst: Instance) -> bool:
        obs = inst.observation
        if kind == "gaussian":
            value, std = pair_statistic_gaussian(direction, obs)
        else:
            value, std = pair_statistic_binary(direction, obs, rate)
            std = std * math.sqrt(rate * (1.0 - rate))
        return value >= z_threshold * std

    detect.__name__ = f"statistic_detector_z{z_threshold:g}"
    return detect


# ---------------------------------------------------------------------------
# Contiguity verdict
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContiguityInputs:
    """Finite-scale inputs to the no-one-sided-test conditions.

    adv_sq is the squared-advantage bound Delta; runtime_exponent T,
    dimension N and degree D describe the test; heuristic_constant C is the
    free constant of the low-degree heuristic; type1_accuracy c is checked
    against the floor c_min; epsilon is the type-II error, checked via
    epsilon * Delta <= slack.
    """

    adv_sq: float
    runtime_exponent: float
    dimension: int
    degree: int
    heuristic_constant: float
    type1_accuracy: float
    epsilon: float
    type1_floor: float = 0.05
    slack: float = 0.01

    def __post_init__(self):
        if not self.adv_sq >= 1.0:
            raise InvalidSpec("adv_sq must be at least 1")
        for name in ("runtime_exponent", "dimension", "degree",
                     "heuristic_constant", "type1_floor", "slack"):
            if not getattr(self, name) > 0:
                raise InvalidSpec(f"{name} must be positive")
        if self.epsilon < 0 or self.type1_accuracy < 0:
            raise InvalidSpec("rates must be nonnegative")


@dataclass(frozen=True)
class ContiguityVerdict:
    cond_degree: bool
    cond_type1: bool
    cond_eps: bool
    ruled_out: bool
    margins: dict

    def to_json(self) -> dict:
        return {
            "schema": "plantedlab.verdict.v1",
            "cond_degree": self.cond_degree,
            "cond_type1": self.cond_type1,
            "cond_eps": self.cond_eps,
            "ruled_out": self.ruled_out,
            "margins": dict(self.margins),
        }


def contiguity_verdict(inputs: ContiguityInputs) -> ContiguityVerdict:
    """Check the three conditions under which the advantage bound rules out a
    (T; c; eps)-test: log Delta + (T+1) log N <= D / C, c >= c_min, and
    eps * Delta <= slack.

    Margins are the signed slack of each inequality (nonnegative iff it
    holds).  An infinite adv_sq marker fails the degree and (unless eps = 0)
    the epsilon condition; eps = 0 passes the epsilon condition for any
    Delta by convention.
    """
    log_delta = math.log(inputs.adv_sq) if math.isfinite(inputs.adv_sq) \
        else math.inf
    lhs = log_delta + (inputs.runtime_exponent + 1.0) * math.log(inputs.dimension)
    degree_margin = inputs.degree / inputs.heuristic_constant - lhs
    type1_margin = inputs.type1_accuracy - inputs.type1_floor
    eps_delta = 0.0 if inputs.epsilon == 0.0 else inputs.epsilon * inputs.adv_sq
    eps_margin = inputs.slack - eps_delta
    cond_degree = degree_margin >= 0.0
    cond_type1 = type1_margin >= 0.0
    cond_eps = eps_margin >= 0.0
    return ContiguityVerdict(
        cond_degree=cond_degree,
        cond_type1=cond_type1,
        cond_eps=cond_eps,
        ruled_out=cond_degree and cond_type1 and cond_eps,
        margins={"degree": degree_margin, "type1": type1_margin,
                 "eps": eps_margin},
    )
