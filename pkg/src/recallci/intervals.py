"""Two-tailed confidence intervals on recall.

Nine methods behind one dispatch surface:

======================  =====================================================
naive-binomial          recall as a binomial proportion over sampled relevant
                        documents
normal-mle              normal approximation, MLE variance, error propagation
normal-laplace          normal approximation after adding one to positive and
                        negative counts per stratum
normal-agresti          as above, adding two
koopman                 inverted chi-square test on the ratio of the two
                        segment proportions (single stratum per segment only)
beta-jeffreys           Monte Carlo quantiles from per-stratum beta posteriors
                        under Jeffreys priors
betabin-uniform         Monte Carlo quantiles from per-stratum beta-binomial
                        posteriors, uniform prior (alpha = beta = 1)
betabin-mcp             as above with the most conservative prior per stratum
betabin-half            as above with alpha = beta = 0.5
======================  =====================================================

All methods force the lower bound to 0 when the retrieved sample holds no
relevant documents, and the upper bound to 1 when the unretrieved sample
holds none, where those rules apply.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from .core import (
    RecallProblem,
    SegmentData,
    StratumCounts,
    UndefinedEstimateError,
    estimate_recall,
    recall_variance,
)
from .distributions import chi_square_1df_quantile, log_comb, normal_quantile
from .streams import RandomStream

__all__ = [
    "METHODS",
    "MONTE_CARLO_METHODS",
    "PriorSpec",
    "MonteCarloConfig",
    "RecallInterval",
    "naive_binomial",
    "normal_interval",
    "normal_interval_raw",
    "koopman_interval",
    "monte_carlo_interval",
    "most_conservative_prior",
    "expected_information_gain",
    "compute_interval",
    "nearest_rank_quantile",
]

METHODS = (
    "naive-binomial",
    "normal-mle",
    "normal-laplace",
    "normal-agresti",
    "koopman",
    "beta-jeffreys",
    "betabin-uniform",
    "betabin-mcp",
    "betabin-half",
)

MONTE_CARLO_METHODS = frozenset(
    {"beta-jeffreys", "betabin-uniform", "betabin-mcp", "betabin-half"}
)

BETA_JEFFREYS = "beta-jeffreys"
BETA_BINOMIAL = "beta-binomial"


@dataclass(frozen=True)
class PriorSpec:
    """Beta-binomial hyperparameters."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("prior hyperparameters must be positive")


PriorLike = Union[PriorSpec, Callable[[StratumCounts], PriorSpec], None]


@dataclass(frozen=True)
class MonteCarloConfig:
    """Draw count and random stream for posterior simulation."""

    rng: RandomStream
    draws: int = 40_000

    def __post_init__(self) -> None:
        if self.draws < 1000:
            raise ValueError("Monte Carlo interval estimation needs at least 1000 draws")


@dataclass(frozen=True)
class RecallInterval:
    """A two-tailed interval on recall with its point estimate, if defined."""

    lower: float
    upper: float
    level: float
    point: float | None
    method: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValueError("interval must satisfy 0 <= lower <= upper <= 1")
        if not 0.0 < self.level < 1.0:
            raise ValueError("confidence level must lie strictly inside (0, 1)")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def _z_value(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must lie strictly inside (0, 1)")
    return normal_quantile(1.0 - (1.0 - level) / 2.0)


def _point_or_none(problem: RecallProblem) -> float | None:
    try:
        return estimate_recall(problem)
    except ValueError:
        return None


def nearest_rank_quantile(sorted_values: np.ndarray, q: float) -> float:
    """q-quantile of a sorted sample under the nearest-rank convention."""
    d = len(sorted_values)
    rank = min(max(math.ceil(q * d), 1), d)
    return float(sorted_values[rank - 1])


def naive_binomial(problem: RecallProblem, level: float) -> RecallInterval:
    """Wald interval treating recall as a proportion of sampled positives.

    The denominator is the number of relevant documents in the combined
    sample; the center is the stratum-weighted recall estimate.  Assumes
    relevant documents were sampled at a single rate, which rarely holds.
    """
    z = _z_value(level)
    m = (
        problem.retrieved.total_relevant_sampled
        + problem.unretrieved.total_relevant_sampled
    )
    if m == 0:
        raise UndefinedEstimateError(
            "naive binomial interval needs at least one sampled relevant document"
        )
    point = estimate_recall(problem)
    half = z * math.sqrt(point * (1.0 - point) / m)
    return RecallInterval(
        max(0.0, point - half), min(1.0, point + half), level, point, "naive-binomial"
    )


_ADJUSTMENT_TAGS = {0: "normal-mle", 1: "normal-laplace", 2: "normal-agresti"}


def normal_interval_raw(
    problem: RecallProblem, level: float, adjustment: int = 0
) -> tuple[float, float]:
    """(midpoint, halfwidth) of the normal interval before clipping/forcing.

    With ``adjustment`` c > 0, c positives and c negatives are added to every
    stratum sample; midpoint, yield estimates, and propagated variance are all
    recomputed from the adjusted counts.
    """
    if adjustment not in _ADJUSTMENT_TAGS:
        raise ValueError("adjustment must be 0, 1, or 2")
    z = _z_value(level)
    if adjustment == 0:
        mid = estimate_recall(problem)
        sd = math.sqrt(recall_variance(problem, corrected=True))
        return mid, z * sd

    c = adjustment
    yields = []
    variances = []
    for segment in (problem.retrieved, problem.unretrieved):
        y = 0.0
        v = 0.0
        for s in segment.strata:
            n_adj = s.sample_size + 2 * c
            p_adj = (s.relevant_in_sample + c) / n_adj
            y += s.population_size * p_adj
            fpc = 1.0 - s.sample_size / s.population_size
            v += s.population_size**2 * (p_adj * (1.0 - p_adj) / n_adj) * fpc
        yields.append(y)
        variances.append(v)
    y1, y0 = yields
    v1, v0 = variances
    total = y1 + y0
    mid = y1 / total
    sd = math.sqrt((v1 * y0**2 + v0 * y1**2) / total**4)
    return mid, z * sd


def normal_interval(
    problem: RecallProblem, level: float, adjustment: int = 0
) -> RecallInterval:
    """Normal-approximation recall interval, optionally count-adjusted.

    adjustment 0 is the MLE method; 1 the Laplace adjustment; 2 the
    Agresti-Coull adjustment.  The interval is clipped to [0, 1]; the upper
    end is forced to 1 when the unretrieved sample has no relevant documents,
    and the lower end to 0 when the retrieved sample has none.
    """
    if adjustment not in _ADJUSTMENT_TAGS:
        raise ValueError("adjustment must be 0, 1, or 2")
    r1 = problem.retrieved.total_relevant_sampled
    r0 = problem.unretrieved.total_relevant_sampled
    tag = _ADJUSTMENT_TAGS[adjustment]
    point = _point_or_none(problem)
    if adjustment == 0 and r1 == 0 and r0 == 0:
        # Degenerate sample: no MLE exists; both forcing rules apply.
        return RecallInterval(0.0, 1.0, level, None, tag)
    mid, half = normal_interval_raw(problem, level, adjustment)
    lower = max(0.0, mid - half)
    upper = min(1.0, mid + half)
    if r1 == 0:
        lower = 0.0
    if r0 == 0:
        upper = 1.0
    return RecallInterval(lower, min(max(lower, upper), 1.0), level, point, tag)


# ---------------------------------------------------------------------------
# Koopman chi-square interval on the ratio of two binomial proportions.
# ---------------------------------------------------------------------------


def _constrained_rates(phi: float, x: int, m: int, y: int, n: int) -> tuple[float, float]:
    """ML rates under the constraint p_num = phi * p_den.

    (x, m) is the numerator-group sample, (y, n) the denominator group.
    The denominator-group rate solves
    phi (m + n) t^2 - [x + n + phi (m + y)] t + (x + y) = 0 (smaller root).
    """
    a = phi * (m + n)
    b = x + n + phi * (m + y)
    c = x + y
    disc = max(b * b - 4.0 * a * c, 0.0)
    t = (b - math.sqrt(disc)) / (2.0 * a)
    t = min(max(t, 0.0), 1.0)
    return min(phi * t, 1.0), t


def _koopman_statistic(phi: float, x: int, m: int, y: int, n: int) -> float:
    """Goodness-of-fit chi-square for the ratio hypothesis p_num/p_den = phi."""
    p_num, p_den = _constrained_rates(phi, x, m, y, n)

    def term(obs: int, size: int, rate: float) -> float:
        num = (obs - size * rate) ** 2
        if num == 0.0:
            return 0.0
        den = size * rate * (1.0 - rate)
        if den <= 0.0:
            return math.inf
        return num / den

    return term(x, m, p_num) + term(y, n, p_den)


_BISECT_TOL = 1e-8


def _bisect_cross(
    f: Callable[[float], float], crit: float, inside: float, outside: float
) -> float:
    """Boundary of {phi: f(phi) <= crit} between an inside and outside point."""
    lo, hi = inside, outside
    for _ in range(500):
        if abs(hi - lo) <= _BISECT_TOL * max(1.0, abs(hi), abs(lo)):
            break
        mid = 0.5 * (lo + hi)
        if f(mid) <= crit:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def koopman_interval(problem: RecallProblem, level: float) -> RecallInterval:
    """Chi-square test inversion on the unretrieved/retrieved prevalence ratio.

    Recall is a monotonically decreasing function of the ratio
    phi = pi_unretrieved / pi_retrieved, so a confidence set on phi maps to
    one on recall with the endpoints reversed.  The method has no extension
    to stratified sampling and rejects stratified problems.
    """
    if problem.is_stratified:
        raise ValueError(
            "the koopman interval does not extend to stratified sampling; "
            "each segment must be a single stratum"
        )
    ret = problem.retrieved.strata[0]
    unret = problem.unretrieved.strata[0]
    if ret.sample_size < 1 or unret.sample_size < 1:
        raise ValueError("koopman interval requires at least one draw per segment")

    x, m = unret.relevant_in_sample, unret.sample_size
    y, n = ret.relevant_in_sample, ret.sample_size
    scale = unret.population_size / ret.population_size
    crit = chi_square_1df_quantile(level)
    point = _point_or_none(problem)

    def rec_of(phi: float) -> float:
        if math.isinf(phi):
            return 0.0
        return 1.0 / (1.0 + scale * phi)

    def stat(phi: float) -> float:
        return _koopman_statistic(phi, x, m, y, n)

    if x == 0 and y == 0:
        return RecallInterval(0.0, 1.0, level, None, "koopman")

    # The statistic is zero at the unconstrained ratio MLE and grows on both
    # sides; the MLE is 0 when x = 0 and unbounded when y = 0, so those sides
    # start the bracket from an accepted finite point instead.
    phi_hat = 0.0 if x == 0 else (math.inf if y == 0 else (x / m) / (y / n))

    def accepted_point() -> float:
        point = max(phi_hat, 1.0) if math.isfinite(phi_hat) else 1.0
        while stat(point) > crit:
            point *= 2.0
            if point > 1e30:
                break
        return point

    # Upper phi bound (lower recall).  Unbounded when y = 0.
    if y == 0:
        rec_lower = 0.0
    else:
        inside = phi_hat
        hi = max(2.0 * phi_hat, 1.0)
        while stat(hi) <= crit:
            hi *= 2.0
            if hi > 1e30:
                break
        rec_lower = rec_of(_bisect_cross(stat, crit, inside, hi))

    # Lower phi bound (upper recall).  Zero when x = 0.
    if x == 0:
        rec_upper = 1.0
    else:
        inside = phi_hat if math.isfinite(phi_hat) else accepted_point()
        lo = inside / 2.0
        while lo > 0.0 and stat(lo) <= crit:
            lo /= 2.0
            if lo < 1e-300:
                lo = 0.0
                break
        rec_upper = rec_of(_bisect_cross(stat, crit, inside, lo))

    if y == 0:
        rec_lower = 0.0
    if x == 0:
        rec_upper = 1.0
    rec_lower = min(max(rec_lower, 0.0), 1.0)
    rec_upper = min(max(rec_upper, rec_lower), 1.0)
    return RecallInterval(rec_lower, rec_upper, level, point, "koopman")


# ---------------------------------------------------------------------------
# Monte Carlo posterior intervals.
# ---------------------------------------------------------------------------


def _resolve_prior(prior: PriorLike, stratum: StratumCounts) -> PriorSpec:
    if prior is None:
        raise ValueError("beta-binomial posteriors need a prior specification")
    if callable(prior):
        return prior(stratum)
    return prior


def segment_yield_draws(
    segment: SegmentData,
    family: str,
    prior: PriorLike,
    draws: int,
    rng: RandomStream,
    segment_index: int,
) -> np.ndarray:
    """Posterior draws of a segment's yield, summed over its strata.

    Each stratum contributes its observed relevant count plus a posterior
    draw of the relevant documents among its unsampled remainder: a beta
    prevalence draw scaled by the remainder under ``beta-jeffreys``, or a
    beta-binomial count draw under ``beta-binomial``.
    """
    if family not in (BETA_JEFFREYS, BETA_BINOMIAL):
        raise ValueError(f"unknown posterior family: {family!r}")
    total = np.zeros(draws)
    for s_idx, s in enumerate(segment.strata):
        gen = rng.substream(segment_index, s_idx).generator()
        remainder = s.population_size - s.sample_size
        r, n = s.relevant_in_sample, s.sample_size
        if family == BETA_JEFFREYS:
            pi = gen.beta(0.5 + r, 0.5 + n - r, size=draws)
            total += r + pi * remainder
        else:
            if remainder == 0:
                total += r
                continue
            spec = _resolve_prior(prior, s)
            q = gen.beta(spec.alpha + r, spec.beta + n - r, size=draws)
            total += r + gen.binomial(remainder, q)
    return total


def monte_carlo_interval(
    problem: RecallProblem,
    level: float,
    family: str,
    prior: PriorLike = None,
    config: MonteCarloConfig | None = None,
    method_tag: str | None = None,
) -> RecallInterval:
    """Recall interval from Monte Carlo quantiles of the posterior on recall.

    Per draw, every stratum independently contributes a posterior yield
    draw; segment yields are summed and a recall value computed.  The
    interval is the pair of equal-tail empirical quantiles (nearest rank on
    the sorted draws).  The lower bound is forced to 0 when no relevant
    documents were sampled from the retrieved segment, the upper to 1 when
    none were sampled from the unretrieved segment.
    """
    if config is None:
        raise ValueError("monte carlo interval estimation requires a MonteCarloConfig")
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must lie strictly inside (0, 1)")
    tag = method_tag or family
    r1 = problem.retrieved.total_relevant_sampled
    r0 = problem.unretrieved.total_relevant_sampled
    if r1 == 0 and r0 == 0:
        # Every recall draw would be 0/0; both forcing rules apply.
        return RecallInterval(0.0, 1.0, level, _point_or_none(problem), tag)

    y1 = segment_yield_draws(problem.retrieved, family, prior, config.draws, config.rng, 0)
    y0 = segment_yield_draws(problem.unretrieved, family, prior, config.draws, config.rng, 1)
    rec = y1 / (y1 + y0)
    rec.sort()
    alpha = 1.0 - level
    lower = nearest_rank_quantile(rec, alpha / 2.0)
    upper = nearest_rank_quantile(rec, 1.0 - alpha / 2.0)
    if r1 == 0:
        lower = 0.0
    if r0 == 0:
        upper = 1.0
    return RecallInterval(lower, max(lower, upper), level, _point_or_none(problem), tag)


# ---------------------------------------------------------------------------
# Most conservative beta-binomial prior.
# ---------------------------------------------------------------------------

_SEARCH_RANGE = (0.01, 2.0)
_POPULATION_CAP = 1000
_GAP_CAP = 200


def expected_information_gain(alpha: float, beta: float, population: int, sample: int) -> float:
    """Expected KL divergence from prior to posterior yield distribution.

    Averages, over the joint prior-predictive distribution of the true yield
    and the observed sample count, the log ratio of posterior to prior
    probability.  O(population * sample) to evaluate; concave and symmetric
    in (alpha, beta).
    """
    if not (alpha > 0 and beta > 0):
        raise ValueError("hyperparameters must be positive")
    if not 0 <= sample <= population:
        raise ValueError("sample must lie in [0, population]")
    n_pop, n_smp = population, sample
    xs = np.arange(n_smp + 1)
    js = np.arange(n_pop - n_smp + 1)
    r_of = xs[:, None] + js[None, :]

    g_alpha = gammaln(alpha + np.arange(n_pop + 1))
    g_beta = gammaln(beta + np.arange(n_pop + 1))
    lc_sample = log_comb(n_smp, xs)
    lc_rest = log_comb(n_pop - n_smp, js)
    lc_pop = log_comb(n_pop, np.arange(n_pop + 1))

    log_norm = (
        gammaln(alpha + beta)
        - gammaln(alpha)
        - gammaln(beta)
        - gammaln(alpha + beta + n_pop)
    )
    log_weight = (
        log_norm
        + lc_sample[:, None]
        + lc_rest[None, :]
        + g_alpha[r_of]
        + g_beta[n_pop - r_of]
    )
    log_ratio = (
        lc_rest[None, :]
        + gammaln(alpha)
        + gammaln(beta)
        + gammaln(alpha + beta + n_smp)
        - lc_pop[r_of]
        - g_alpha[xs][:, None]
        - g_beta[n_smp - xs][:, None]
        - gammaln(alpha + beta)
    )
    return float(np.sum(np.exp(log_weight) * log_ratio))


@lru_cache(maxsize=None)
def _solve_most_conservative(population: int, sample: int) -> float:
    result = minimize_scalar(
        lambda a: -expected_information_gain(a, a, population, sample),
        bounds=_SEARCH_RANGE,
        method="bounded",
        options={"xatol": 1e-4},
    )
    return float(result.x)


def most_conservative_prior(population: int, sample: int) -> PriorSpec:
    """Symmetric beta-binomial prior maximizing expected information gain.

    Large problems are capped before optimizing: the population at 1000 and
    the sample at 1000 - min(population - sample, 200), since the solution
    stabilizes beyond that and the objective costs O(population * sample).
    For a single-element sample the hyperparameters collapse toward zero; the
    search boundary is returned with a warning.
    """
    if not 1 <= sample <= population:
        raise ValueError("sample must lie in [1, population]")
    if sample == 1:
        warnings.warn(
            "most conservative prior degenerates for single-draw samples; "
            "returning the search-range boundary",
            RuntimeWarning,
            stacklevel=2,
        )
        return PriorSpec(_SEARCH_RANGE[0], _SEARCH_RANGE[0])
    if population > _POPULATION_CAP:
        sample = _POPULATION_CAP - min(population - sample, _GAP_CAP)
        population = _POPULATION_CAP
    value = _solve_most_conservative(population, sample)
    return PriorSpec(value, value)


def _mcp_prior(stratum: StratumCounts) -> PriorSpec:
    return most_conservative_prior(stratum.population_size, stratum.sample_size)


def compute_interval(
    method: str,
    problem: RecallProblem,
    level: float,
    config: MonteCarloConfig | None = None,
) -> RecallInterval:
    """Dispatch to any of the nine interval methods by tag."""
    if method == "naive-binomial":
        return naive_binomial(problem, level)
    if method == "normal-mle":
        return normal_interval(problem, level, 0)
    if method == "normal-laplace":
        return normal_interval(problem, level, 1)
    if method == "normal-agresti":
        return normal_interval(problem, level, 2)
    if method == "koopman":
        return koopman_interval(problem, level)
    if method == "beta-jeffreys":
        return monte_carlo_interval(
            problem, level, BETA_JEFFREYS, config=config, method_tag=method
        )
    if method == "betabin-uniform":
        return monte_carlo_interval(
            problem, level, BETA_BINOMIAL, PriorSpec(1.0, 1.0), config, method
        )
    if method == "betabin-half":
        return monte_carlo_interval(
            problem, level, BETA_BINOMIAL, PriorSpec(0.5, 0.5), config, method
        )
    if method == "betabin-mcp":
        return monte_carlo_interval(
            problem, level, BETA_BINOMIAL, _mcp_prior, config, method
        )
    raise ValueError(f"unknown interval method: {method!r}")
