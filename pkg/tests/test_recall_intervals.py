"""The nine recall interval methods."""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import betaln, gammaln

from recallci.core import RecallProblem, SegmentData, StratumCounts, UndefinedEstimateError
from recallci.distributions import BetaBinomialParams, beta_binomial_pmf, chi_square_1df_quantile
from recallci.intervals import (
    BETA_BINOMIAL,
    BETA_JEFFREYS,
    METHODS,
    MonteCarloConfig,
    PriorSpec,
    RecallInterval,
    _koopman_statistic,
    compute_interval,
    expected_information_gain,
    koopman_interval,
    monte_carlo_interval,
    most_conservative_prior,
    naive_binomial,
    normal_interval,
    normal_interval_raw,
)
from recallci.streams import RandomStream

AUDIT_PROBLEM = RecallProblem.simple(2000, 100, 50, 100000, 100, 3)


def mc_config(seed, draws=20_000):
    return MonteCarloConfig(rng=RandomStream(seed), draws=draws)


def random_problem(gen, max_pop=3000):
    n1 = int(gen.integers(2, max_pop))
    n0 = int(gen.integers(2, max_pop))
    s1 = int(gen.integers(1, n1 + 1))
    s0 = int(gen.integers(1, n0 + 1))
    r1 = int(gen.integers(0, s1 + 1))
    r0 = int(gen.integers(0, s0 + 1))
    return RecallProblem.simple(n1, s1, r1, n0, s0, r0)


class TestNaiveBinomial:
    def test_direct_formula(self):
        iv = naive_binomial(AUDIT_PROBLEM, 0.95)
        assert iv.point == pytest.approx(0.25)
        assert iv.lower == pytest.approx(0.1334, abs=5e-5)
        assert iv.upper == pytest.approx(0.3666, abs=5e-5)

    def test_degenerate_zero_point(self):
        prob = RecallProblem.simple(2000, 100, 0, 100000, 100, 3)
        iv = naive_binomial(prob, 0.95)
        assert (iv.lower, iv.upper) == (0.0, 0.0)

    def test_error_when_nothing_relevant(self):
        prob = RecallProblem.simple(2000, 100, 0, 100000, 100, 0)
        with pytest.raises(UndefinedEstimateError):
            naive_binomial(prob, 0.95)


class TestNormalIntervals:
    def test_mle_empty_unretrieved_is_degenerate_before_forcing(self):
        prob = RecallProblem.simple(2000, 100, 50, 100000, 100, 0)
        mid, half = normal_interval_raw(prob, 0.95, 0)
        assert (mid, half) == (1.0, 0.0)
        iv = normal_interval(prob, 0.95, 0)
        assert (iv.lower, iv.upper) == (1.0, 1.0)

    def test_forcing_rules(self):
        no_unret = RecallProblem.simple(2000, 100, 50, 100000, 100, 0)
        no_ret = RecallProblem.simple(2000, 100, 0, 100000, 100, 3)
        for adjustment in (0, 1, 2):
            assert normal_interval(no_unret, 0.95, adjustment).upper == 1.0
            assert normal_interval(no_ret, 0.95, adjustment).lower == 0.0

    def test_laplace_symmetric_adjustment(self):
        # one stratum with r = n/2 keeps the adjusted proportion at one half
        prob = RecallProblem.simple(500, 100, 50, 500, 100, 50)
        mid, _ = normal_interval_raw(prob, 0.95, 1)
        assert mid == pytest.approx(0.5, abs=1e-12)

    def test_laplace_widens_degenerate_mle(self):
        # zero unretrieved positives give the MLE a zero-width interval; the
        # adjusted counts restore a nonzero spread
        prob = RecallProblem.simple(2000, 100, 50, 100000, 400, 0)
        _, half_mle = normal_interval_raw(prob, 0.95, 0)
        _, half_lap = normal_interval_raw(prob, 0.95, 1)
        assert half_mle == 0.0
        assert half_lap > 0.25

    def test_stratified_segments_supported(self):
        prob = RecallProblem(
            SegmentData(
                (StratumCounts(1000, 50, 25), StratumCounts(1000, 50, 10)), "retrieved"
            ),
            SegmentData(
                (StratumCounts(50000, 100, 2), StratumCounts(50000, 100, 0)),
                "unretrieved",
            ),
        )
        for adjustment in (0, 1, 2):
            iv = normal_interval(prob, 0.95, adjustment)
            assert 0.0 <= iv.lower <= iv.upper <= 1.0

    def test_invalid_adjustment(self):
        with pytest.raises(ValueError):
            normal_interval(AUDIT_PROBLEM, 0.95, 3)


class TestKoopman:
    def test_statistic_zero_at_unconstrained_mle(self):
        gen = np.random.default_rng(55)
        for _ in range(40):
            prob = random_problem(gen)
            ret = prob.retrieved.strata[0]
            unret = prob.unretrieved.strata[0]
            if ret.relevant_in_sample == 0 or unret.relevant_in_sample == 0:
                continue
            phi_hat = (unret.relevant_in_sample / unret.sample_size) / (
                ret.relevant_in_sample / ret.sample_size
            )
            u = _koopman_statistic(
                phi_hat,
                unret.relevant_in_sample,
                unret.sample_size,
                ret.relevant_in_sample,
                ret.sample_size,
            )
            assert u == pytest.approx(0.0, abs=1e-9)

    def test_contains_point_estimate(self):
        gen = np.random.default_rng(56)
        checked = 0
        while checked < 30:
            prob = random_problem(gen)
            ret = prob.retrieved.strata[0]
            unret = prob.unretrieved.strata[0]
            if ret.relevant_in_sample == 0 or unret.relevant_in_sample == 0:
                continue
            iv = koopman_interval(prob, 0.95)
            assert iv.lower - 1e-9 <= iv.point <= iv.upper + 1e-9
            checked += 1

    def test_agrees_with_grid_scan(self):
        iv = koopman_interval(AUDIT_PROBLEM, 0.95)
        crit = chi_square_1df_quantile(0.95)
        phis = np.exp(np.linspace(np.log(1e-4), np.log(1e4), 400_001))
        ok = [p for p in phis if _koopman_statistic(p, 3, 100, 50, 100) <= crit]
        scale = 100000 / 2000
        lo_scan = 1 / (1 + scale * ok[-1])
        hi_scan = 1 / (1 + scale * ok[0])
        assert iv.lower == pytest.approx(lo_scan, abs=2e-4)
        assert iv.upper == pytest.approx(hi_scan, abs=2e-4)

    def test_forcing_rules(self):
        no_unret = RecallProblem.simple(2000, 100, 50, 100000, 100, 0)
        assert koopman_interval(no_unret, 0.95).upper == 1.0
        no_ret = RecallProblem.simple(2000, 100, 0, 100000, 100, 3)
        assert koopman_interval(no_ret, 0.95).lower == 0.0
        both = RecallProblem.simple(2000, 100, 0, 100000, 100, 0)
        iv = koopman_interval(both, 0.95)
        assert (iv.lower, iv.upper) == (0.0, 1.0)
        assert iv.point is None

    def test_rejects_stratified_input(self):
        prob = RecallProblem(
            SegmentData(
                (StratumCounts(100, 10, 5), StratumCounts(100, 10, 5)), "retrieved"
            ),
            SegmentData.simple("unretrieved", 1000, 20, 1),
        )
        with pytest.raises(ValueError, match="stratified"):
            koopman_interval(prob, 0.95)

    def test_all_relevant_everywhere(self):
        prob = RecallProblem.simple(100, 10, 10, 1000, 20, 20)
        iv = koopman_interval(prob, 0.95)
        assert 0.0 <= iv.lower <= iv.upper <= 1.0


def posterior_pmf_direct(s, r, population, sample, alpha, beta):
    """Yield posterior evaluated straight from its closed form (test oracle)."""
    if s < r or s > population - sample + r:
        return 0.0
    log_comb = (
        gammaln(population - sample + 1)
        - gammaln(s - r + 1)
        - gammaln(population - sample - (s - r) + 1)
    )
    return float(
        np.exp(
            log_comb
            + betaln(s + alpha, population - s + beta)
            - betaln(alpha + r, beta + sample - r)
        )
    )


class TestBetaBinomialConjugacy:
    @given(
        population=st.integers(1, 50),
        data=st.data(),
        alpha=st.floats(0.1, 5.0),
        beta=st.floats(0.1, 5.0),
    )
    @settings(max_examples=80, deadline=None)
    def test_posterior_equals_shifted_prior_form(self, population, data, alpha, beta):
        sample = data.draw(st.integers(0, population))
        r = data.draw(st.integers(0, sample))
        shifted = BetaBinomialParams(population - sample, alpha + r, beta + sample - r)
        for s in range(r, population - sample + r + 1):
            direct = posterior_pmf_direct(s, r, population, sample, alpha, beta)
            conjugate = beta_binomial_pmf(shifted, s - r)
            assert direct == pytest.approx(conjugate, rel=1e-9, abs=1e-12)


class TestMonteCarloIntervals:
    def test_census_is_degenerate_at_true_recall(self):
        prob = RecallProblem.simple(40, 40, 18, 60, 60, 2)
        iv = monte_carlo_interval(
            prob, 0.95, BETA_BINOMIAL, PriorSpec(0.5, 0.5), mc_config(1)
        )
        assert iv.lower == iv.upper == pytest.approx(18 / 20)

    def test_deterministic_under_fixed_stream(self):
        a = monte_carlo_interval(
            AUDIT_PROBLEM, 0.95, BETA_BINOMIAL, PriorSpec(0.5, 0.5), mc_config(7)
        )
        b = monte_carlo_interval(
            AUDIT_PROBLEM, 0.95, BETA_BINOMIAL, PriorSpec(0.5, 0.5), mc_config(7)
        )
        assert (a.lower, a.upper) == (b.lower, b.upper)

    def test_quantile_stability_doubling_draws(self):
        base = monte_carlo_interval(
            AUDIT_PROBLEM,
            0.95,
            BETA_BINOMIAL,
            PriorSpec(0.5, 0.5),
            MonteCarloConfig(rng=RandomStream(3), draws=40_000),
        )
        double = monte_carlo_interval(
            AUDIT_PROBLEM,
            0.95,
            BETA_BINOMIAL,
            PriorSpec(0.5, 0.5),
            MonteCarloConfig(rng=RandomStream(4), draws=80_000),
        )
        assert abs(base.lower - double.lower) < 0.01
        assert abs(base.upper - double.upper) < 0.01

    def test_posterior_support_bound(self):
        # the unsampled remainder bounds each stratum's yield draw
        from recallci.intervals import segment_yield_draws

        seg = SegmentData.simple("retrieved", 50, 20, 5)
        draws = segment_yield_draws(
            seg, BETA_BINOMIAL, PriorSpec(0.5, 0.5), 5000, RandomStream(8), 0
        )
        assert draws.min() >= 5
        assert draws.max() <= 50 - 20 + 5

    def test_beta_jeffreys_close_to_betabin_for_huge_population(self):
        jeff = monte_carlo_interval(
            AUDIT_PROBLEM, 0.95, BETA_JEFFREYS, config=mc_config(9, 40_000)
        )
        bbin = monte_carlo_interval(
            AUDIT_PROBLEM, 0.95, BETA_BINOMIAL, PriorSpec(0.5, 0.5), mc_config(10, 40_000)
        )
        assert jeff.lower == pytest.approx(bbin.lower, abs=0.02)
        assert jeff.upper == pytest.approx(bbin.upper, abs=0.02)

    def test_stratified_problem_supported(self):
        prob = RecallProblem(
            SegmentData(
                (StratumCounts(900, 60, 40), StratumCounts(1100, 40, 8)), "retrieved"
            ),
            SegmentData(
                (StratumCounts(40000, 200, 1), StratumCounts(60000, 100, 0)),
                "unretrieved",
            ),
        )
        iv = monte_carlo_interval(
            prob, 0.95, BETA_BINOMIAL, PriorSpec(0.5, 0.5), mc_config(11)
        )
        assert 0.0 <= iv.lower <= iv.upper <= 1.0

    def test_requires_config(self):
        with pytest.raises(ValueError, match="MonteCarloConfig"):
            monte_carlo_interval(AUDIT_PROBLEM, 0.95, BETA_JEFFREYS)

    def test_rejects_tiny_draw_counts(self):
        with pytest.raises(ValueError, match="1000"):
            MonteCarloConfig(rng=RandomStream(1), draws=500)


class TestMostConservativePrior:
    @pytest.mark.parametrize("population,sample", [(100, 20), (30, 10), (1000, 800), (50000, 3000), (60, 59)])
    def test_solution_in_expected_range(self, population, sample):
        prior = most_conservative_prior(population, sample)
        assert prior.alpha == prior.beta
        assert 0.1 <= prior.alpha <= 1.0

    def test_objective_symmetric(self):
        a = expected_information_gain(0.3, 0.7, 30, 10)
        b = expected_information_gain(0.7, 0.3, 30, 10)
        assert a == pytest.approx(b, rel=1e-12)

    def test_objective_unimodal_spot_checks(self):
        values = [expected_information_gain(a, a, 100, 20) for a in (0.2, 0.5, 1.0)]
        # single interior peak near 0.3: monotone decrease over these probes,
        # and the solver's optimum beats all of them
        assert values[0] > values[1] > values[2]
        best = most_conservative_prior(100, 20).alpha
        peak = expected_information_gain(best, best, 100, 20)
        assert all(peak >= v for v in values)

    def test_capping_matches_reduced_problem(self):
        big = most_conservative_prior(10**6, 5000)
        capped = most_conservative_prior(1000, 800)
        assert big.alpha == pytest.approx(capped.alpha)

    def test_single_draw_sample_warns_and_returns_boundary(self):
        with pytest.warns(RuntimeWarning, match="degenerates"):
            prior = most_conservative_prior(50, 1)
        assert prior.alpha == 0.01

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            most_conservative_prior(10, 0)
        with pytest.raises(ValueError):
            most_conservative_prior(10, 11)


class TestComputeIntervalDispatch:
    def test_betabin_half_identity(self):
        via_dispatch = compute_interval("betabin-half", AUDIT_PROBLEM, 0.95, mc_config(7))
        direct = monte_carlo_interval(
            AUDIT_PROBLEM, 0.95, BETA_BINOMIAL, PriorSpec(0.5, 0.5), mc_config(7)
        )
        assert (via_dispatch.lower, via_dispatch.upper) == (direct.lower, direct.upper)

    def test_normal_laplace_identity(self):
        via_dispatch = compute_interval("normal-laplace", AUDIT_PROBLEM, 0.95)
        direct = normal_interval(AUDIT_PROBLEM, 0.95, 1)
        assert (via_dispatch.lower, via_dispatch.upper) == (direct.lower, direct.upper)

    def test_koopman_stratified_raises_through_dispatch(self):
        prob = RecallProblem(
            SegmentData(
                (StratumCounts(100, 10, 5), StratumCounts(100, 10, 5)), "retrieved"
            ),
            SegmentData.simple("unretrieved", 1000, 20, 1),
        )
        with pytest.raises(ValueError, match="stratified"):
            compute_interval("koopman", prob, 0.95)

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="unknown interval method"):
            compute_interval("bootstrap", AUDIT_PROBLEM, 0.95)

    def test_mc_methods_need_config(self):
        with pytest.raises(ValueError):
            compute_interval("betabin-uniform", AUDIT_PROBLEM, 0.95)


FORCEABLE = ("koopman", "beta-jeffreys", "betabin-uniform", "betabin-half", "betabin-mcp")


class TestForcingRules:
    @pytest.mark.parametrize("method", FORCEABLE)
    def test_upper_forced_when_unretrieved_sample_empty_of_relevant(self, method):
        prob = RecallProblem.simple(3000, 200, 120, 50000, 400, 0)
        iv = compute_interval(method, prob, 0.95, mc_config(13, draws=2000))
        assert iv.upper == 1.0

    @pytest.mark.parametrize("method", FORCEABLE)
    def test_lower_forced_when_retrieved_sample_empty_of_relevant(self, method):
        prob = RecallProblem.simple(3000, 200, 0, 50000, 400, 12)
        iv = compute_interval(method, prob, 0.95, mc_config(14, draws=2000))
        assert iv.lower == 0.0


@pytest.mark.parametrize("method", METHODS)
def test_interval_bounds_always_ordered_in_unit_range(method):
    gen = np.random.default_rng(hash(method) % 2**32)
    config = mc_config(15, draws=2000)
    for _ in range(25):
        prob = random_problem(gen, max_pop=400)
        r1 = prob.retrieved.total_relevant_sampled
        r0 = prob.unretrieved.total_relevant_sampled
        if method == "naive-binomial" and r1 == 0 and r0 == 0:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            iv = compute_interval(method, prob, 0.95, config)
        assert 0.0 <= iv.lower <= iv.upper <= 1.0
        assert isinstance(iv, RecallInterval)
