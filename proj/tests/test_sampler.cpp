#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "pdmp/sampler.hpp"
#include "pdmp/stats.hpp"
#include "test_support.hpp"

using namespace pdmp;
using doctest::Approx;

namespace {

NetworkParams uncoupled(int n, double lambda, double alpha, RateFunction phi) {
    return NetworkParams(n, std::vector<double>(n * n, 0.0), lambda, alpha,
                         phi);
}

std::vector<double> draw_thinning(const PotentialState& s,
                                  const NetworkParams& params,
                                  std::uint64_t seed, std::size_t count,
                                  double horizon) {
    std::vector<double> out;
    out.reserve(count);
    RngStream rng(seed, 0);
    for (std::size_t k = 0; k < count; ++k) {
        ThinningResult r = next_spike_thinning(s, params, rng, horizon);
        if (auto* spike = std::get_if<NextSpike>(&r)) out.push_back(spike->t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> draw_inversion(const PotentialState& s,
                                   const NetworkParams& params,
                                   std::uint64_t seed, std::size_t count,
                                   double horizon) {
    std::vector<double> out;
    out.reserve(count);
    RngStream rng(seed, 1);
    for (std::size_t k = 0; k < count; ++k) {
        auto t = sample_first_spike_inversion(s, params, rng);
        if (t && *t <= horizon) out.push_back(*t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("total and dominating rates: frozen values") {
    auto lin = uncoupled(2, 0.0, 0.0, RateFunction::linear(1.0, 1.0));
    PotentialState s{{2.0, 0.0}, 0.0};
    CHECK(total_rate(s, lin) == Approx(2.0));
    CHECK(dominating_rate(s, lin) == Approx(4.0));

    auto sat = uncoupled(2, 0.0, 0.0, RateFunction::saturating(1.0, 2.0, 1.0));
    PotentialState s2{{4.0, 1.0}, 0.0};
    CHECK(total_rate(s2, sat) == Approx(3.0));
    CHECK(dominating_rate(s2, sat) == Approx(4.0));
}

TEST_CASE("dominating rate stays above the total rate along the relaxation") {
    RngStream rng(99, 0);
    for (int it = 0; it < 200; ++it) {
        NetworkParams params = testsup::random_params(rng);
        PotentialState s = testsup::random_state(rng, params.n());
        const double lam = dominating_rate(s, params);
        for (double tau : {0.0, 0.05, 0.3, 1.0, 4.0}) {
            CHECK(total_rate(flow(s, params, tau), params) <=
                  lam * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("static network: exact exponential first-spike law") {
    // alpha = lambda = 0 freezes the state, so the first spike is
    // exponential with the total rate and only neuron 0 can fire.
    auto params = uncoupled(2, 0.0, 0.0, RateFunction::linear(1.0, 1.0));
    PotentialState s{{2.0, 0.0}, 0.0};

    RngStream rng(7, 0);
    std::vector<double> times;
    for (int k = 0; k < 4000; ++k) {
        ThinningResult r = next_spike_thinning(s, params, rng, 50.0);
        REQUIRE(std::holds_alternative<NextSpike>(r));
        const NextSpike& spike = std::get<NextSpike>(r);
        CHECK(spike.neuron == 0);
        times.push_back(spike.t);
    }
    std::sort(times.begin(), times.end());
    const double d =
        ks_statistic(times, [](double t) { return 1.0 - std::exp(-2.0 * t); });
    CHECK(ks_pvalue(d, times.size()) > 0.01);

    CHECK(survival_probability(s, params, 0.7) == Approx(std::exp(-1.4)));
    CHECK(survival_probability(s, params, 0.7, SurvivalMethod::quadrature) ==
          Approx(std::exp(-1.4)).epsilon(1e-9));
}

TEST_CASE("linear rates: deviations cancel so only the mean matters") {
    // With a linear shape the total rate is c * n * mean(0) * exp(-alpha t)
    // whatever lambda does to the individual coordinates.
    auto params = uncoupled(2, 3.0, 0.0, RateFunction::linear(1.0, 1.0));
    PotentialState s{{2.0, 0.0}, 0.0};
    CHECK(survival_probability(s, params, 1.3) ==
          Approx(std::exp(-2.6)).epsilon(1e-12));
    CHECK(survival_probability(s, params, 1.3, SurvivalMethod::quadrature) ==
          Approx(std::exp(-2.6)).epsilon(1e-9));

    RngStream rng(11, 0);
    for (int it = 0; it < 40; ++it) {
        testsup::ScenarioOptions opt;
        NetworkParams base = testsup::random_params(rng, opt);
        NetworkParams lin = base.with_phi(
            RateFunction::linear(0.2 + rng.uniform01(), 1.0));
        PotentialState st = testsup::random_state(rng, lin.n());
        const double dt = 0.1 + rng.uniform01() * 2.0;
        const double closed = cumulative_intensity(st, lin, dt);
        const double quad =
            cumulative_intensity(st, lin, dt, SurvivalMethod::quadrature);
        CHECK(closed == Approx(quad).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("survival probability behaves like a distribution tail") {
    auto params = uncoupled(3, 0.3, 0.5, RateFunction::power(1.0, 2.0, 1.0));
    PotentialState s{{1.2, 0.4, 0.8}, 0.0};
    double prev = 1.0;
    for (double t : {0.0, 0.2, 0.5, 1.0, 2.0, 4.0}) {
        const double surv =
            survival_probability(s, params, t, SurvivalMethod::quadrature);
        CHECK(surv <= prev + 1e-12);
        CHECK(surv >= 0.0);
        CHECK(surv <= 1.0);
        prev = surv;
    }
    CHECK(survival_probability(s, params, 0.0) == 1.0);
}

TEST_CASE("total cumulative intensity: closed form and quadrature") {
    auto lin = uncoupled(2, 1.3, 0.5, RateFunction::linear(0.8, 1.0));
    PotentialState s{{0.3, 0.5}, 0.0};
    CHECK(total_cumulative_intensity(s, lin) == Approx(1.28).epsilon(1e-12));
    CHECK(residual_spike_probability(s, lin) ==
          Approx(-std::expm1(-1.28)).epsilon(1e-12));

    auto pow = uncoupled(2, 0.4, 0.7, RateFunction::power(0.9, 2.0, 1.0));
    PotentialState sp{{1.1, 0.6}, 0.0};
    const double grand = total_cumulative_intensity(sp, pow);
    const double far =
        cumulative_intensity(sp, pow, 200.0, SurvivalMethod::quadrature);
    CHECK(grand == Approx(far).epsilon(1e-6));

    // Zero state: nothing will ever fire.
    PotentialState z{{0.0, 0.0}, 0.0};
    CHECK(total_cumulative_intensity(z, pow) == 0.0);

    // Without leak the intensity diverges unless the rate vanishes.
    auto flat = uncoupled(2, 0.4, 0.0, RateFunction::power(0.9, 2.0, 1.0));
    CHECK_THROWS_AS(total_cumulative_intensity(sp, flat), std::domain_error);
    CHECK(total_cumulative_intensity(z, flat) == 0.0);
}

TEST_CASE("thinning matches the quadrature survival function") {
    auto params = uncoupled(3, 0.3, 0.5, RateFunction::power(1.0, 2.0, 1.0));
    PotentialState s{{1.2, 0.4, 0.8}, 0.0};
    const double horizon = 2.0;
    auto times = draw_thinning(s, params, 123, 2500, horizon);
    REQUIRE(times.size() > 500);

    const double mass =
        1.0 -
        survival_probability(s, params, horizon, SurvivalMethod::quadrature);
    const double d = ks_statistic(times, [&](double t) {
        return (1.0 - survival_probability(s, params, t,
                                           SurvivalMethod::quadrature)) /
               mass;
    });
    CHECK(ks_pvalue(d, times.size()) > 0.01);
}

TEST_CASE("inversion sampling agrees with thinning") {
    auto params = uncoupled(3, 0.3, 0.5, RateFunction::power(1.0, 2.0, 1.0));
    PotentialState s{{1.2, 0.4, 0.8}, 0.0};
    const double horizon = 2.0;
    auto thin = draw_thinning(s, params, 321, 2500, horizon);
    auto inv = draw_inversion(s, params, 321, 2500, horizon);
    REQUIRE(thin.size() > 500);
    REQUIRE(inv.size() > 500);
    const double d = ks_statistic_two_sample(thin, inv);
    CHECK(ks_pvalue_two_sample(d, thin.size(), inv.size()) > 0.01);
}

TEST_CASE("inversion no-spike frequency matches the residual mass") {
    auto params = uncoupled(2, 0.6, 1.1, RateFunction::power(1.0, 1.5, 1.0));
    PotentialState s{{0.7, 0.2}, 0.0};
    const double p_spike = residual_spike_probability(s, params);

    RngStream rng(55, 0);
    const int n = 20000;
    int spiked = 0;
    for (int k = 0; k < n; ++k) {
        if (sample_first_spike_inversion(s, params, rng)) ++spiked;
    }
    const double est = static_cast<double>(spiked) / n;
    const double sigma = std::sqrt(p_spike * (1.0 - p_spike) / n);
    CHECK(std::fabs(est - p_spike) <= 4.0 * sigma);
}

TEST_CASE("residual spike probability shrinks along the relaxation") {
    auto params = uncoupled(2, 0.6, 1.1, RateFunction::power(1.0, 1.5, 1.0));
    PotentialState s{{0.7, 0.2}, 0.0};
    double prev = residual_spike_probability(s, params);
    for (double tau : {0.5, 1.0, 2.0, 4.0}) {
        const double cur =
            residual_spike_probability(flow(s, params, tau), params);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }

    auto flat = uncoupled(2, 0.6, 0.0, RateFunction::linear(1.0, 1.0));
    CHECK_THROWS_AS(residual_spike_probability(s, flat), std::domain_error);
}

TEST_CASE("quiet results carry the horizon state") {
    auto params = uncoupled(2, 0.4, 0.8, RateFunction::linear(1.0, 1.0));
    PotentialState z{{0.0, 0.0}, 0.0};
    RngStream rng(1, 0);
    ThinningResult r = next_spike_thinning(z, params, rng, 3.0);
    REQUIRE(std::holds_alternative<NoSpikeBeforeHorizon>(r));
    const auto& quiet = std::get<NoSpikeBeforeHorizon>(r);
    CHECK(quiet.candidates_tried == 0);
    CHECK(quiet.state_at_horizon.t == Approx(3.0));
    CHECK(quiet.state_at_horizon.u == std::vector<double>{0.0, 0.0});

    PotentialState s{{0.5, 0.1}, 1.0};
    for (int k = 0; k < 50; ++k) {
        ThinningResult rr = next_spike_thinning(s, params, rng, 1.01);
        if (auto* q = std::get_if<NoSpikeBeforeHorizon>(&rr)) {
            PotentialState expect = flow(s, params, 0.01);
            CHECK(q->state_at_horizon.u == expect.u);
        }
    }

    CHECK(sample_first_spike_inversion(z, params, rng) == std::nullopt);
    CHECK_THROWS_AS(next_spike_thinning(s, params, rng, 0.5),
                    std::invalid_argument);
}

TEST_CASE("thinning produces well-formed spikes on random scenarios") {
    RngStream rng(888, 0);
    for (int it = 0; it < 300; ++it) {
        NetworkParams params = testsup::random_params(rng);
        PotentialState s = testsup::random_state(rng, params.n());
        s.t = rng.uniform01() * 2.0;
        const double horizon = s.t + 0.1 + rng.uniform01() * 2.0;
        RngStream draw(1000 + it, 0);
        ThinningResult r = next_spike_thinning(s, params, draw, horizon);
        if (auto* spike = std::get_if<NextSpike>(&r)) {
            CHECK(spike->t > s.t);
            CHECK(spike->t <= horizon);
            CHECK(spike->neuron >= 0);
            CHECK(spike->neuron < params.n());
            // The chosen neuron has positive rate at the spike time.
            PotentialState at = flow(s, params, spike->t - s.t);
            CHECK(params.phi()(at.u[spike->neuron]) > 0.0);
        } else {
            const auto& q = std::get<NoSpikeBeforeHorizon>(r);
            CHECK(q.state_at_horizon.t == Approx(horizon));
        }
    }
}
