#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pdmp/model.hpp"
#include "pdmp/quadrature.hpp"
#include "pdmp/rng.hpp"
#include "test_support.hpp"

using namespace pdmp;
using doctest::Approx;

namespace {

NetworkParams make_params(int n, std::vector<double> w, double lambda,
                          double alpha) {
    return NetworkParams(n, std::move(w), lambda, alpha,
                         RateFunction::linear(1.0, 1.0));
}

}  // namespace

TEST_CASE("relaxation map: frozen values") {
    // Pure mixing: mean is conserved, deviations halve over one unit.
    auto p1 = make_params(2, {0.0, 0.0, 0.0, 0.0}, std::log(2.0), 0.0);
    PotentialState s{{2.0, 0.0}, 0.0};
    PotentialState a = flow(s, p1, 1.0);
    CHECK(a.u[0] == Approx(1.5).epsilon(1e-12));
    CHECK(a.u[1] == Approx(0.5).epsilon(1e-12));
    CHECK(a.t == Approx(1.0));

    // Pure leak: coordinates decay independently.
    auto p2 = make_params(2, {0.0, 0.0, 0.0, 0.0}, 0.0, std::log(2.0));
    PotentialState b = flow(s, p2, 1.0);
    CHECK(b.u[0] == Approx(1.0).epsilon(1e-12));
    CHECK(b.u[1] == Approx(0.0));

    // dt = 0 and a drift-free network leave the state untouched.
    PotentialState c = flow(s, p1, 0.0);
    CHECK(c.u == s.u);
    auto p3 = make_params(2, {0.0, 0.0, 0.0, 0.0}, 0.0, 0.0);
    PotentialState d = flow(s, p3, 7.5);
    CHECK(d.u == s.u);
    CHECK(d.t == Approx(7.5));

    CHECK_THROWS_AS(flow(s, p1, -0.1), std::invalid_argument);
}

TEST_CASE("relaxation map: semigroup, mean decay, coordinate bound") {
    RngStream rng(2024, 0);
    for (int it = 0; it < 200; ++it) {
        NetworkParams params = testsup::random_params(rng);
        PotentialState s = testsup::random_state(rng, params.n());
        const double a = rng.uniform01() * 1.5;
        const double b = rng.uniform01() * 1.5;

        PotentialState two = flow(flow(s, params, a), params, b);
        PotentialState one = flow(s, params, a + b);
        for (int i = 0; i < params.n(); ++i) {
            CHECK(two.u[i] ==
                  Approx(one.u[i]).epsilon(1e-12).scale(1.0));
        }

        // The mean ignores the mixing term entirely.
        CHECK(one.mean() ==
              Approx(s.mean() * std::exp(-params.alpha() * (a + b)))
                  .epsilon(1e-12)
                  .scale(1.0));

        // No coordinate ever exceeds max(its start, the start mean).
        const double ubar = s.mean();
        for (int i = 0; i < params.n(); ++i) {
            CHECK(one.u[i] >= 0.0);
            CHECK(one.u[i] <= std::max(s.u[i], ubar) + 1e-12);
        }
    }
}

TEST_CASE("relaxation map matches a first-order reference integrator") {
    RngStream rng(77, 0);
    for (int it = 0; it < 15; ++it) {
        NetworkParams params = testsup::random_params(rng);
        PotentialState s = testsup::random_state(rng, params.n());
        const double dt = 0.5;
        PotentialState exact = flow(s, params, dt);
        auto ref = testsup::euler_flow(s.u, params.lambda(), params.alpha(),
                                       dt, 1e-5);
        for (int i = 0; i < params.n(); ++i) {
            CHECK(std::fabs(exact.u[i] - ref[i]) <= 1e-3);
        }
    }
}

TEST_CASE("spike map: frozen values") {
    // No coupling: the firing neuron just resets.
    auto p0 = make_params(3, std::vector<double>(9, 0.0), 0.3, 0.2);
    PotentialState s{{1.0, 2.0, 3.0}, 0.0};
    PotentialState a = jump(s, p0, 1);
    CHECK(a.u == std::vector<double>{1.0, 0.0, 3.0});
    CHECK(a.t == s.t);

    // Neuron 0 sends 0.5 to neuron 1 and 0.2 to neuron 2.
    auto p1 = make_params(3,
                          {0.0, 0.5, 0.2,  //
                           0.0, 0.0, 0.0,  //
                           0.0, 0.0, 0.0},
                          0.3, 0.2);
    PotentialState st{{1.0, 0.3, 0.7}, 0.0};
    PotentialState b = jump(st, p1, 0);
    CHECK(b.u[0] == 0.0);
    CHECK(b.u[1] == Approx(0.8).epsilon(1e-15));
    CHECK(b.u[2] == Approx(0.9).epsilon(1e-15));
    CHECK(b.mean() == Approx(1.7 / 3.0).epsilon(1e-14));

    CHECK_THROWS_AS(jump(st, p1, 3), std::invalid_argument);
    CHECK_THROWS_AS(jump(st, p1, -1), std::invalid_argument);
}

TEST_CASE("spike map: mean identity") {
    RngStream rng(5150, 0);
    for (int it = 0; it < 200; ++it) {
        NetworkParams params = testsup::random_params(rng);
        PotentialState s = testsup::random_state(rng, params.n());
        const int i = static_cast<int>(rng.uniform01() * params.n());
        const auto d = derived_constants(params);
        PotentialState post = jump(s, params, i);
        const int n = params.n();
        CHECK(n * post.mean() ==
              Approx(n * s.mean() - s.u[i] + d.out_mass[i])
                  .epsilon(1e-12)
                  .scale(1.0));
    }
}

TEST_CASE("rate shapes: values and constraints") {
    auto lin = RateFunction::linear(2.0, 1.0);
    CHECK(lin(0.0) == 0.0);
    CHECK(lin(1.5) == Approx(3.0));
    CHECK(*lin.lipschitz_constant() == 2.0);
    CHECK(lin.kind_name() == "linear");

    auto pow2 = RateFunction::power(1.5, 2.0, 1.0);
    CHECK(pow2(2.0) == Approx(6.0));
    CHECK(!pow2.lipschitz_constant().has_value());
    auto sqrtp = RateFunction::power(1.0, 0.5, 1.0);
    CHECK(sqrtp(4.0) == Approx(2.0));
    auto pow1 = RateFunction::power(0.7, 1.0, 1.0);
    CHECK(*pow1.lipschitz_constant() == 0.7);

    auto sat = RateFunction::saturating(1.0, 1.0, 1.0);
    CHECK(sat(4.0) == Approx(1.0));
    CHECK(sat(0.3) == Approx(0.3));
    CHECK(*sat.lipschitz_constant() == 1.0);

    CHECK_THROWS_AS(lin(-0.5), std::invalid_argument);
    CHECK_THROWS_AS(RateFunction::power(1.0, 0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(RateFunction::power(1.0, -1.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(RateFunction::saturating(1.0, 0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(RateFunction::linear(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(RateFunction::linear(1.0, 0.0), std::invalid_argument);

    CHECK(lin.with_radius(0.25).radius() == 0.25);
}

TEST_CASE("rate integrability: frozen values") {
    CHECK(RateFunction::linear(1.0, 0.5).integrability_value() ==
          Approx(1.0));
    CHECK(RateFunction::power(1.0, 2.0, 1.0).integrability_value() ==
          Approx(2.0));
    CHECK(RateFunction::linear(0.0, 1.0).integrability_value() == 0.0);
    // Past the saturation level the integrand turns into c*M/u.
    CHECK(RateFunction::saturating(2.0, 1.0, 1.0).integrability_value() ==
          Approx(2.0 + 2.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(RateFunction::saturating(1.0, 5.0, 1.0).integrability_value() ==
          Approx(2.0));
}

TEST_CASE("rate integrability matches numeric integration") {
    RngStream rng(31, 0);
    for (int it = 0; it < 40; ++it) {
        RateFunction phi = testsup::random_phi(rng, {});
        const double a = 0.01 + rng.uniform01() * 0.5;
        const double b = a + rng.uniform01() * 3.0;
        const double analytic =
            phi.integrability_partial(b) - phi.integrability_partial(a);
        const double numeric =
            integrate([&](double u) { return phi(u) / u; }, a, b);
        CHECK(analytic == Approx(numeric).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("derived weight masses") {
    auto p = make_params(3,
                         {0.0, 0.5, 0.2,  //
                          0.0, 0.0, 0.1,  //
                          0.0, 0.0, 0.0},
                         0.0, 0.0);
    auto d = derived_constants(p);
    CHECK(d.in_mass_max == Approx(0.5));
    CHECK(d.out_mass[0] == Approx(0.7));
    CHECK(d.out_mass[1] == Approx(0.1));
    CHECK(d.out_mass[2] == 0.0);
    CHECK(d.out_mass_max == Approx(0.7));
    CHECK(default_rate_radius(p) == Approx(0.505));

    // Fully symmetric coupling at level w: every mass is (n-1)*w.
    const int n = 5;
    const double w = 0.3;
    std::vector<double> sym(n * n, w);
    for (int i = 0; i < n; ++i) sym[i * n + i] = 0.0;
    auto ps = make_params(n, sym, 0.0, 0.0);
    auto ds = derived_constants(ps);
    CHECK(ds.in_mass_max == Approx((n - 1) * w).epsilon(1e-14));
    CHECK(ds.out_mass_max == Approx((n - 1) * w).epsilon(1e-14));

    auto pz = make_params(2, {0.0, 0.0, 0.0, 0.0}, 0.0, 0.0);
    CHECK(default_rate_radius(pz) == 1.0);
}

TEST_CASE("round-robin base configuration: frozen two-neuron case") {
    auto p = make_params(2, {0.0, 0.7, 0.4, 0.0}, 0.5, 0.5);
    CascadeConfig cc = cascade_configs(p);
    CHECK(cc.v[0] == std::vector<double>{0.4, 0.0});
    CHECK(cc.v[1] == std::vector<double>{0.0, 0.7});
    CHECK(cc.v[2] == std::vector<double>{0.4, 0.0});
}

TEST_CASE("round-robin base configuration: closure and spike consistency") {
    RngStream rng(4242, 0);
    for (int it = 0; it < 300; ++it) {
        NetworkParams params = testsup::random_params(rng, {1, 7});
        CascadeConfig cc = cascade_configs(params);
        const int n = params.n();
        REQUIRE(static_cast<int>(cc.v.size()) == n + 1);

        // One full round returns to the base configuration bit for bit.
        CHECK(cc.v[n] == cc.v[0]);

        // Each intermediate state is exactly the previous one after a
        // spike of the scheduled neuron.
        for (int k = 1; k <= n; ++k) {
            PotentialState prev{cc.v[k - 1], 0.0};
            PotentialState next = jump(prev, params, k - 1);
            CHECK(next.u == cc.v[k]);
        }

        // Deviations are centered by construction.
        for (int k = 0; k <= n; ++k) {
            double acc = 0.0;
            for (double d : cc.deviations[k]) acc += d;
            CHECK(std::fabs(acc) <= 1e-12 * (1.0 + std::fabs(acc)));
        }
    }
}

TEST_CASE("state and parameter validation") {
    CHECK_THROWS_AS(validate_state(PotentialState{{}, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate_state(PotentialState{{-0.1}, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        validate_state(PotentialState{{std::nan("")}, 0.0}),
        std::invalid_argument);
    CHECK_THROWS_AS(validate_state(PotentialState{{1.0}, -1.0}),
                    std::invalid_argument);
    CHECK_NOTHROW(validate_state(PotentialState{{0.0, 1.0}, 2.0}));

    CHECK_THROWS_AS(make_params(2, {0.1, 0.0, 0.0, 0.0}, 0.0, 0.0),
                    std::invalid_argument);  // self-coupling
    CHECK_THROWS_AS(make_params(2, {0.0, -0.2, 0.0, 0.0}, 0.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_params(2, {0.0, 0.0}, 0.0, 0.0),
                    std::invalid_argument);  // wrong matrix size
    CHECK_THROWS_AS(make_params(2, std::vector<double>(4, 0.0), -1.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_params(0, {}, 0.0, 0.0), std::invalid_argument);
}
