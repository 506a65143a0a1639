#pragma once

#include <cmath>
#include <vector>

#include "pdmp/model.hpp"
#include "pdmp/rng.hpp"

// Shared scenario generators and the first-order reference integrator used
// to cross-check the closed-form relaxation.
namespace pdmp::testsup {

struct ScenarioOptions {
    int min_n = 1;
    int max_n = 6;
    bool allow_zero_alpha = true;
    bool allow_zero_lambda = true;
    bool couplings = true;
    double max_c = 1.5;
};

inline RateFunction random_phi(RngStream& rng, const ScenarioOptions& opt) {
    const double c = 0.3 + rng.uniform01() * (opt.max_c - 0.3);
    switch (static_cast<int>(rng.uniform01() * 3.0)) {
        case 0: return RateFunction::linear(c, 1.0);
        case 1: {
            const double p = 0.5 + rng.uniform01() * 2.0;
            return RateFunction::power(c, p, 1.0);
        }
        default: {
            const double m = 0.3 + rng.uniform01() * 1.2;
            return RateFunction::saturating(c, m, 1.0);
        }
    }
}

inline NetworkParams random_params(RngStream& rng,
                                   const ScenarioOptions& opt = {}) {
    const int n =
        opt.min_n +
        static_cast<int>(rng.uniform01() * (opt.max_n - opt.min_n + 1));
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    if (opt.couplings) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i != j && rng.uniform01() < 0.7) {
                    w[static_cast<std::size_t>(i) * n + j] =
                        rng.uniform01() * 0.8;
                }
            }
        }
    }
    const double lambda = (opt.allow_zero_lambda && rng.uniform01() < 0.25)
                              ? 0.0
                              : rng.uniform01() * 2.0;
    const double alpha = (opt.allow_zero_alpha && rng.uniform01() < 0.25)
                             ? 0.0
                             : rng.uniform01() * 2.0;
    return NetworkParams(n, std::move(w), lambda, alpha,
                         random_phi(rng, opt));
}

inline PotentialState random_state(RngStream& rng, int n,
                                   double max_level = 2.0) {
    PotentialState s;
    s.t = 0.0;
    s.u.resize(n);
    for (int i = 0; i < n; ++i) {
        s.u[i] = rng.uniform01() < 0.15 ? 0.0 : rng.uniform01() * max_level;
    }
    return s;
}

// Forward Euler for du_i/dt = -alpha u_i - lambda (u_i - mean(u)), sharing
// no arithmetic with the closed-form relaxation.
inline std::vector<double> euler_flow(std::vector<double> u, double lambda,
                                      double alpha, double dt, double h) {
    const auto steps = static_cast<long long>(std::llround(dt / h));
    const int n = static_cast<int>(u.size());
    for (long long s = 0; s < steps; ++s) {
        double ubar = 0.0;
        for (double x : u) ubar += x;
        ubar /= n;
        for (int i = 0; i < n; ++i) {
            u[i] += h * (-alpha * u[i] - lambda * (u[i] - ubar));
            if (u[i] < 0.0) u[i] = 0.0;
        }
    }
    return u;
}

}  // namespace pdmp::testsup
