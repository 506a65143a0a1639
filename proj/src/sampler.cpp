#include "pdmp/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "pdmp/quadrature.hpp"

namespace pdmp {

namespace {

bool is_linear(const RateFunction& phi) {
    return phi.kind() == RateFunction::Kind::linear ||
           (phi.kind() == RateFunction::Kind::power && phi.exponent() == 1.0);
}

// Total rate tau time units after s along the spike-free relaxation,
// without materialising the flowed state.
double total_rate_after(const PotentialState& s, const NetworkParams& params,
                        double tau) {
    const double ubar = s.mean();
    const double fdev = std::exp(-(params.alpha() + params.lambda()) * tau);
    const double fmean = std::exp(-params.alpha() * tau);
    const RateFunction& phi = params.phi();
    double acc = 0.0;
    for (double x : s.u) {
        double v = (x - ubar) * fdev + ubar * fmean;
        acc += phi(v < 0.0 ? 0.0 : v);
    }
    return acc;
}

// Integral of the total rate over [0, dt] when phi is linear: deviations
// from the mean cancel in the sum, so the total rate is c * n * mean(0)
// * exp(-alpha * tau) regardless of lambda.
double linear_intensity(double mean0, const NetworkParams& params, double dt) {
    const double level = params.phi().c() * params.n() * mean0;
    if (level == 0.0) return 0.0;
    const double a = params.alpha();
    if (a == 0.0) return level * dt;
    return level * -std::expm1(-a * dt) / a;
}

double quadrature_intensity(const PotentialState& s,
                            const NetworkParams& params, double dt,
                            double rel_tol) {
    QuadratureOptions opts;
    opts.rel_tol = rel_tol;
    return integrate(
        [&](double tau) { return total_rate_after(s, params, tau); }, 0.0, dt,
        opts);
}

}  // namespace

double total_rate(const PotentialState& s, const NetworkParams& params) {
    const RateFunction& phi = params.phi();
    double acc = 0.0;
    for (double x : s.u) acc += phi(x);
    return acc;
}

double dominating_rate(const PotentialState& s, const NetworkParams& params) {
    return params.n() * params.phi()(s.max());
}

ThinningResult next_spike_thinning(const PotentialState& s,
                                   const NetworkParams& params, RngStream& rng,
                                   double horizon) {
    if (static_cast<int>(s.u.size()) != params.n()) {
        throw std::invalid_argument("state size does not match network size");
    }
    if (!(horizon > s.t)) {
        throw std::invalid_argument("horizon must lie beyond the state time");
    }
    const double lam = dominating_rate(s, params);
    if (lam <= 0.0) {
        return NoSpikeBeforeHorizon{flow(s, params, horizon - s.t), 0};
    }

    double t = s.t;
    std::uint64_t tried = 0;
    for (;;) {
        t += rng.exponential(lam);
        ++tried;
        if (t > horizon) {
            return NoSpikeBeforeHorizon{flow(s, params, horizon - s.t), tried};
        }
        PotentialState cur = flow(s, params, t - s.t);
        const RateFunction& phi = params.phi();
        double tot = 0.0;
        for (double x : cur.u) tot += phi(x);
        if (tot > lam * (1.0 + 1e-12)) {
            throw std::logic_error(
                "thinning acceptance ratio exceeded 1; dominating rate bound "
                "is broken");
        }
        if (rng.uniform01() * lam < tot) {
            double r = rng.uniform01() * tot;
            int neuron = -1;
            double acc = 0.0;
            for (int j = 0; j < params.n(); ++j) {
                acc += phi(cur.u[j]);
                if (r < acc) {
                    neuron = j;
                    break;
                }
            }
            if (neuron < 0) {
                // rounding pushed the prefix walk off the end; take the
                // last neuron with positive rate
                for (int j = params.n() - 1; j >= 0; --j) {
                    if (phi(cur.u[j]) > 0.0) {
                        neuron = j;
                        break;
                    }
                }
            }
            return NextSpike{t, neuron, tried};
        }
    }
}

double cumulative_intensity(const PotentialState& s,
                            const NetworkParams& params, double dt,
                            SurvivalMethod method) {
    if (!(dt >= 0.0)) {
        throw std::invalid_argument("cumulative_intensity requires dt >= 0");
    }
    if (dt == 0.0) return 0.0;
    if (method == SurvivalMethod::automatic && is_linear(params.phi())) {
        return linear_intensity(s.mean(), params, dt);
    }
    return quadrature_intensity(s, params, dt, 1e-10);
}

double survival_probability(const PotentialState& s,
                            const NetworkParams& params, double t,
                            SurvivalMethod method) {
    if (!(t >= s.t)) {
        throw std::invalid_argument(
            "survival_probability requires t >= state time");
    }
    return std::exp(-cumulative_intensity(s, params, t - s.t, method));
}

double total_cumulative_intensity(const PotentialState& s,
                                  const NetworkParams& params) {
    const double a = params.alpha();
    if (a <= 0.0) {
        if (dominating_rate(s, params) == 0.0) return 0.0;
        throw std::domain_error(
            "total cumulative intensity diverges when alpha == 0 and the "
            "rate does not vanish");
    }
    const RateFunction& phi = params.phi();
    if (is_linear(phi)) {
        return phi.c() * params.n() * s.mean() / a;
    }
    const double umax = s.max();
    if (umax == 0.0) return 0.0;

    // Every coordinate stays below umax * exp(-alpha tau), so the intensity
    // beyond time T is at most (n/alpha) * I(umax * exp(-alpha T)) with I
    // the partial integral of phi(u)/u. Truncate where that bound is
    // negligible and integrate the head numerically.
    const double tail_cap = 1e-13;
    const double scale = params.n() / a;
    if (scale * phi.integrability_partial(umax) <= tail_cap) {
        return 0.0;  // the whole integral is already below the cap
    }
    double lo = 0.0, hi = umax;  // lo: tail bound holds, hi: it does not
    for (int it = 0; it < 120; ++it) {
        double x = 0.5 * (lo + hi);
        if (scale * phi.integrability_partial(x) <= tail_cap) {
            lo = x;
        } else {
            hi = x;
        }
    }
    if (lo <= 0.0) {
        throw std::logic_error("tail truncation level underflowed");
    }
    const double horizon = std::log(umax / lo) / a;
    return quadrature_intensity(s, params, horizon, 1e-12);
}

std::optional<double> sample_first_spike_inversion(
    const PotentialState& s, const NetworkParams& params, RngStream& rng) {
    const double target = rng.exponential(1.0);
    if (dominating_rate(s, params) == 0.0) {
        return std::nullopt;  // rate is zero now and stays zero
    }
    const bool linear = is_linear(params.phi());
    if (params.alpha() > 0.0) {
        const double grand_total = total_cumulative_intensity(s, params);
        if (grand_total <= target) return std::nullopt;
    }

    // Intensity accumulated over [0, from] is carried along so that each
    // bracketing or bisection step only integrates the span it newly
    // examines.
    auto span_intensity = [&](double from, double to) {
        if (linear) {
            return linear_intensity(s.mean() * std::exp(-params.alpha() * from),
                                    params, to - from);
        }
        PotentialState base = flow(s, params, from);
        QuadratureOptions opts;
        opts.rel_tol = 1e-12;
        return integrate(
            [&](double tau) { return total_rate_after(base, params, tau); },
            0.0, to - from, opts);
    };

    double lo = 0.0;
    double acc = 0.0;  // intensity over [0, lo]
    double hi = 1.0;
    const double tot0 = total_rate(s, params);
    if (tot0 > 0.0) hi = std::max(1e-6, target / tot0);
    for (int it = 0;; ++it) {
        const double seg = span_intensity(lo, hi);
        if (acc + seg >= target) break;
        if (params.alpha() > 0.0 && (acc + seg == acc || it > 200)) {
            // remaining mass is numerically exhausted just short of the
            // target; the draw sits on the no-spike boundary
            return std::nullopt;
        }
        if (it > 400) {
            throw std::logic_error(
                "failed to bracket the first-spike time; cumulative "
                "intensity is not reaching the target");
        }
        acc += seg;
        lo = hi;
        hi *= 2.0;
    }

    const double tol = 1e-10;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double seg = span_intensity(lo, mid);
        if (acc + seg < target) {
            acc += seg;
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return s.t + 0.5 * (lo + hi);
}

double residual_spike_probability(const PotentialState& s,
                                  const NetworkParams& params) {
    if (!(params.alpha() > 0.0)) {
        throw std::domain_error(
            "residual spike probability is only defined for alpha > 0");
    }
    return -std::expm1(-total_cumulative_intensity(s, params));
}

}  // namespace pdmp
