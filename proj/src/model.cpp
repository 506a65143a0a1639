#include "pdmp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pdmp {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

double PotentialState::mean() const {
    if (u.empty()) return 0.0;
    double acc = 0.0;
    for (double x : u) acc += x;
    return acc / static_cast<double>(u.size());
}

double PotentialState::max() const {
    double m = 0.0;
    for (double x : u) m = std::max(m, x);
    return m;
}

void validate_state(const PotentialState& s) {
    require(!s.u.empty(), "state must have at least one coordinate");
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        require(finite(s.u[i]) && s.u[i] >= 0.0,
                "state coordinate " + std::to_string(i) +
                    " must be finite and >= 0");
    }
    require(finite(s.t) && s.t >= 0.0, "state time must be finite and >= 0");
}

RateFunction::RateFunction(Kind kind, double c, double p, double m, double r)
    : kind_(kind), c_(c), p_(p), m_(m), r_(r) {
    require(finite(c) && c >= 0.0, "rate slope c must be finite and >= 0");
    require(finite(r) && r > 0.0, "rate radius r must be finite and > 0");
    if (kind_ == Kind::power) {
        // p <= 0 would make phi(u)/u non-integrable at the origin.
        require(finite(p) && p > 0.0,
                "power exponent p must be > 0; otherwise the integral of "
                "phi(u)/u near zero diverges");
    }
    if (kind_ == Kind::saturating) {
        require(finite(m) && m > 0.0,
                "saturation level must be finite and > 0");
    }
}

RateFunction RateFunction::linear(double c, double r) {
    return RateFunction(Kind::linear, c, 1.0, 0.0, r);
}

RateFunction RateFunction::power(double c, double p, double r) {
    return RateFunction(Kind::power, c, p, 0.0, r);
}

RateFunction RateFunction::saturating(double c, double saturation, double r) {
    return RateFunction(Kind::saturating, c, 1.0, saturation, r);
}

RateFunction RateFunction::with_radius(double r) const {
    return RateFunction(kind_, c_, p_, m_, r);
}

double RateFunction::operator()(double u) const {
    if (!(u >= 0.0)) {
        throw std::invalid_argument("rate function argument must be >= 0");
    }
    switch (kind_) {
        case Kind::linear: return c_ * u;
        case Kind::power: return c_ * std::pow(u, p_);
        case Kind::saturating: return c_ * std::min(u, m_);
    }
    return 0.0;
}

std::optional<double> RateFunction::lipschitz_constant() const {
    if (kind_ == Kind::power && p_ != 1.0) return std::nullopt;
    return c_;
}

double RateFunction::integrability_partial(double x) const {
    if (!(x >= 0.0)) {
        throw std::invalid_argument("integral endpoint must be >= 0");
    }
    switch (kind_) {
        case Kind::linear: return c_ * x;
        case Kind::power: return c_ * std::pow(x, p_) / p_;
        case Kind::saturating:
            if (x <= m_) return c_ * x;
            return c_ * m_ + c_ * m_ * std::log(x / m_);
    }
    return 0.0;
}

double RateFunction::integrability_value() const {
    return integrability_partial(2.0 * r_);
}

std::string RateFunction::kind_name() const {
    switch (kind_) {
        case Kind::linear: return "linear";
        case Kind::power: return "power";
        case Kind::saturating: return "saturating";
    }
    return "?";
}

NetworkParams::NetworkParams(int n, std::vector<double> weights_row_major,
                             double lambda, double alpha, RateFunction phi)
    : n_(n),
      w_(std::move(weights_row_major)),
      lambda_(lambda),
      alpha_(alpha),
      phi_(phi) {
    require(n_ >= 1, "network must have at least one neuron");
    require(w_.size() == static_cast<std::size_t>(n_) * n_,
            "weight matrix must be n*n row-major");
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            double wij = w_[static_cast<std::size_t>(i) * n_ + j];
            require(finite(wij) && wij >= 0.0,
                    "weight[" + std::to_string(i) + "][" + std::to_string(j) +
                        "] must be finite and >= 0");
            if (i == j) {
                require(wij == 0.0, "weight[" + std::to_string(i) + "][" +
                                        std::to_string(i) +
                                        "] must be 0 (no self-coupling)");
            }
        }
    }
    require(finite(lambda_) && lambda_ >= 0.0, "lambda must be >= 0");
    require(finite(alpha_) && alpha_ >= 0.0, "alpha must be >= 0");
}

NetworkParams NetworkParams::with_phi(RateFunction phi) const {
    return NetworkParams(n_, w_, lambda_, alpha_, phi);
}

DerivedConstants derived_constants(const NetworkParams& params) {
    const int n = params.n();
    DerivedConstants d;
    d.out_mass.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            d.out_mass[i] += params.weight(i, j);
        }
        d.out_mass_max = std::max(d.out_mass_max, d.out_mass[i]);
    }
    for (int j = 0; j < n; ++j) {
        double col = 0.0;
        for (int i = 0; i < n; ++i) col += params.weight(i, j);
        d.in_mass_max = std::max(d.in_mass_max, col);
    }
    return d;
}

double default_rate_radius(const NetworkParams& params) {
    double m = derived_constants(params).in_mass_max;
    return m > 0.0 ? 1.01 * m : 1.0;
}

PotentialState flow(const PotentialState& s, const NetworkParams& params,
                    double dt) {
    if (!(dt >= 0.0)) {
        throw std::invalid_argument("flow requires dt >= 0");
    }
    if (dt == 0.0) return s;
    const double ubar = s.mean();
    const double fdev = std::exp(-(params.alpha() + params.lambda()) * dt);
    const double fmean = std::exp(-params.alpha() * dt);
    PotentialState out;
    out.t = s.t + dt;
    out.u.resize(s.u.size());
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        double v = (s.u[i] - ubar) * fdev + ubar * fmean;
        out.u[i] = v < 0.0 ? 0.0 : v;  // guard against rounding
    }
    return out;
}

PotentialState jump(const PotentialState& s, const NetworkParams& params,
                    int neuron) {
    if (neuron < 0 || neuron >= params.n() ||
        params.n() != static_cast<int>(s.u.size())) {
        throw std::invalid_argument("jump neuron index out of range");
    }
    PotentialState out = s;
    for (int j = 0; j < params.n(); ++j) {
        if (j != neuron) out.u[j] += params.weight(neuron, j);
    }
    out.u[neuron] = 0.0;
    return out;
}

CascadeConfig cascade_configs(const NetworkParams& params) {
    const int n = params.n();
    CascadeConfig cc;
    cc.v.assign(n + 1, std::vector<double>(n, 0.0));

    // v[0][i] accumulates the weight i receives from every later neuron;
    // summation runs in ascending sender order everywhere below so that
    // v[n] reproduces v[0] bit for bit.
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = i + 1; j < n; ++j) acc += params.weight(j, i);
        cc.v[0][i] = acc;
    }
    for (int k = 1; k <= n; ++k) {
        for (int i = 0; i < n; ++i) {
            if (i == k - 1) {
                cc.v[k][i] = 0.0;
            } else if (i > k - 1) {
                double acc = cc.v[0][i];
                for (int j = 0; j < k; ++j) acc += params.weight(j, i);
                cc.v[k][i] = acc;
            } else {
                // already fired this round: only senders i+1..k-1 count
                double acc = 0.0;
                for (int j = i + 1; j < k; ++j) acc += params.weight(j, i);
                cc.v[k][i] = acc;
            }
        }
    }

    cc.deviations.assign(n + 1, std::vector<double>(n, 0.0));
    for (int k = 0; k <= n; ++k) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += cc.v[k][i];
        double vbar = acc / n;
        for (int i = 0; i < n; ++i) cc.deviations[k][i] = vbar - cc.v[k][i];
    }
    return cc;
}

}  // namespace pdmp
