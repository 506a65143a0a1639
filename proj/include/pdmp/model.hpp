#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pdmp {

// Vector of membrane potentials at a point in time. Coordinates are
// non-negative; t is the absolute time the vector refers to.
struct PotentialState {
    std::vector<double> u;
    double t = 0.0;

    int size() const { return static_cast<int>(u.size()); }
    double mean() const;
    double max() const;
};

// Throws std::invalid_argument unless every coordinate is finite and >= 0.
void validate_state(const PotentialState& s);

// Firing intensity of a single neuron as a function of its potential.
// All supported shapes vanish at zero, are non-decreasing, and keep
// phi(u)/u integrable near the origin.
class RateFunction {
  public:
    enum class Kind { linear, power, saturating };

    static RateFunction linear(double c, double r);
    static RateFunction power(double c, double p, double r);
    static RateFunction saturating(double c, double saturation, double r);

    double operator()(double u) const;

    Kind kind() const { return kind_; }
    double c() const { return c_; }
    double exponent() const { return p_; }
    double saturation() const { return m_; }
    double radius() const { return r_; }

    RateFunction with_radius(double r) const;

    // Global Lipschitz constant when one exists (linear, saturating, and
    // the power shape with exponent exactly 1).
    std::optional<double> lipschitz_constant() const;

    // Integral of phi(u)/u over (0, 2r], evaluated in closed form.
    double integrability_value() const;

    // Integral of phi(u)/u over (0, x]. Used for truncation-tail bounds.
    double integrability_partial(double x) const;

    std::string kind_name() const;

  private:
    RateFunction(Kind kind, double c, double p, double m, double r);

    Kind kind_;
    double c_;
    double p_;
    double m_;
    double r_;
};

// Network size, coupling weights, relaxation rates, and the firing rate
// shape. weight(i, j) is the amount added to neuron j when neuron i fires;
// the matrix is stored row-major with a zero diagonal.
class NetworkParams {
  public:
    NetworkParams(int n, std::vector<double> weights_row_major, double lambda,
                  double alpha, RateFunction phi);

    int n() const { return n_; }
    double lambda() const { return lambda_; }
    double alpha() const { return alpha_; }
    const RateFunction& phi() const { return phi_; }
    const std::vector<double>& weights() const { return w_; }

    double weight(int from, int to) const {
        return w_[static_cast<std::size_t>(from) * n_ + to];
    }

    NetworkParams with_phi(RateFunction phi) const;

  private:
    int n_;
    std::vector<double> w_;
    double lambda_;
    double alpha_;
    RateFunction phi_;
};

// Aggregates of the weight matrix used by bounds and diagnostics.
// in_mass_max is the largest column sum (total weight received by one
// neuron); out_mass[i] is the row sum (total weight neuron i sends).
struct DerivedConstants {
    double in_mass_max = 0.0;
    std::vector<double> out_mass;
    double out_mass_max = 0.0;
};

DerivedConstants derived_constants(const NetworkParams& params);

// Radius strictly above the largest column sum, suitable as a default for
// RateFunction::radius when that hypothesis is wanted. Falls back to 1
// when the weight matrix is all zero.
double default_rate_radius(const NetworkParams& params);

// Deterministic relaxation for dt time units. Each coordinate contracts
// toward the instantaneous mean at rate alpha + lambda while the mean
// itself decays at rate alpha.
PotentialState flow(const PotentialState& s, const NetworkParams& params,
                    double dt);

// Effect of neuron `neuron` firing: its potential resets to zero and every
// other neuron j gains weight(neuron, j). Time is unchanged.
PotentialState jump(const PotentialState& s, const NetworkParams& params,
                    int neuron);

// States visited by the round-robin firing sequence 0, 1, ..., n-1 when
// started from the configuration that the sequence maps back onto itself:
// v[0] holds that configuration and v[k] is the state after the first k
// firings, with v[n] == v[0] exactly. deviations[k][i] is mean(v[k]) - v[k][i].
struct CascadeConfig {
    std::vector<std::vector<double>> v;
    std::vector<std::vector<double>> deviations;
};

CascadeConfig cascade_configs(const NetworkParams& params);

}  // namespace pdmp
