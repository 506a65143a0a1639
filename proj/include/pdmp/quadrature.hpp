#pragma once

#include <functional>

namespace pdmp {

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_depth = 48;
};

// Adaptive Gauss-Kronrod integration of f over [a, b]. Each panel is
// evaluated with the 15-point Kronrod rule; the embedded 7-point Gauss
// result supplies the error estimate and panels are bisected until the
// estimate falls under the tolerance assigned to them.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

}  // namespace pdmp
