#include "pdmp/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace pdmp {

namespace {

// 15-point Kronrod abscissae on [-1, 1] (positive half) and weights, with
// the embedded 7-point Gauss weights on the even-indexed abscissae.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
    double kronrod;
    double err;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    const double fc = f(c);
    double resk = kWgk[7] * fc;
    double resg = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        resk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    return {resk * h, std::fabs((resk - resg) * h)};
}

double integrate_rec(const std::function<double(double)>& f, double a,
                     double b, double tol_abs, double rel_tol, int depth,
                     int max_depth) {
    PanelResult p = gk15(f, a, b);
    const double tol = std::max(tol_abs, rel_tol * std::fabs(p.kronrod));
    if (p.err <= tol || depth >= max_depth) {
        return p.kronrod;
    }
    const double mid = 0.5 * (a + b);
    return integrate_rec(f, a, mid, 0.5 * tol_abs, rel_tol, depth + 1,
                         max_depth) +
           integrate_rec(f, mid, b, 0.5 * tol_abs, rel_tol, depth + 1,
                         max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
    if (!(b >= a)) {
        throw std::invalid_argument("integrate requires b >= a");
    }
    if (a == b) return 0.0;
    return integrate_rec(f, a, b, opts.abs_tol, opts.rel_tol, 0,
                         opts.max_depth);
}

}  // namespace pdmp
