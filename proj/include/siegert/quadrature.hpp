#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "siegert/errors.hpp"

namespace siegert {

struct QuadSpec {
    double rel_tol = 1e-10;
    unsigned max_depth = 20;
};

/// Adaptive 15-point Gauss-Kronrod over [a, b]; the integrand must be smooth there.
/// Real or complex integrands; for complex ones the tolerance is relative to int |f|.
template <class F>
auto integrate_panel(F&& f, double a, double b, const QuadSpec& q) -> decltype(f(a)) {
    using R = decltype(f(a));
    if (a == b) return R{};
    double err = 0.0;
    double l1 = 0.0;
    // Boost applies the tolerance per leaf, so the summed estimate can land just
    // above it; ask for a margin and check the caller's bound on the total.
    const R r = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, q.max_depth, 0.25 * q.rel_tol, &err, &l1);
    if (!std::isfinite(std::abs(r)) || err > q.rel_tol * std::max(l1, 1e-300)) {
        std::ostringstream os;
        os << "quadrature over [" << a << ", " << b << "] stopped at error estimate " << err
           << " > " << q.rel_tol << " * " << l1;
        throw QuadratureError(os.str());
    }
    return r;
}

/// Integral over [a, b] split at every breakpoint strictly inside the interval.
template <class F>
auto integrate_piecewise(F&& f, double a, double b, std::vector<double> breaks,
                         const QuadSpec& q) -> decltype(f(a)) {
    using R = decltype(f(a));
    if (a == b) return R{};
    std::sort(breaks.begin(), breaks.end());
    R sum{};
    double lo = a;
    for (double x : breaks) {
        if (x > lo && x < b) {
            sum += integrate_panel(f, lo, x, q);
            lo = x;
        }
    }
    return sum + integrate_panel(f, lo, b, q);
}

}  // namespace siegert
