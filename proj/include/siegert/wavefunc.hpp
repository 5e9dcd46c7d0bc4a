#pragma once

// Siegert eigenfunctions of the square well under the unit-outgoing convention
//
//   Phi(x) = e^{iK x}              x >= l
//          = c cos(K'x)  (even)    |x| < l,   c = e^{iKl} / cos(K'l)
//          = c sin(K'x)  (odd)     |x| < l,   c = e^{iKl} / sin(K'l)
//          = +-e^{-iK x}           x <= -l
//
// and finite superpositions Psi(x,t) = sum_n a_n Phi_n(x) e^{-i E_n t}.

#include <cmath>
#include <complex>
#include <sstream>
#include <utility>
#include <vector>

#include "siegert/errors.hpp"
#include "siegert/model.hpp"
#include "siegert/quadrature.hpp"
#include "siegert/siegert_solver.hpp"

namespace siegert {

class EigenFunction {
  public:
    EigenFunction(const SiegertRoot& root, const PotentialSpec& pot)
        : root_(root),
          kp_(dispersion_inner(root.k, pot)),
          l_(pot.half_width),
          sign_(parity_sign(root.parity)) {
        const cplx edge = std::exp(I * root.k * l_);
        // The odd inner function is carried as sin(K'x)/K' so that K' = 0 is regular.
        const cplx at_edge = root.parity == Parity::Even ? std::cos(kp_ * l_)
                                                         : detail::sinc_scaled(kp_, l_);
        if (std::abs(at_edge) == 0.0)
            throw PreconditionError("EigenFunction: inner function vanishes at the well edge");
        inner_ = edge / at_edge;
    }

    [[nodiscard]] const SiegertRoot& root() const noexcept { return root_; }
    [[nodiscard]] cplx inner_wave_number() const noexcept { return kp_; }
    [[nodiscard]] cplx inner_amplitude() const noexcept { return inner_; }
    [[nodiscard]] double half_width() const noexcept { return l_; }

    [[nodiscard]] cplx value(double x) const {
        const double ax = std::abs(x);
        const double s = x < 0.0 ? sign_ : 1.0;
        if (ax >= l_) return s * std::exp(I * root_.k * ax);
        if (root_.parity == Parity::Even) return inner_ * std::cos(kp_ * ax);
        return s * inner_ * detail::sinc_scaled(kp_, ax);
    }

    [[nodiscard]] cplx derivative(double x) const {
        const double ax = std::abs(x);
        // d/dx of an even function is odd and vice versa.
        const double s = x < 0.0 ? -sign_ : 1.0;
        if (ax >= l_) return s * I * root_.k * std::exp(I * root_.k * ax);
        if (root_.parity == Parity::Even) return -s * inner_ * kp_ * std::sin(kp_ * ax);
        return s * inner_ * std::cos(kp_ * ax);
    }

    [[nodiscard]] cplx second_derivative(double x) const {
        const cplx w = std::abs(x) >= l_ ? root_.k : kp_;
        return -w * w * value(x);
    }

  private:
    SiegertRoot root_;
    cplx kp_;
    double l_;
    double sign_;
    cplx inner_;
};

struct WaveTerm {
    cplx coeff;
    EigenFunction fn;
};

class WaveState {
  public:
    WaveState(std::vector<WaveTerm> terms, const PotentialSpec& pot)
        : terms_(std::move(terms)), pot_(pot) {
        if (terms_.empty()) throw PreconditionError("WaveState: need at least one term");
        for (const auto& t : terms_)
            if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag()))
                throw PreconditionError("WaveState: coefficients must be finite");
    }

    static WaveState pure(const SiegertRoot& root, const PotentialSpec& pot, cplx a = 1.0) {
        return WaveState({WaveTerm{a, EigenFunction(root, pot)}}, pot);
    }

    static WaveState superposition(const std::vector<std::pair<cplx, SiegertRoot>>& parts,
                                   const PotentialSpec& pot) {
        std::vector<WaveTerm> terms;
        terms.reserve(parts.size());
        for (const auto& [a, r] : parts) terms.push_back({a, EigenFunction(r, pot)});
        return WaveState(std::move(terms), pot);
    }

    [[nodiscard]] const std::vector<WaveTerm>& terms() const noexcept { return terms_; }
    [[nodiscard]] const PotentialSpec& potential() const noexcept { return pot_; }

    [[nodiscard]] cplx value(double x, double t) const {
        cplx sum = 0.0;
        for (const auto& term : terms_) sum += term.coeff * time_factor(term, t) * term.fn.value(x);
        return sum;
    }

    [[nodiscard]] cplx derivative(double x, double t) const {
        cplx sum = 0.0;
        for (const auto& term : terms_)
            sum += term.coeff * time_factor(term, t) * term.fn.derivative(x);
        return sum;
    }

    [[nodiscard]] cplx second_derivative(double x, double t) const {
        cplx sum = 0.0;
        for (const auto& term : terms_)
            sum += term.coeff * time_factor(term, t) * term.fn.second_derivative(x);
        return sum;
    }

    /// Sum of the squared moduli of the individual terms: the density without
    /// interference, used as the local scale when detecting density nodes.
    [[nodiscard]] double incoherent_density(double x, double t) const {
        double sum = 0.0;
        for (const auto& term : terms_) sum += std::norm(term.coeff * time_factor(term, t) * term.fn.value(x));
        return sum;
    }

  private:
    static cplx time_factor(const WaveTerm& term, double t) {
        return std::exp(-I * term.fn.root().energy * t);
    }

    std::vector<WaveTerm> terms_;
    PotentialSpec pot_;
};

struct Interval {
    double lo;
    double hi;
};

[[nodiscard]] inline cplx eval(const WaveState& s, double x, double t) { return s.value(x, t); }

[[nodiscard]] inline cplx eval_deriv(const WaveState& s, double x, double t) {
    return s.derivative(x, t);
}

[[nodiscard]] inline double density(const WaveState& s, double x, double t) {
    return std::norm(s.value(x, t));
}

/// Probability current j = (1/m) Re[Psi* (-i) Psi'] = 2 Im(Psi* Psi').
[[nodiscard]] inline double current(const WaveState& s, double x, double t) {
    return ReducedUnits::speed_factor * std::imag(std::conj(s.value(x, t)) * s.derivative(x, t));
}

/// Integral of |Psi(x,t)|^2 over the interval, split at the well edges.
[[nodiscard]] inline double norm_over(const WaveState& s, Interval iv, double t,
                                      const QuadSpec& quad = {}) {
    if (!(iv.lo <= iv.hi)) throw PreconditionError("norm_over: need lo <= hi");
    const double l = s.potential().half_width;
    return integrate_piecewise([&](double x) { return density(s, x, t); }, iv.lo, iv.hi, {-l, l},
                               quad);
}

/// Exact integral of |Psi|^2 over an interval lying entirely outside the well,
/// from the exponential antiderivative of each pair of outer plane waves.
[[nodiscard]] inline double outer_norm_closed_form(const WaveState& s, Interval iv, double t) {
    const double l = s.potential().half_width;
    const bool right = iv.lo >= l;
    const bool left = iv.hi <= -l;
    if (!(iv.lo <= iv.hi) || !(right || left))
        throw PreconditionError("outer_norm_closed_form: interval must lie outside the well");
    const double dir = right ? 1.0 : -1.0;
    const auto& terms = s.terms();
    cplx sum = 0.0;
    for (const auto& tn : terms) {
        const auto& rn = tn.fn.root();
        const cplx an = tn.coeff * std::exp(-I * rn.energy * t) * (right ? 1.0 : parity_sign(rn.parity));
        for (const auto& tm : terms) {
            const auto& rm = tm.fn.root();
            const cplx am =
                tm.coeff * std::exp(-I * rm.energy * t) * (right ? 1.0 : parity_sign(rm.parity));
            // integrand e^{i q x} with q = dir (K_m - conj K_n)
            const cplx q = dir * (rm.k - std::conj(rn.k));
            const double w = iv.hi - iv.lo;
            cplx integral;
            if (std::abs(q * w) < 1e-6) {
                const cplx z = I * q * w;
                integral = std::exp(I * q * iv.lo) * w * (1.0 + z / 2.0 + z * z / 6.0);
            } else {
                integral = (std::exp(I * q * iv.hi) - std::exp(I * q * iv.lo)) / (I * q);
            }
            sum += std::conj(an) * am * integral;
        }
    }
    return sum.real();
}

}  // namespace siegert
