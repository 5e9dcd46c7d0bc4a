#pragma once

// Numerical checks that the non-Hermiticity of the open square well is the
// momentum leak through the edges of Omega = [-L, L]:
//
//   Im <Psi|H|Psi>_Omega = -(hbar/2m) Re <Psi|p_n|Psi>_dOmega        (leak identity)
//   d/dt <Psi|Psi>_Omega = -(1/m) Re <Psi|p_n|Psi>_dOmega            (decay identity)
//   Im E = (hbar^2/m) Re K Im K                                       (dispersion)
//
// In reduced units hbar/2m = 1, 1/m = 2 and hbar^2/m = 2.

#include <algorithm>
#include <cmath>
#include <string_view>

#include "siegert/model.hpp"
#include "siegert/wavefunc.hpp"

namespace siegert {

enum class Identity { Leak, Decay, Dispersion };

constexpr std::string_view to_string(Identity id) noexcept {
    switch (id) {
        case Identity::Leak: return "Im<H> = -(hbar/2m) Re<p_n>";
        case Identity::Decay: return "dN/dt = -(1/m) Re<p_n>";
        case Identity::Dispersion: return "Im E = (hbar^2/m) Re K Im K";
    }
    return "?";
}

struct LeakReport {
    Identity identity;
    double half_width = 0.0;  // L; zero for the dispersion check
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0;
    /// Reduced-unit prefactor multiplying the boundary / dispersion term on the rhs.
    double prefactor = 1.0;

    [[nodiscard]] bool passes(double rel_tol) const noexcept { return rel_error < rel_tol; }
    [[nodiscard]] bool passes(double rel_tol, double abs_tol) const noexcept {
        return rel_error < rel_tol || abs_error < abs_tol;
    }
};

[[nodiscard]] inline LeakReport make_report(Identity id, double L, double lhs, double rhs,
                                            double prefactor) {
    LeakReport r{id, L, lhs, rhs, std::abs(lhs - rhs), 0.0, prefactor};
    r.rel_error = r.abs_error / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return r;
}

namespace detail {
inline void require_outside_well(const WaveState& s, double L, const char* who) {
    if (!(L > s.potential().half_width))
        throw PreconditionError(std::string(who) + ": need L > l (edges outside the potential)");
}

}  // namespace detail

/// <Psi|H|Psi> over [-L, L] with H Psi = -Psi'' + V Psi evaluated piecewise.
[[nodiscard]] inline cplx hamiltonian_expectation(const WaveState& s, double L, double t,
                                                  const QuadSpec& quad = {}) {
    detail::require_outside_well(s, L, "hamiltonian_expectation");
    const auto& pot = s.potential();
    return integrate_piecewise(
        [&](double x) {
            const cplx psi = s.value(x, t);
            return std::conj(psi) * (-s.second_derivative(x, t) + pot(x) * psi);
        },
        -L, L, {-pot.half_width, pot.half_width}, quad);
}

/// Quadratic form of H over [-L, L] after one integration by parts:
/// int |Psi'|^2 + V |Psi|^2 - [Psi* Psi']_{-L}^{L}. Agrees with
/// hamiltonian_expectation for eigenfunctions; for a trial function with a
/// derivative kink at the well edge the kink contributes here and not there.
[[nodiscard]] inline cplx quadratic_form_expectation(const WaveState& s, double L, double t,
                                                     const QuadSpec& quad = {}) {
    detail::require_outside_well(s, L, "quadratic_form_expectation");
    const auto& pot = s.potential();
    const double bulk = integrate_piecewise(
        [&](double x) { return std::norm(s.derivative(x, t)) + pot(x) * density(s, x, t); }, -L,
        L, {-pot.half_width, pot.half_width}, quad);
    const cplx edge = std::conj(s.value(L, t)) * s.derivative(L, t) -
                      std::conj(s.value(-L, t)) * s.derivative(-L, t);
    return bulk - edge;
}

/// Energy measured from the wave function itself: quadratic form / norm.
[[nodiscard]] inline cplx rayleigh_energy(const WaveState& s, double L, double t,
                                          const QuadSpec& quad = {}) {
    return quadratic_form_expectation(s, L, t, quad) / norm_over(s, {-L, L}, t, quad);
}

/// Re <Psi|p_n|Psi> summed over both edges with the outward normal
/// (p_n = p at x = L, -p at x = -L), hbar = 1.
[[nodiscard]] inline double boundary_momentum_leak(const WaveState& s, double L, double t) {
    detail::require_outside_well(s, L, "boundary_momentum_leak");
    auto p_expect = [&](double x) {
        return std::real(std::conj(s.value(x, t)) * (-I) * s.derivative(x, t));
    };
    return p_expect(L) - p_expect(-L);
}

[[nodiscard]] inline LeakReport check_leak_identity(const WaveState& s, double L, double t,
                                                   const QuadSpec& quad = {}) {
    const double lhs = hamiltonian_expectation(s, L, t, quad).imag();
    const double pref = ReducedUnits::leak_factor;
    return make_report(Identity::Leak, L, lhs, -pref * boundary_momentum_leak(s, L, t), pref);
}

/// Time derivative of the norm over the fixed window [-L, L]: central
/// differences at dt and dt/2 combined by Richardson extrapolation.
[[nodiscard]] inline double norm_time_derivative(const WaveState& s, double L, double t,
                                                 double dt, const QuadSpec& quad = {}) {
    if (!(dt > 0.0)) throw PreconditionError("norm_time_derivative: dt must be > 0");
    auto n = [&](double tt) { return norm_over(s, {-L, L}, tt, quad); };
    const double d1 = (n(t + dt) - n(t - dt)) / (2.0 * dt);
    const double d2 = (n(t + dt / 2) - n(t - dt / 2)) / dt;
    return (4.0 * d2 - d1) / 3.0;
}

[[nodiscard]] inline LeakReport check_decay_identity(const WaveState& s, double L,
                                                   const QuadSpec& quad, double t,
                                                   double dt = 1e-4) {
    detail::require_outside_well(s, L, "check_decay_identity");
    const double lhs = norm_time_derivative(s, L, t, dt, quad);
    const double pref = 1.0 / ReducedUnits::mass;
    return make_report(Identity::Decay, L, lhs, -pref * boundary_momentum_leak(s, L, t), pref);
}

/// d/dt N = (2/hbar) Im <H>: the decay identity and the leak identity together.
[[nodiscard]] inline LeakReport check_norm_rate_identity(const WaveState& s, double L,
                                                   const QuadSpec& quad, double t,
                                                   double dt = 1e-4) {
    detail::require_outside_well(s, L, "check_norm_rate_identity");
    const double lhs = norm_time_derivative(s, L, t, dt, quad);
    const double pref = 2.0 / ReducedUnits::hbar;
    return make_report(Identity::Decay, L, lhs,
                       pref * hamiltonian_expectation(s, L, t, quad).imag(), pref);
}

[[nodiscard]] inline LeakReport check_dispersion_identity(const SiegertRoot& root) {
    const double pref = ReducedUnits::hbar * ReducedUnits::hbar / ReducedUnits::mass;
    return make_report(Identity::Dispersion, 0.0, root.energy.imag(),
                       pref * root.k.real() * root.k.imag(), pref);
}

}  // namespace siegert
