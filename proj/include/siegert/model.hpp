#pragma once

// Reduced units used throughout the library:
//   hbar = 1, 2m = 1, l = 1
//   lengths in l, wave numbers in 1/l, energies in hbar^2/(2 m l^2), times in 2 m l^2/hbar.
// Hence E = K^2 and a plane wave e^{iKx} moves at hbar Re K / m = 2 Re K.

#include <cmath>
#include <complex>
#include <sstream>
#include <string_view>

#include "siegert/errors.hpp"

namespace siegert {

using cplx = std::complex<double>;

inline constexpr cplx I{0.0, 1.0};

struct ReducedUnits {
    static constexpr double hbar = 1.0;
    static constexpr double mass = 0.5;
    static constexpr double half_width = 1.0;
    /// hbar / m, the prefactor turning Re K into a speed.
    static constexpr double speed_factor = hbar / mass;
    /// hbar / (2m), the prefactor of the boundary term in Im<H>.
    static constexpr double leak_factor = hbar / (2.0 * mass);
};

/// Symmetric square well: V(x) = -depth for |x| < half_width, 0 otherwise.
struct PotentialSpec {
    double depth = 1.0;
    double half_width = ReducedUnits::half_width;

    PotentialSpec() = default;
    PotentialSpec(double v0, double l = ReducedUnits::half_width) : depth(v0), half_width(l) {
        if (!(v0 >= 0.0) || !std::isfinite(v0))
            throw PreconditionError("PotentialSpec: depth must be finite and >= 0");
        if (!(l > 0.0) || !std::isfinite(l))
            throw PreconditionError("PotentialSpec: half_width must be finite and > 0");
    }

    [[nodiscard]] double operator()(double x) const noexcept {
        return std::abs(x) < half_width ? -depth : 0.0;
    }
};

enum class Parity { Even, Odd };

/// Spectral class of a Siegert root by its position in the complex K plane.
/// `Virtual` covers the negative imaginary axis (anti-bound states).
enum class StateClass { Bound, Resonant, AntiResonant, Virtual };

constexpr std::string_view to_string(Parity p) noexcept {
    return p == Parity::Even ? "even" : "odd";
}

constexpr std::string_view to_string(StateClass c) noexcept {
    switch (c) {
        case StateClass::Bound: return "bound";
        case StateClass::Resonant: return "resonant";
        case StateClass::AntiResonant: return "anti-resonant";
        case StateClass::Virtual: return "virtual";
    }
    return "?";
}

/// Sign of the left outer branch relative to the right one: +1 even, -1 odd.
constexpr double parity_sign(Parity p) noexcept { return p == Parity::Even ? 1.0 : -1.0; }

/// Inner wave number K' with K'^2 = K^2 + V0 (principal branch). Every downstream
/// use is even in K', so the branch choice does not matter.
[[nodiscard]] inline cplx dispersion_inner(cplx k, const PotentialSpec& pot) {
    return std::sqrt(k * k + pot.depth);
}

[[nodiscard]] inline cplx energy_of(cplx k) noexcept { return k * k; }

/// Tolerance used to decide that a root sits on the imaginary axis.
[[nodiscard]] inline double axis_tolerance(cplx k) noexcept {
    return 1e-9 * std::max(1.0, std::abs(k));
}

[[nodiscard]] inline StateClass classify(cplx k) {
    const double tol = axis_tolerance(k);
    const bool on_axis = std::abs(k.real()) <= tol;
    if (on_axis && k.imag() > tol) return StateClass::Bound;
    if (on_axis && k.imag() < -tol) return StateClass::Virtual;
    if (!on_axis && k.imag() < 0.0) {
        return k.real() > 0.0 ? StateClass::Resonant : StateClass::AntiResonant;
    }
    std::ostringstream os;
    os << "classify: K = " << k << " is not a possible Siegert root of the square well";
    throw InconsistentRootError(os.str());
}

}  // namespace siegert
