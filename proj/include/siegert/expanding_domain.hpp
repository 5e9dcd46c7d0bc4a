#pragma once

// Particle-number bookkeeping over an expanding window Omega(t) = [-L(t), L(t)].
//
// With rho = |Psi|^2 and j = 2 Im(Psi* Psi'), moving both edges at speed Ldot gives
//
//   dN/dt = -(j(L) - j(-L)) + Ldot (rho(L) + rho(-L)).
//
// A pure resonance conserves N for Ldot = 2 Re K. For general states the edge
// speed is the local fleeing speed vbar(x) = j / rho taken at x = +L
// (PaperSingleEdge) or the two-edge balance that cancels dN/dt exactly
// (TwoEdgeExact). Both agree whenever rho is even and j odd.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <string_view>
#include <vector>

#include "siegert/errors.hpp"
#include "siegert/model.hpp"
#include "siegert/quadrature.hpp"
#include "siegert/siegert_solver.hpp"
#include "siegert/wavefunc.hpp"

namespace siegert {

enum class DomainMode { PaperSingleEdge, TwoEdgeExact };

constexpr std::string_view to_string(DomainMode m) noexcept {
    return m == DomainMode::PaperSingleEdge ? "paper" : "two-edge";
}

struct FleeingSpeed {
    double value;
    /// Anti-resonant roots have Re K < 0: the window shrinks.
    bool shrinking;
};

[[nodiscard]] inline FleeingSpeed fleeing_speed_pure(const SiegertRoot& root) {
    const double v = ReducedUnits::speed_factor * root.k.real();
    return {v, v < 0.0};
}

/// L(t) = v t + L0 for a pure state.
[[nodiscard]] inline double linear_domain(const SiegertRoot& root, double L0, double t) {
    return fleeing_speed_pure(root).value * t + L0;
}

/// The two factors of the pure-state norm derivative that vanish separately:
/// the speed mismatch (Ldot - hbar Re K / m) and the growth rate of the edge
/// density along L(t), d/dt [-2 Im(K L(t) - E t)] / 2 = -(Im K Ldot - Im E).
struct PureCancellation {
    double speed_mismatch;
    double exponent_rate;
};

[[nodiscard]] inline PureCancellation pure_state_cancellation(const SiegertRoot& root,
                                                              double ldot) {
    return {ldot - ReducedUnits::speed_factor * root.k.real(),
            root.k.imag() * ldot - root.energy.imag()};
}

/// Fleeing speed vbar(x) = j(x) / rho(x).
[[nodiscard]] inline double vbar(const WaveState& s, double x, double t) {
    const double rho = density(s, x, t);
    if (!(rho > 1e-300)) {
        std::ostringstream os;
        os << "vbar: density vanishes at x = " << x << ", t = " << t;
        throw SingularNodeError(os.str(), x);
    }
    return current(s, x, t) / rho;
}

/// Phases of a two-term superposition at the edge L:
///   Delta = (E1 - E2) t - (K1 - K2) L,  Theta = Re Delta - (arg a1 - arg a2).
struct PhaseFunctions {
    cplx delta;
    double theta;
};

[[nodiscard]] inline PhaseFunctions phase_functions(cplx a1, cplx a2, const SiegertRoot& r1,
                                                    const SiegertRoot& r2, double L, double t) {
    const cplx delta = (r1.energy - r2.energy) * t / ReducedUnits::hbar - (r1.k - r2.k) * L;
    return {delta, delta.real() - (std::arg(a1) - std::arg(a2))};
}

/// Closed-form edge speed of a1 Phi_1 + a2 Phi_2 at x = L >= l, written with the
/// weights |a1|^2 e^{Im Delta}, |a2|^2 e^{-Im Delta} and the cross term in Theta.
[[nodiscard]] inline double rhs_two_state(cplx a1, cplx a2, const SiegertRoot& r1,
                                          const SiegertRoot& r2, double L, double t,
                                          double l = ReducedUnits::half_width) {
    if (!(L >= l)) throw PreconditionError("rhs_two_state: the closed form needs L >= l");
    const auto ph = phase_functions(a1, a2, r1, r2, L, t);
    const double w1 = std::norm(a1) * std::exp(ph.delta.imag());
    const double w2 = std::norm(a2) * std::exp(-ph.delta.imag());
    const double cross = std::abs(a1 * a2);
    const double c = std::cos(ph.theta);
    const double sn = std::sin(ph.theta);
    const double den = w1 + w2 + 2.0 * cross * c;
    if (!(std::abs(den) > 1e-12 * (w1 + w2))) {
        std::ostringstream os;
        os << "rhs_two_state: density node at L = " << L << ", t = " << t;
        throw SingularNodeError(os.str(), L);
    }
    const double num = w1 * r1.k.real() + w2 * r2.k.real() +
                       cross * ((r1.k + r2.k).real() * c + (r1.k - r2.k).imag() * sn);
    return ReducedUnits::speed_factor * num / den;
}

/// Edge speed of the chosen mode. Halts with SingularNodeError when the
/// relevant density falls below 1e-12 of its interference-free scale.
[[nodiscard]] inline double domain_speed(const WaveState& s, double L, double t, DomainMode mode) {
    auto node = [&](double at) {
        std::ostringstream os;
        os << "domain edge met a density node at L = " << at << ", t = " << t;
        throw SingularNodeError(os.str(), at);
    };
    if (mode == DomainMode::PaperSingleEdge) {
        if (density(s, L, t) < 1e-12 * s.incoherent_density(L, t)) node(L);
        return vbar(s, L, t);
    }
    const double rho = density(s, L, t) + density(s, -L, t);
    if (rho < 1e-12 * (s.incoherent_density(L, t) + s.incoherent_density(-L, t))) node(L);
    return (current(s, L, t) - current(s, -L, t)) / rho;
}

struct DomainSample {
    double t;
    double half_width;
    double speed;
    double norm;
};

struct DomainTrajectory {
    std::vector<DomainSample> samples;
    std::string_view method = "rk4";
    double step = 0.0;
    /// Largest relative difference in L between the run and its half-step rerun.
    double halving_rel_diff = 0.0;
};

struct PathPoint {
    double t;
    double y;
};

/// Classical fourth-order Runge-Kutta for y' = f(y, t) with a fixed step.
template <class Rhs>
std::vector<PathPoint> rk4_path(Rhs&& f, double y0, double t_end, std::size_t n_steps) {
    std::vector<PathPoint> path;
    path.reserve(n_steps + 1);
    const double h = t_end / static_cast<double>(n_steps);
    double y = y0;
    path.push_back({0.0, y});
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = h * static_cast<double>(i);
        const double k1 = f(y, t);
        const double k2 = f(y + 0.5 * h * k1, t + 0.5 * h);
        const double k3 = f(y + 0.5 * h * k2, t + 0.5 * h);
        const double k4 = f(y + h * k3, t + h);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        path.push_back({h * static_cast<double>(i + 1), y});
    }
    return path;
}

/// Integrates Ldot = speed(L, t) from L0 with RK4, validates by step halving,
/// and samples N(t) over [-L(t), L(t)] by quadrature at every step.
template <class Speed>
DomainTrajectory integrate_speed_law(Speed&& speed, const WaveState& s, double L0, double t_end,
                                     double step, const QuadSpec& quad = {},
                                     double halving_tol = 1e-8) {
    if (!(step > 0.0) || !(t_end > 0.0))
        throw PreconditionError("integrate_domain: need step > 0 and t_end > 0");
    if (!(L0 >= s.potential().half_width))
        throw PreconditionError("integrate_domain: need L0 >= l");
    const auto n = static_cast<std::size_t>(std::ceil(t_end / step - 1e-9));
    auto f = [&](double L, double t) { return speed(L, t); };
    const auto coarse = rk4_path(f, L0, t_end, n);
    const auto fine = rk4_path(f, L0, t_end, 2 * n);

    DomainTrajectory traj;
    traj.step = t_end / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
        const double diff = std::abs(coarse[i].y - fine[2 * i].y) / std::abs(fine[2 * i].y);
        traj.halving_rel_diff = std::max(traj.halving_rel_diff, diff);
    }
    if (traj.halving_rel_diff > halving_tol) {
        std::ostringstream os;
        os << "integrate_domain: step halving changes L by " << traj.halving_rel_diff
           << " (relative) > " << halving_tol << "; use a smaller step than " << traj.step;
        throw AccuracyError(os.str());
    }
    traj.samples.reserve(n + 1);
    for (const auto& p : coarse) {
        traj.samples.push_back(
            {p.t, p.y, speed(p.y, p.t), norm_over(s, {-p.y, p.y}, p.t, quad)});
    }
    return traj;
}

[[nodiscard]] inline DomainTrajectory integrate_domain(const WaveState& s, double L0,
                                                       double t_end, double step = 1e-3,
                                                       DomainMode mode = DomainMode::TwoEdgeExact,
                                                       const QuadSpec& quad = {}) {
    return integrate_speed_law(
        [&](double L, double t) { return domain_speed(s, L, t, mode); }, s, L0, t_end, step,
        quad);
}

/// Trajectory with a prescribed edge L(t) = L0 + speed t (speed 0 freezes the window).
[[nodiscard]] inline DomainTrajectory prescribed_domain(const WaveState& s, double L0,
                                                        double speed, double t_end, double step,
                                                        const QuadSpec& quad = {}) {
    if (!(step > 0.0) || !(t_end > 0.0))
        throw PreconditionError("prescribed_domain: need step > 0 and t_end > 0");
    const auto n = static_cast<std::size_t>(std::ceil(t_end / step - 1e-9));
    DomainTrajectory traj;
    traj.method = "prescribed";
    traj.step = t_end / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = traj.step * static_cast<double>(i);
        const double L = L0 + speed * t;
        traj.samples.push_back({t, L, speed, norm_over(s, {-L, L}, t, quad)});
    }
    return traj;
}

struct BalanceSample {
    double t;
    /// -(1/m) Re<p_n> over both moving edges: what leaks through them.
    double flux_term;
    /// Ldot (rho(L) + rho(-L)): what the moving edges sweep in.
    double measure_term;
    double rel_drift;
};

struct ConservationReport {
    double max_rel_drift = 0.0;
    double rms_rel_drift = 0.0;
    std::vector<BalanceSample> balance;
};

/// Audits a trajectory: recomputes N(t) with `quad` and decomposes dN/dt into
/// the flux and moving-edge terms at every sample.
[[nodiscard]] inline ConservationReport conservation_report(const WaveState& s,
                                                            const DomainTrajectory& traj,
                                                            const QuadSpec& quad = {}) {
    if (traj.samples.empty()) throw PreconditionError("conservation_report: empty trajectory");
    ConservationReport rep;
    const auto& first = traj.samples.front();
    const double n0 = norm_over(s, {-first.half_width, first.half_width}, first.t, quad);
    double sq = 0.0;
    for (const auto& smp : traj.samples) {
        const double L = smp.half_width;
        const double n = norm_over(s, {-L, L}, smp.t, quad);
        const double drift = std::abs(n - n0) / n0;
        const double flux = -(current(s, L, smp.t) - current(s, -L, smp.t));
        const double measure = smp.speed * (density(s, L, smp.t) + density(s, -L, smp.t));
        rep.balance.push_back({smp.t, flux, measure, drift});
        rep.max_rel_drift = std::max(rep.max_rel_drift, drift);
        sq += drift * drift;
    }
    rep.rms_rel_drift = std::sqrt(sq / static_cast<double>(traj.samples.size()));
    return rep;
}

}  // namespace siegert
