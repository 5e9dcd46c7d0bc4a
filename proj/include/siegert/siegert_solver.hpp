#pragma once

// Siegert roots of the square well: complex K with purely outgoing waves outside
// the well. Each parity sector gives one transcendental equation
//
//   even:  K = i K' tan(K' l)      odd:  K = -i K' cot(K' l)      K'^2 = K^2 + V0
//
// which we solve as zeros of the residuals f_even = K - i K' tan(K' l) and
// f_odd = K + i K' cot(K' l).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "siegert/errors.hpp"
#include "siegert/model.hpp"

namespace siegert {

struct SiegertRoot {
    cplx k;
    cplx energy;
    Parity parity = Parity::Even;
    StateClass state_class = StateClass::Resonant;
    double residual = 0.0;
};

/// Closed rectangle [re_min, re_max] x [im_min, im_max] of the K plane plus the
/// number of pre-scan cells per axis.
struct ScanRegion {
    double re_min = 0.1;
    double re_max = 6.0;
    double im_min = -3.0;
    double im_max = -0.1;
    int resolution = 16;

    void validate() const {
        if (!(re_min < re_max) || !(im_min < im_max))
            throw PreconditionError("ScanRegion: need re_min < re_max and im_min < im_max");
        if (resolution < 2) throw PreconditionError("ScanRegion: resolution must be >= 2");
    }

    [[nodiscard]] ScanRegion mirrored() const {
        return {-re_max, -re_min, im_min, im_max, resolution};
    }
};

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 60;
    /// Newton steps longer than this are shortened (reduced units, 1/l).
    double max_step = 1.0;
    /// Quad-tree refinement depth below a pre-scan cell.
    int max_depth = 6;
    /// Roots closer than this are the same root.
    double merge_distance = 1e-6;
};

namespace detail {

inline constexpr double pole_guard = 1e-12;

// tan z = i (1 - w)/(1 + w), w = e^{2iz}, with the exponent chosen so |w| <= 1.
// `pole_dist` approximates the distance of z to the nearest pole.
inline cplx tan_exp(cplx z, double& pole_dist) {
    if (z.imag() >= 0.0) {
        const cplx w = std::exp(2.0 * I * z);
        pole_dist = std::abs(1.0 + w) / 2.0;
        return I * (1.0 - w) / (1.0 + w);
    }
    const cplx u = std::exp(-2.0 * I * z);
    pole_dist = std::abs(1.0 + u) / 2.0;
    return -I * (1.0 - u) / (1.0 + u);
}

inline cplx cot_exp(cplx z, double& pole_dist) {
    if (z.imag() >= 0.0) {
        const cplx w = std::exp(2.0 * I * z);
        pole_dist = std::abs(1.0 - w) / 2.0;
        return -I * (1.0 + w) / (1.0 - w);
    }
    const cplx u = std::exp(-2.0 * I * z);
    pole_dist = std::abs(1.0 - u) / 2.0;
    return I * (1.0 + u) / (1.0 - u);
}

/// z cot z, analytic at z = 0.
inline cplx z_cot_z(cplx z, double& pole_dist) {
    if (std::abs(z) < 1e-3) {
        pole_dist = std::numbers::pi;
        const cplx z2 = z * z;
        return 1.0 - z2 / 3.0 - z2 * z2 / 45.0 - 2.0 * z2 * z2 * z2 / 945.0;
    }
    return z * cot_exp(z, pole_dist);
}

/// sin(q x) / q, analytic at q = 0.
inline cplx sinc_scaled(cplx q, double x) {
    const cplx z = q * x;
    if (std::abs(z) < 1e-4) {
        const cplx z2 = z * z;
        return x * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
    }
    return std::sin(z) / q;
}

/// Pole-free forms with the same zeros as the residuals, multiplied by the
/// positive factor e^{-|Im K'l|} so they stay finite deep in the lower half plane:
///   even: K cos(K'l) - i K' sin(K'l)          (= f_even cos(K'l))
///   odd:  K sin(K'l)/K' + i cos(K'l)           (= f_odd sin(K'l)/K')
/// A positive rescaling leaves the argument unchanged, which is all the
/// winding count looks at.
inline cplx entire_residual(cplx k, Parity parity, const PotentialSpec& pot) {
    const double l = pot.half_width;
    const cplx kp = dispersion_inner(k, pot);
    const cplx z = kp * l;
    const double s = std::abs(z.imag());
    const cplx ep = std::exp(I * z - s);
    const cplx em = std::exp(-I * z - s);
    const cplx cos_s = (ep + em) / 2.0;
    if (parity == Parity::Even) {
        const cplx sin_s = (ep - em) / (2.0 * I);
        return k * cos_s - I * kp * sin_s;
    }
    cplx sinc_s;
    if (std::abs(z) < 1e-4) {
        sinc_s = detail::sinc_scaled(kp, l) * std::exp(-s);
    } else {
        sinc_s = (ep - em) / (2.0 * I) / kp;
    }
    return k * sinc_s + I * cos_s;
}

struct Rect {
    double re_lo, re_hi, im_lo, im_hi;

    [[nodiscard]] bool contains(cplx k, double margin = 0.0) const noexcept {
        return k.real() >= re_lo - margin && k.real() <= re_hi + margin &&
               k.imag() >= im_lo - margin && k.imag() <= im_hi + margin;
    }
    [[nodiscard]] cplx center() const noexcept {
        return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)};
    }
    [[nodiscard]] double diameter() const noexcept {
        return std::hypot(re_hi - re_lo, im_hi - im_lo);
    }
    [[nodiscard]] Rect inflated(double d) const noexcept {
        return {re_lo - d, re_hi + d, im_lo - d, im_hi + d};
    }
};

/// Thrown internally when the contour passes through (or numerically onto) a zero.
struct ContourZero {};

template <class F>
double phase_walk(F& g, cplx a, cplx b, cplx ga, cplx gb, int depth) {
    const double d = std::arg(gb / ga);
    if (std::abs(d) <= std::numbers::pi / 4.0) return d;
    if (depth >= 48) throw ContourZero{};
    const cplx m = 0.5 * (a + b);
    const cplx gm = g(m);
    if (gm == 0.0 || !std::isfinite(gm.real()) || !std::isfinite(gm.imag())) throw ContourZero{};
    return phase_walk(g, a, m, ga, gm, depth + 1) + phase_walk(g, m, b, gm, gb, depth + 1);
}

/// Number of zeros of the entire residual inside `r` (argument principle).
inline int winding_number(const Rect& r, Parity parity, const PotentialSpec& pot) {
    auto g = [&](cplx k) { return entire_residual(k, parity, pot); };
    const cplx corners[4] = {{r.re_lo, r.im_lo}, {r.re_hi, r.im_lo}, {r.re_hi, r.im_hi},
                             {r.re_lo, r.im_hi}};
    constexpr int per_side = 16;
    double total = 0.0;
    for (int side = 0; side < 4; ++side) {
        const cplx a = corners[side];
        const cplx b = corners[(side + 1) % 4];
        cplx prev = a;
        cplx gprev = g(a);
        if (gprev == 0.0) throw ContourZero{};
        for (int j = 1; j <= per_side; ++j) {
            const cplx p = a + (b - a) * (static_cast<double>(j) / per_side);
            const cplx gp = g(p);
            if (gp == 0.0) throw ContourZero{};
            total += phase_walk(g, prev, p, gprev, gp, 0);
            prev = p;
            gprev = gp;
        }
    }
    const double turns = total / (2.0 * std::numbers::pi);
    const double n = std::round(turns);
    if (std::abs(turns - n) > 0.05) throw ContourZero{};
    return static_cast<int>(n);
}

}  // namespace detail

/// Residual of the parity equation at K. Throws PoleProximityError within
/// 1e-12 of a pole of tan / cot.
[[nodiscard]] inline cplx parity_residual(cplx k, Parity parity, const PotentialSpec& pot) {
    const double l = pot.half_width;
    const cplx kp = dispersion_inner(k, pot);
    const cplx z = kp * l;
    double pole_dist = 1.0;
    cplx f;
    if (parity == Parity::Even) {
        f = k - I * kp * detail::tan_exp(z, pole_dist);
    } else {
        f = k + I * detail::z_cot_z(z, pole_dist) / l;
    }
    if (pole_dist < detail::pole_guard || !std::isfinite(f.real()) || !std::isfinite(f.imag())) {
        std::ostringstream os;
        os << "parity_residual: K = " << k << " (" << to_string(parity)
           << ") is within 1e-12 of a pole of the residual";
        throw PoleProximityError(os.str(), k);
    }
    return f;
}

[[nodiscard]] inline SiegertRoot make_root(cplx k, Parity parity, const PotentialSpec& pot) {
    SiegertRoot r;
    r.state_class = classify(k);
    // K -> -K* maps roots to roots, so an isolated root this close to the
    // imaginary axis sits on it.
    const bool on_axis = r.state_class == StateClass::Bound || r.state_class == StateClass::Virtual;
    if (on_axis) k = {0.0, k.imag()};
    r.k = k;
    r.energy = on_axis ? cplx{-k.imag() * k.imag(), 0.0} : energy_of(k);
    r.parity = parity;
    r.residual = std::abs(parity_residual(k, parity, pot));
    return r;
}

/// Newton iteration on parity_residual with a central-difference derivative.
[[nodiscard]] inline SiegertRoot refine_root(cplx k0, Parity parity, const PotentialSpec& pot,
                                             double tol = 1e-10, int max_iter = 60,
                                             double max_step = 1.0) {
    auto residual = [&](cplx k, cplx last) {
        try {
            return parity_residual(k, parity, pot);
        } catch (const PoleProximityError&) {
            std::ostringstream os;
            os << "refine_root: iteration captured by a residual pole near K = " << k;
            throw PoleCaptureError(os.str(), last);
        }
    };
    cplx k = k0;
    cplx f = residual(k, k);
    for (int iter = 0; iter < max_iter; ++iter) {
        const double h = 1e-7 * std::max(1.0, std::abs(k));
        const cplx df = (residual(k + h, k) - residual(k - h, k)) / (2.0 * h);
        if (df == 0.0 || !std::isfinite(std::abs(df))) break;
        cplx dk = -f / df;
        if (std::abs(dk) > max_step) dk *= max_step / std::abs(dk);
        k += dk;
        f = residual(k, k);
        if (std::abs(dk) < tol && std::abs(f) < tol) return make_root(k, parity, pot);
    }
    std::ostringstream os;
    os << "refine_root: no convergence from K0 = " << k0 << " within " << max_iter
       << " iterations (last K = " << k << ", |f| = " << std::abs(f) << ")";
    throw NonConvergenceError(os.str(), k);
}

namespace detail {

inline void merge_root(std::vector<SiegertRoot>& roots, const SiegertRoot& r, double dist) {
    for (const auto& q : roots)
        if (std::abs(q.k - r.k) < dist) return;
    roots.push_back(r);
}

inline std::optional<SiegertRoot> try_refine(cplx k0, Parity parity, const PotentialSpec& pot,
                                             const SolverOptions& opt) {
    try {
        return refine_root(k0, parity, pot, opt.tol, opt.max_iter, opt.max_step);
    } catch (const Error&) {
        return std::nullopt;
    }
}

struct CellScan {
    const PotentialSpec& pot;
    Parity parity;
    const SolverOptions& opt;
    std::vector<SiegertRoot>& roots;
    std::vector<Rect>& suspects;

    // Seeds Newton from the cell center and corners; keeps roots inside the cell.
    int seed_cell(const Rect& cell) {
        const double margin = 1e-9 * std::max(1.0, cell.diameter());
        const cplx seeds[5] = {cell.center(),
                               {cell.re_lo, cell.im_lo},
                               {cell.re_hi, cell.im_lo},
                               {cell.re_hi, cell.im_hi},
                               {cell.re_lo, cell.im_hi}};
        std::vector<SiegertRoot> local;
        for (const cplx s : seeds) {
            auto r = try_refine(s, parity, pot, opt);
            if (r && cell.contains(r->k, margin)) merge_root(local, *r, opt.merge_distance);
        }
        for (const auto& r : local) merge_root(roots, r, opt.merge_distance);
        return static_cast<int>(local.size());
    }

    // `count` < 0 means the winding could not be taken (zero on the cell edge).
    void solve(const Rect& cell, int count, int depth) {
        if (count == 0) return;
        if (count == 1) {
            const double margin = 1e-9 * std::max(1.0, cell.diameter());
            if (auto r = try_refine(cell.center(), parity, pot, opt);
                r && cell.contains(r->k, margin)) {
                merge_root(roots, *r, opt.merge_distance);
                return;
            }
        }
        if (count < 0 || depth >= opt.max_depth) {
            const int found = seed_cell(cell);
            if (count >= 0 && found != count) suspects.push_back(cell);
            return;
        }
        // Off-center split so that symmetric root patterns do not land on the cut.
        const double fr = 0.5 + 0.0137;
        const double rm = cell.re_lo + fr * (cell.re_hi - cell.re_lo);
        const double im = cell.im_lo + fr * (cell.im_hi - cell.im_lo);
        const Rect parts[4] = {{cell.re_lo, rm, cell.im_lo, im},
                               {rm, cell.re_hi, cell.im_lo, im},
                               {cell.re_lo, rm, im, cell.im_hi},
                               {rm, cell.re_hi, im, cell.im_hi}};
        for (const auto& p : parts) {
            int w = -1;
            try {
                w = winding_number(p, parity, pot);
            } catch (const ContourZero&) {
            }
            solve(p, w, depth + 1);
        }
    }
};

}  // namespace detail

/// All Siegert roots of one parity inside the closed rectangle `region`, each
/// refined to |residual| < tol, sorted by Re K (then Im K). The count is checked
/// against the argument principle over the region boundary.
[[nodiscard]] inline std::vector<SiegertRoot> scan_roots(const ScanRegion& region, Parity parity,
                                                         const PotentialSpec& pot,
                                                         double tol = 1e-10,
                                                         SolverOptions opt = {}) {
    region.validate();
    opt.tol = tol;
    detail::Rect top{region.re_min, region.re_max, region.im_min, region.im_max};

    // A root sitting on the boundary makes the winding ill-defined; such roots
    // belong to the closed region, so the contour is pushed out slightly.
    const double scale = std::max(1.0, top.diameter());
    int total = -1;
    for (double d : {0.0, 1e-7, 1e-6, 1e-5}) {
        try {
            const auto r = top.inflated(d * scale);
            total = detail::winding_number(r, parity, pot);
            top = r;
            break;
        } catch (const detail::ContourZero&) {
        }
    }
    if (total < 0) {
        throw IncompleteScanError("scan_roots: cannot take the winding number over the region boundary",
                                  top.re_lo, top.re_hi, top.im_lo, top.im_hi);
    }

    std::vector<SiegertRoot> roots;
    std::vector<detail::Rect> suspects;
    if (total > 0) {
        detail::CellScan scan{pot, parity, opt, roots, suspects};
        const int n = region.resolution;
        const double dre = (top.re_hi - top.re_lo) / n;
        const double dim = (top.im_hi - top.im_lo) / n;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const detail::Rect cell{top.re_lo + i * dre,
                                        i + 1 == n ? top.re_hi : top.re_lo + (i + 1) * dre,
                                        top.im_lo + j * dim,
                                        j + 1 == n ? top.im_hi : top.im_lo + (j + 1) * dim};
                int w = -1;
                try {
                    w = detail::winding_number(cell, parity, pot);
                } catch (const detail::ContourZero&) {
                }
                scan.solve(cell, w, 0);
            }
        }
    }

    std::vector<SiegertRoot> inside;
    for (const auto& r : roots)
        if (top.contains(r.k)) detail::merge_root(inside, r, opt.merge_distance);
    std::sort(inside.begin(), inside.end(), [](const SiegertRoot& a, const SiegertRoot& b) {
        if (a.k.real() != b.k.real()) return a.k.real() < b.k.real();
        return a.k.imag() < b.k.imag();
    });

    if (static_cast<int>(inside.size()) != total) {
        const detail::Rect bad = suspects.empty() ? top : suspects.front();
        std::ostringstream os;
        os << "scan_roots: argument principle counts " << total << " " << to_string(parity)
           << " roots but " << inside.size() << " were refined; suspect cell [" << bad.re_lo
           << ", " << bad.re_hi << "] x [" << bad.im_lo << ", " << bad.im_hi << "]";
        throw IncompleteScanError(os.str(), bad.re_lo, bad.re_hi, bad.im_lo, bad.im_hi);
    }
    return inside;
}

/// Bound states K = i kappa, 0 < kappa < sqrt(V0), of both parities, sorted by
/// energy (deepest first). Bisection on the real pole-free residuals along the
/// positive imaginary axis.
[[nodiscard]] inline std::vector<SiegertRoot> find_bound_states(const PotentialSpec& pot,
                                                                double tol = 1e-10) {
    if (!(pot.depth > 0.0)) throw PreconditionError("find_bound_states: V0 must be > 0");
    const double l = pot.half_width;
    const double qmax = std::sqrt(pot.depth);

    // Parametrised by the inner wave number q = K' (real), kappa = sqrt(V0 - q^2).
    auto h = [&](double q, Parity p) {
        const double kappa = std::sqrt(std::max(0.0, pot.depth - q * q));
        if (p == Parity::Even) return kappa * std::cos(q * l) - q * std::sin(q * l);
        const double sinc = q * l < 1e-8 ? l : std::sin(q * l) / q;
        return kappa * sinc + std::cos(q * l);
    };

    std::vector<SiegertRoot> out;
    const int n = std::max(400, static_cast<int>(std::ceil(200.0 * qmax * l)));
    for (Parity p : {Parity::Even, Parity::Odd}) {
        double q_prev = 0.0;
        double h_prev = h(0.0, p);
        for (int i = 1; i < n; ++i) {
            const double q = qmax * i / n;
            const double hq = h(q, p);
            if (h_prev == 0.0 || (h_prev < 0.0) != (hq < 0.0)) {
                double lo = q_prev, hi = q, flo = h_prev;
                for (int it = 0; it < 200 && hi - lo > 4e-16 * qmax; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = h(mid, p);
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                const double qr = 0.5 * (lo + hi);
                const double kappa = std::sqrt(pot.depth - qr * qr);
                if (kappa > 0.0) {
                    SiegertRoot r = make_root(cplx{0.0, kappa}, p, pot);
                    if (r.residual > tol) {
                        // Bisection brackets to machine precision in q; polish in K.
                        r = refine_root(r.k, p, pot, tol);
                    }
                    out.push_back(r);
                }
            }
            q_prev = q;
            h_prev = hq;
        }
    }
    std::sort(out.begin(), out.end(), [](const SiegertRoot& a, const SiegertRoot& b) {
        return a.energy.real() < b.energy.real();
    });
    bool has_even = false;
    for (const auto& r : out) has_even = has_even || r.parity == Parity::Even;
    if (!has_even)
        throw std::logic_error("find_bound_states: an attractive well always binds an even state");
    return out;
}

}  // namespace siegert
