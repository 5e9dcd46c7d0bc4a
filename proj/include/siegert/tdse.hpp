#pragma once

// Crank-Nicolson propagation of i dPsi/dt = (-d^2/dx^2 + V) Psi on a uniform grid
// in a hard-walled box [-X, X]. Independent of the Siegert machinery: it only
// sees the potential and an initial field.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include <lapacke.h>

#include "siegert/errors.hpp"
#include "siegert/model.hpp"

namespace siegert::tdse {

struct GridSpec {
    double half_width = 20.0;
    std::size_t points = 4001;
    double dt = 1e-4;

    [[nodiscard]] double spacing() const noexcept {
        return 2.0 * half_width / static_cast<double>(points - 1);
    }
    [[nodiscard]] double x(std::size_t i) const noexcept {
        return -half_width + spacing() * static_cast<double>(i);
    }

    void validate(const PotentialSpec& pot) const {
        if (!(half_width > 5.0 * pot.half_width))
            throw PreconditionError("GridSpec: box half-width must exceed 5 l");
        if (points < 3) throw PreconditionError("GridSpec: need at least 3 points");
        if (!(dt > 0.0)) throw PreconditionError("GridSpec: dt must be > 0");
    }
};

/// Amplitudes on all grid points, walls included (pinned to zero).
struct TdseField {
    std::vector<cplx> psi;
    double t = 0.0;
};

struct TdseSeries {
    GridSpec grid;
    std::vector<TdseField> frames;
    double max_step_drift = 0.0;
    double total_drift = 0.0;
};

struct EvolveOptions {
    std::size_t record_every = 10;
    double max_step_drift = 1e-8;
};

[[nodiscard]] inline double box_norm(const TdseField& f, const GridSpec& g) {
    double s = 0.0;
    for (const auto& v : f.psi) s += std::norm(v);
    return s * g.spacing();
}

/// Norm restricted to grid points inside [lo, hi].
[[nodiscard]] inline double region_norm(const TdseField& f, const GridSpec& g, double lo,
                                        double hi) {
    const double h = g.spacing();
    double s = 0.0;
    for (std::size_t i = 0; i < f.psi.size(); ++i) {
        const double x = g.x(i);
        if (x >= lo - 1e-12 * h && x <= hi + 1e-12 * h) s += std::norm(f.psi[i]);
    }
    return s * h;
}

/// Probability current 2 Im(Psi* Psi') at the grid point nearest to x
/// (central difference).
[[nodiscard]] inline double grid_current(const TdseField& f, const GridSpec& g, double x) {
    const double h = g.spacing();
    auto i = static_cast<std::size_t>(std::llround((x + g.half_width) / h));
    i = std::clamp<std::size_t>(i, 1, f.psi.size() - 2);
    const cplx d = (f.psi[i + 1] - f.psi[i - 1]) / (2.0 * h);
    return ReducedUnits::speed_factor * std::imag(std::conj(f.psi[i]) * d);
}

/// Standard deviation of x under |Psi|^2.
[[nodiscard]] inline double packet_width(const TdseField& f, const GridSpec& g) {
    double n = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < f.psi.size(); ++i) {
        const double w = std::norm(f.psi[i]);
        const double x = g.x(i);
        n += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    const double mean = m1 / n;
    return std::sqrt(std::max(0.0, m2 / n - mean * mean));
}

[[nodiscard]] inline TdseField sample_field(const GridSpec& g,
                                            const std::function<cplx(double)>& fn) {
    TdseField f;
    f.psi.resize(g.points);
    for (std::size_t i = 0; i < g.points; ++i) f.psi[i] = fn(g.x(i));
    f.psi.front() = 0.0;
    f.psi.back() = 0.0;
    return f;
}

/// Multiplies by 1 for |x| <= r0, a half-cosine ramp on [r0, r1], 0 beyond.
inline void apply_smooth_cutoff(TdseField& f, const GridSpec& g, double r0, double r1) {
    if (!(r0 < r1)) throw PreconditionError("apply_smooth_cutoff: need r0 < r1");
    for (std::size_t i = 0; i < f.psi.size(); ++i) {
        const double ax = std::abs(g.x(i));
        double w = 1.0;
        if (ax >= r1) {
            w = 0.0;
        } else if (ax > r0) {
            w = 0.5 * (1.0 + std::cos(std::numbers::pi * (ax - r0) / (r1 - r0)));
        }
        f.psi[i] *= w;
    }
}

[[nodiscard]] inline TdseField gaussian_packet(const GridSpec& g, double x0, double sigma,
                                               double k0) {
    return sample_field(g, [&](double x) {
        const double u = (x - x0) / sigma;
        return std::exp(-0.25 * u * u) * std::exp(I * k0 * x);
    });
}

namespace detail {
/// Mean of the step potential over [x - h/2, x + h/2]. Sampling V pointwise
/// moves the well edge by up to a cell and costs a full order of accuracy.
inline double cell_potential(const PotentialSpec& pot, double x, double h) {
    const double l = pot.half_width;
    const double overlap = std::max(0.0, std::min(x + 0.5 * h, l) - std::max(x - 0.5 * h, -l));
    return -pot.depth * overlap / h;
}

inline void interior_hamiltonian(const PotentialSpec& pot, const GridSpec& g,
                                 std::vector<double>& diag, std::vector<double>& off) {
    const std::size_t n = g.points - 2;
    const double h = g.spacing();
    diag.resize(n);
    off.assign(n > 0 ? n - 1 : 0, -1.0 / (h * h));
    for (std::size_t i = 0; i < n; ++i) diag[i] = 2.0 / (h * h) + cell_potential(pot, g.x(i + 1), h);
}
}  // namespace detail

/// Removes the components along the negative-energy eigenvectors of the grid
/// Hamiltonian (LAPACK dstevx). Returns their energies.
inline std::vector<double> project_out_bound_states(TdseField& f, const PotentialSpec& pot,
                                                    const GridSpec& g) {
    std::vector<double> d, e;
    detail::interior_hamiltonian(pot, g, d, e);
    const auto n = static_cast<lapack_int>(d.size());
    const double vl = -pot.depth - 1.0;
    const double vu = 0.0;
    std::vector<double> w(d.size());
    std::vector<lapack_int> ifail(d.size());
    lapack_int found = 0;

    // dstevx may rescale d and e in place, so count on copies first.
    {
        std::vector<double> dc = d, ec = e;
        double dummy = 0.0;
        const lapack_int info = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'N', 'V', n, dc.data(), ec.data(),
                                               vl, vu, 0, 0, 0.0, &found, w.data(), &dummy, 1,
                                               ifail.data());
        if (info != 0) throw SchemeFailureError("project_out_bound_states: dstevx count failed");
    }
    if (found == 0) return {};
    std::vector<double> z(d.size() * static_cast<std::size_t>(found));
    lapack_int found2 = 0;
    const lapack_int info = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'V', n, d.data(), e.data(), vl,
                                           vu, 0, 0, 0.0, &found2, w.data(), z.data(), n,
                                           ifail.data());
    if (info != 0 || found2 != found) {
        std::ostringstream os;
        os << "project_out_bound_states: dstevx failed (info = " << info << ")";
        throw SchemeFailureError(os.str());
    }
    for (lapack_int k = 0; k < found; ++k) {
        const double* v = z.data() + static_cast<std::size_t>(k) * d.size();
        cplx overlap = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) overlap += v[i] * f.psi[i + 1];
        for (std::size_t i = 0; i < d.size(); ++i) f.psi[i + 1] -= v[i] * overlap;
    }
    return {w.begin(), w.begin() + found};
}

/// Crank-Nicolson: (1 + i dt/2 H) Psi^{n+1} = (1 - i dt/2 H) Psi^n, three-point
/// Laplacian, Dirichlet walls. Records every `record_every` steps and the last.
[[nodiscard]] inline TdseSeries evolve(const TdseField& initial, const PotentialSpec& pot,
                                       const GridSpec& grid, double t_end,
                                       const EvolveOptions& opt = {}) {
    grid.validate(pot);
    if (initial.psi.size() != grid.points)
        throw PreconditionError("evolve: field size does not match the grid");
    if (initial.psi.front() != 0.0 || initial.psi.back() != 0.0)
        throw PreconditionError("evolve: initial field must vanish on the box walls");

    std::vector<double> d, e;
    detail::interior_hamiltonian(pot, grid, d, e);
    const std::size_t n = d.size();
    const cplx half = I * grid.dt / 2.0;

    // Thomas factorisation of the constant left-hand matrix.
    std::vector<cplx> cprime(n), denom(n);
    {
        const cplx sub = e.empty() ? cplx{0.0} : half * e[0];
        cplx prev_c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx diag = 1.0 + half * d[i];
            denom[i] = diag - (i > 0 ? sub * prev_c : cplx{0.0});
            prev_c = i + 1 < n ? sub / denom[i] : cplx{0.0};
            cprime[i] = prev_c;
        }
    }
    const cplx off_l = e.empty() ? cplx{0.0} : half * e[0];

    TdseSeries series;
    series.grid = grid;
    TdseField cur = initial;
    series.frames.push_back(cur);
    const double n0 = box_norm(cur, grid);
    double prev_norm = n0;

    const auto steps = static_cast<std::size_t>(std::llround(t_end / grid.dt));
    std::vector<cplx> rhs(n);
    for (std::size_t s = 1; s <= steps; ++s) {
        const auto& p = cur.psi;
        for (std::size_t i = 0; i < n; ++i) {
            cplx hp = d[i] * p[i + 1];
            if (i > 0) hp += e[0] * p[i];
            if (i + 1 < n) hp += e[0] * p[i + 2];
            rhs[i] = p[i + 1] - half * hp;
        }
        // forward sweep
        rhs[0] /= denom[0];
        for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - off_l * rhs[i - 1]) / denom[i];
        // back substitution
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cprime[i] * rhs[i + 1];
        for (std::size_t i = 0; i < n; ++i) cur.psi[i + 1] = rhs[i];
        cur.t = static_cast<double>(s) * grid.dt;

        const double nn = box_norm(cur, grid);
        const double drift = std::abs(nn - prev_norm) / prev_norm;
        series.max_step_drift = std::max(series.max_step_drift, drift);
        if (!(drift <= opt.max_step_drift)) {
            std::ostringstream os;
            os << "evolve: box norm drifted by " << drift << " in one step at t = " << cur.t;
            throw SchemeFailureError(os.str());
        }
        prev_norm = nn;
        if (s % opt.record_every == 0 || s == steps) series.frames.push_back(cur);
    }
    series.total_drift = std::abs(prev_norm - n0) / n0;
    return series;
}

struct DecayFit {
    double rate;
    double r_squared;
    std::size_t samples;
};

/// Least-squares slope of log N_region(t) over the window [t1, t2]; returns the
/// decay rate -slope. R^2 of a series that stays within `flat_tol` of its mean
/// in log N is noise, so such a series is reported but never rejected.
[[nodiscard]] inline DecayFit survival_decay_rate(const TdseSeries& series, double lo, double hi,
                                                  double t1, double t2,
                                                  double min_r_squared = 0.99,
                                                  double flat_tol = 1e-4) {
    std::vector<double> ts, ys;
    for (const auto& f : series.frames) {
        if (f.t >= t1 - 1e-12 && f.t <= t2 + 1e-12) {
            ts.push_back(f.t);
            ys.push_back(std::log(region_norm(f, series.grid, lo, hi)));
        }
    }
    if (ts.size() < 3) throw PreconditionError("survival_decay_rate: fewer than 3 frames in window");
    const double m = static_cast<double>(ts.size());
    double st = 0, sy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sy += ys[i];
    }
    const double tm = st / m, ym = sy / m;
    double stt = 0, sty = 0, syy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        stt += (ts[i] - tm) * (ts[i] - tm);
        sty += (ts[i] - tm) * (ys[i] - ym);
        syy += (ys[i] - ym) * (ys[i] - ym);
    }
    const double slope = sty / stt;
    double ss_res = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = ys[i] - (ym + slope * (ts[i] - tm));
        ss_res += r * r;
    }
    const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    double spread = 0.0;
    for (double y : ys) spread = std::max(spread, std::abs(y - ym));
    DecayFit fit{-slope, r2, ts.size()};
    if (spread >= flat_tol && r2 < min_r_squared) {
        std::ostringstream os;
        os << "survival_decay_rate: log N is not linear on [" << t1 << ", " << t2
           << "] (R^2 = " << r2 << ", rate = " << fit.rate << ")";
        throw FitQualityError(os.str(), fit.rate, r2);
    }
    return fit;
}

struct FluxSample {
    double t;
    double dn_dt;  // centered difference of the recorded region norms
    double flux;   // -(j(hi) - j(lo))
};

/// Per-frame comparison of the region norm's rate of change with the current
/// through the region edges.
[[nodiscard]] inline std::vector<FluxSample> region_flux_balance(const TdseSeries& series,
                                                                 double lo, double hi) {
    std::vector<FluxSample> out;
    const auto& fr = series.frames;
    for (std::size_t k = 1; k + 1 < fr.size(); ++k) {
        const double dn = region_norm(fr[k + 1], series.grid, lo, hi) -
                          region_norm(fr[k - 1], series.grid, lo, hi);
        const double dt = fr[k + 1].t - fr[k - 1].t;
        const double flux =
            -(grid_current(fr[k], series.grid, hi) - grid_current(fr[k], series.grid, lo));
        out.push_back({fr[k].t, dn / dt, flux});
    }
    return out;
}

}  // namespace siegert::tdse
