#pragma once

// Decay-rate cross-check: start the grid propagator from a truncated Siegert
// eigenfunction of a deep well and compare the survival rate in [-l, l] with
// 2 |Im E| of that root.
//
// A plain cutoff is not enough: the truncated state overlaps the well's bound
// states, whose probability never leaves and flattens log N(t). Those grid
// eigenvectors are projected out before the run.

#include <algorithm>
#include <cmath>
#include <vector>

#include "siegert/siegert_solver.hpp"
#include "siegert/tdse.hpp"
#include "siegert/wavefunc.hpp"

namespace siegert {

struct DeepWellSetup {
    double depth = 50.0;
    double ramp_lo = 2.0;  // in units of l
    double ramp_hi = 6.0;
    bool project_bound = true;
    double fit_t1 = 0.05;
    double fit_t2 = 0.3;
    tdse::GridSpec grid{20.0, 4001, 1e-4};
    tdse::EvolveOptions evolve{10, 1e-8};
};

struct DeepWellResult {
    SiegertRoot root;
    double expected_rate = 0.0;  // 2 |Im E|
    tdse::DecayFit fit{};
    double rel_error = 0.0;
    double total_drift = 0.0;
    double max_step_drift = 0.0;
    std::vector<double> projected_energies;
    /// Largest |dN/dt - flux| / max |flux| over the fit window for the region.
    double flux_mismatch = 0.0;
};

/// Resonance with the smallest Re K in [0.1, 6] x [-3, -0.1].
[[nodiscard]] inline SiegertRoot lowest_resonance(const PotentialSpec& pot) {
    const ScanRegion region{0.1, 6.0, -3.0, -0.1, 16};
    auto roots = scan_roots(region, Parity::Even, pot);
    const auto odd = scan_roots(region, Parity::Odd, pot);
    roots.insert(roots.end(), odd.begin(), odd.end());
    if (roots.empty()) throw IncompleteScanError("lowest_resonance: no resonance in the scan region",
                                                 region.re_min, region.re_max, region.im_min,
                                                 region.im_max);
    return *std::min_element(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
        return a.k.real() < b.k.real();
    });
}

[[nodiscard]] inline DeepWellResult run_deep_well(const DeepWellSetup& cfg = {}) {
    const PotentialSpec pot{cfg.depth};
    DeepWellResult res;
    res.root = lowest_resonance(pot);
    res.expected_rate = 2.0 * std::abs(res.root.energy.imag());

    const EigenFunction fn(res.root, pot);
    const double l = pot.half_width;
    auto field = tdse::sample_field(cfg.grid, [&](double x) { return fn.value(x); });
    tdse::apply_smooth_cutoff(field, cfg.grid, cfg.ramp_lo * l, cfg.ramp_hi * l);
    if (cfg.project_bound) res.projected_energies = tdse::project_out_bound_states(field, pot, cfg.grid);

    const auto series = tdse::evolve(field, pot, cfg.grid, cfg.fit_t2, cfg.evolve);
    res.total_drift = series.total_drift;
    res.max_step_drift = series.max_step_drift;
    res.fit = tdse::survival_decay_rate(series, -l, l, cfg.fit_t1, cfg.fit_t2);
    res.rel_error = std::abs(res.fit.rate - res.expected_rate) / res.expected_rate;

    double worst = 0.0, scale = 0.0;
    for (const auto& s : tdse::region_flux_balance(series, -l, l)) {
        if (s.t < cfg.fit_t1 || s.t > cfg.fit_t2) continue;
        worst = std::max(worst, std::abs(s.dn_dt - s.flux));
        scale = std::max(scale, std::abs(s.flux));
    }
    res.flux_mismatch = scale > 0.0 ? worst / scale : 0.0;
    return res;
}

}  // namespace siegert
