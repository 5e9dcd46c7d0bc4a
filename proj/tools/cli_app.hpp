#pragma once

// siegert command-line front end: roots, expand, verify.
//
// Data go to --out (atomically, via a temporary file) or stdout; the
// human-readable summary goes to stderr. Exit status: 0 all checks pass,
// 1 a check failed or a computation could not complete, 2 usage/config error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <unistd.h>

#include "siegert/siegert.hpp"

namespace siegert::cli {

constexpr int schema_version = 1;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses "x", "x+yi", "x-yi", "yi", "i", "-i" (j accepted for i).
inline cplx parse_complex(std::string text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw UsageError("empty complex literal");
    auto number = [&](const std::string& part, const char* what) {
        if (part.empty() || part == "+") return 1.0;
        if (part == "-") return -1.0;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != part.size()) throw UsageError("bad " + std::string(what) + " part in '" + text + "'");
        return v;
    };
    const char last = s.back();
    if (last != 'i' && last != 'j') return {number(s, "real"), 0.0};
    s.pop_back();
    // split at the last sign that is not an exponent sign
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string::npos) return {0.0, number(s, "imaginary")};
    return {number(s.substr(0, split), "real"), number(s.substr(split), "imaginary")};
}

inline ScanRegion parse_region(const std::string& text, int resolution) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--region: '" + item + "' is not a number");
        }
    }
    if (v.size() != 4) throw UsageError("--region expects re_min:re_max:im_min:im_max");
    ScanRegion r{v[0], v[1], v[2], v[3], resolution};
    try {
        r.validate();
    } catch (const PreconditionError& e) {
        throw UsageError(std::string("--region: ") + e.what());
    }
    return r;
}

/// Twelve significant digits, fixed layout.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

/// Rounds to the same twelve digits so JSON and CSV carry identical values.
inline double round12(double v) { return std::isfinite(v) ? std::stod(fmt(v)) : v; }

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;

    void add(std::vector<nlohmann::json> row) { rows.push_back(std::move(row)); }
};

inline std::string cell(const nlohmann::json& v) {
    if (v.is_number_float()) return fmt(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
}

inline std::string render_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell(row[i]);
        out += '\n';
    }
    return out;
}

inline nlohmann::json rounded(const nlohmann::json& v) {
    if (v.is_number_float()) {
        const double d = v.get<double>();
        return std::isfinite(d) ? nlohmann::json(round12(d)) : nlohmann::json(nullptr);
    }
    if (v.is_object() || v.is_array()) {
        nlohmann::json out = v;
        for (auto& item : out) item = rounded(item);
        return out;
    }
    return v;
}

inline std::string render_json(const std::string& command, const Table& t,
                               const nlohmann::json& summary) {
    nlohmann::json doc;
    doc["schema_version"] = schema_version;
    doc["command"] = command;
    doc["columns"] = t.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = rounded(row[i]);
        rows.push_back(obj);
    }
    doc["rows"] = rows;
    doc["summary"] = rounded(summary);
    return doc.dump(2) + "\n";
}

inline void write_output(const std::string& path, const std::string& data, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << data;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw UsageError("cannot open '" + tmp.string() + "' for writing");
        f << data;
        f.flush();
        if (!f) throw UsageError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw UsageError("cannot move output into '" + path + "': " + ec.message());
    }
}

struct RunConfig {
    double v0 = 1.0;
    std::string region = "0.1:6:-3:-0.1";
    int resolution = 16;
    std::string parity = "both";
    double tol = 1e-10;
    std::string coeffs = "1,1";
    double l0 = 1.0;
    double t_end = 2.0;
    double step = 1e-3;
    std::string mode = "both";
    std::string format = "csv";
    std::string out;
    int pure = 0;
    bool vbar_profile = false;
    double profile_t = 0.0;
    double x_max = 12.0;
    std::size_t samples = 481;
    std::string inject_k;
    bool tdse_deep_well = false;
};

struct Context {
    const RunConfig& cfg;
    std::ostream& out;
    std::ostream& err;
    PotentialSpec pot;
    ScanRegion region;
};

inline std::vector<Parity> parities(const std::string& p) {
    if (p == "even") return {Parity::Even};
    if (p == "odd") return {Parity::Odd};
    return {Parity::Even, Parity::Odd};
}

/// Resonances of the scan region ordered by Re K.
inline std::vector<SiegertRoot> resonances(const Context& c, const std::string& parity = "both") {
    std::vector<SiegertRoot> all;
    for (Parity p : parities(parity)) {
        auto r = scan_roots(c.region, p, c.pot, c.cfg.tol);
        all.insert(all.end(), r.begin(), r.end());
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const auto& a, const auto& b) { return a.k.real() < b.k.real(); });
    return all;
}

inline void emit(const Context& c, const std::string& command, const Table& t,
                 const nlohmann::json& summary) {
    const std::string data =
        c.cfg.format == "json" ? render_json(command, t, summary) : render_csv(t);
    write_output(c.cfg.out, data, c.out);
}

inline int cmd_roots(const Context& c) {
    Table t{{"parity", "re_k", "im_k", "re_e", "im_e", "class", "residual"}, {}};
    auto add = [&](const SiegertRoot& r) {
        t.add({std::string(to_string(r.parity)), r.k.real(), r.k.imag(), r.energy.real(),
               r.energy.imag(), std::string(to_string(r.state_class)), r.residual});
    };
    std::size_t n_res = 0, n_bound = 0;
    for (const auto& r : resonances(c, c.cfg.parity)) {
        add(r);
        ++n_res;
    }
    if (c.pot.depth > 0.0) {
        const auto want = parities(c.cfg.parity);
        for (const auto& b : find_bound_states(c.pot, c.cfg.tol)) {
            if (std::find(want.begin(), want.end(), b.parity) == want.end()) continue;
            add(b);
            ++n_bound;
        }
    }
    c.err << "roots: " << n_res << " in region " << c.cfg.region << ", " << n_bound
          << " bound\n";
    emit(c, "roots", t, {{"resonances", n_res}, {"bound", n_bound}, {"v0", c.pot.depth}});
    return 0;
}

inline std::vector<cplx> parse_coeffs(const std::string& text) {
    std::vector<cplx> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_complex(item));
    if (out.size() != 2) throw UsageError("--coeffs expects two complex numbers a1,a2");
    return out;
}

inline int cmd_vbar_profile(const Context& c, const WaveState& s) {
    Table t{{"x", "vbar"}, {}};
    const auto n = std::max<std::size_t>(c.cfg.samples, 2);
    double vmin = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -c.cfg.x_max + 2.0 * c.cfg.x_max * static_cast<double>(i) / static_cast<double>(n - 1);
        double v = std::nan("");
        try {
            v = vbar(s, x, c.cfg.profile_t);
            vmin = std::min(vmin, v);
        } catch (const SingularNodeError&) {
        }
        t.add({x, v});
    }
    c.err << "vbar profile: t = " << c.cfg.profile_t << ", min vbar = " << vmin << "\n";
    emit(c, "expand", t, {{"t", c.cfg.profile_t}, {"min_vbar", vmin}});
    return 0;
}

inline int cmd_expand(const Context& c) {
    const auto roots = resonances(c);
    std::vector<std::pair<cplx, SiegertRoot>> parts;
    std::string label;
    if (c.cfg.pure > 0) {
        if (static_cast<std::size_t>(c.cfg.pure) > roots.size())
            throw UsageError("--pure " + std::to_string(c.cfg.pure) + ": only " +
                             std::to_string(roots.size()) + " resonances in the region");
        parts.push_back({1.0, roots[static_cast<std::size_t>(c.cfg.pure - 1)]});
        label = "pure K" + std::to_string(c.cfg.pure);
    } else {
        if (roots.size() < 2) throw UsageError("expand: need two resonances in the scan region");
        const auto a = parse_coeffs(c.cfg.coeffs);
        parts = {{a[0], roots[0]}, {a[1], roots[1]}};
        label = "a1 K1 + a2 K2";
    }
    const auto s = WaveState::superposition(parts, c.pot);
    if (c.cfg.vbar_profile) return cmd_vbar_profile(c, s);
    if (c.cfg.l0 < c.pot.half_width) throw UsageError("--l0 must be >= l");

    std::vector<DomainMode> modes;
    if (c.cfg.mode != "two-edge") modes.push_back(DomainMode::PaperSingleEdge);
    if (c.cfg.mode != "paper") modes.push_back(DomainMode::TwoEdgeExact);

    Table t{{"mode", "t", "L", "Ldot", "N", "drift"}, {}};
    nlohmann::json summary = nlohmann::json::object();
    summary["state"] = label;
    const double v_target = ReducedUnits::speed_factor * parts.back().second.k.real();
    summary["target_speed"] = v_target;
    bool ok = true;
    for (DomainMode m : modes) {
        const auto traj = integrate_domain(s, c.cfg.l0, c.cfg.t_end, c.cfg.step, m);
        const double n0 = traj.samples.front().norm;
        double max_drift = 0.0;
        for (const auto& smp : traj.samples) {
            const double drift = std::abs(smp.norm - n0) / n0;
            max_drift = std::max(max_drift, drift);
            t.add({std::string(to_string(m)), smp.t, smp.half_width, smp.speed, smp.norm, drift});
        }
        const auto& last = traj.samples.back();
        // pure states conserve N in either mode; superpositions only in the two-edge mode
        const bool bounded = c.cfg.pure > 0 || m == DomainMode::TwoEdgeExact;
        const double bound = c.cfg.pure > 0 ? 1e-8 : 1e-6;
        const bool pass = !bounded || max_drift < bound;
        ok = ok && pass;
        summary[std::string(to_string(m))] = {{"max_drift", max_drift},
                                              {"final_L", last.half_width},
                                              {"final_Ldot", last.speed},
                                              {"halving_rel_diff", traj.halving_rel_diff}};
        char line[256];
        std::snprintf(line, sizeof line,
                      "expand[%s] %s: max drift %.3e%s, final L %.6f, final Ldot %.6f "
                      "(%+.2f%% vs 2 Re K = %.6f)\n",
                      std::string(to_string(m)).c_str(), label.c_str(), max_drift,
                      bounded ? (pass ? " (pass)" : " (FAIL)") : " (reported)", last.half_width,
                      last.speed, 100.0 * (last.speed / v_target - 1.0), v_target);
        c.err << line;
    }
    emit(c, "expand", t, summary);
    return ok ? 0 : 1;
}

struct CheckRow {
    std::string name;
    LeakReport rep;
    double tol;
    bool pass;
};

inline int cmd_verify(const Context& c) {
    std::vector<CheckRow> rows;
    auto add = [&](std::string name, const LeakReport& r, double tol, bool pass) {
        rows.push_back({std::move(name), r, tol, pass});
    };
    constexpr double identity_tol = 1e-6;
    constexpr double dispersion_tol = 1e-9;

    if (!c.cfg.inject_k.empty()) {
        // A supplied K is checked against the energy its own wave function carries.
        const cplx k = parse_complex(c.cfg.inject_k);
        const auto parity = c.cfg.parity == "odd" ? Parity::Odd : Parity::Even;
        SiegertRoot r{k, energy_of(k), parity, StateClass::Resonant, 0.0};
        r.energy = rayleigh_energy(WaveState::pure(r, c.pot), 3.0, 0.0);
        const auto rep = check_dispersion_identity(r);
        add("injected K = " + c.cfg.inject_k, rep, dispersion_tol, rep.abs_error < dispersion_tol);
    } else {
        const auto roots = resonances(c);
        if (roots.size() < 2) throw UsageError("verify: need two resonances in the scan region");
        const auto& r1 = roots[0];
        const auto& r2 = roots[1];
        const QuadSpec quad{};
        const auto pure = WaveState::pure(r1, c.pot);
        const auto pair = WaveState::superposition({{1.0, r1}, {1.0, r2}}, c.pot);
        for (double L : {2.0, 3.0, 5.0}) {
            for (auto [name, st] : {std::pair<const char*, const WaveState*>{"pure K1", &pure},
                                    {"a1=a2=1", &pair}}) {
                const auto a = check_leak_identity(*st, L, 0.0, quad);
                add(name, a, identity_tol, a.passes(identity_tol));
                const auto b = check_decay_identity(*st, L, quad, 0.0);
                add(name, b, identity_tol, b.passes(identity_tol));
            }
        }
        for (const auto* r : {&r1, &r2}) {
            const auto d = check_dispersion_identity(*r);
            add(r == &r1 ? "K1" : "K2", d, dispersion_tol, d.abs_error < dispersion_tol);
        }
    }

    nlohmann::json summary = nlohmann::json::object();
    if (c.cfg.tdse_deep_well) {
        const auto dw = run_deep_well();
        const bool pass = dw.rel_error < 0.2 && dw.total_drift < 1e-7;
        LeakReport rep = make_report(Identity::Decay, 1.0, dw.fit.rate, dw.expected_rate, 2.0);
        add("tdse deep well V0=50", rep, 0.2, pass);
        summary["tdse"] = {{"root_re_k", dw.root.k.real()},     {"root_im_k", dw.root.k.imag()},
                           {"fitted_rate", dw.fit.rate},         {"expected_rate", dw.expected_rate},
                           {"r_squared", dw.fit.r_squared},      {"box_norm_drift", dw.total_drift},
                           {"flux_mismatch", dw.flux_mismatch}};
        char line[200];
        std::snprintf(line, sizeof line,
                      "tdse: fitted rate %.5f vs 2|Im E| %.5f (%.2f%%), R^2 %.5f, box drift %.1e\n",
                      dw.fit.rate, dw.expected_rate, 100.0 * dw.rel_error, dw.fit.r_squared,
                      dw.total_drift);
        c.err << line;
    }

    Table t{{"check", "identity", "L", "lhs", "rhs", "abs_error", "rel_error", "tolerance", "pass"},
            {}};
    bool ok = true;
    for (const auto& r : rows) {
        t.add({r.name, std::string(to_string(r.rep.identity)), r.rep.half_width, r.rep.lhs,
               r.rep.rhs, r.rep.abs_error, r.rep.rel_error, r.tol, r.pass});
        ok = ok && r.pass;
        char line[256];
        std::snprintf(line, sizeof line, "%s  %-22s %-30s L=%-4g rel %.2e abs %.2e\n",
                      r.pass ? "PASS" : "FAIL", r.name.c_str(),
                      std::string(to_string(r.rep.identity)).c_str(), r.rep.half_width,
                      r.rep.rel_error, r.rep.abs_error);
        c.err << line;
    }
    summary["checks"] = rows.size();
    summary["all_pass"] = ok;
    emit(c, "verify", t, summary);
    return ok ? 0 : 1;
}

inline void add_options(CLI::App& app, RunConfig& cfg) {
    app.add_option("--v0", cfg.v0, "well depth V0 (>= 0)")->capture_default_str();
    app.add_option("--region", cfg.region, "scan region re_min:re_max:im_min:im_max")
        ->capture_default_str();
    app.add_option("--resolution", cfg.resolution, "scan cells per side")->capture_default_str();
    app.add_option("--parity", cfg.parity, "even, odd or both")
        ->check(CLI::IsMember({"even", "odd", "both"}))
        ->capture_default_str();
    app.add_option("--tol", cfg.tol, "root tolerance")->capture_default_str();
    app.add_option("--coeffs", cfg.coeffs, "a1,a2 as complex literals x+yi")->capture_default_str();
    app.add_option("--l0", cfg.l0, "initial half-width L(0)")->capture_default_str();
    app.add_option("--t-end", cfg.t_end, "end time of the domain run")->capture_default_str();
    app.add_option("--step", cfg.step, "RK4 step")->capture_default_str();
    app.add_option("--mode", cfg.mode, "paper, two-edge or both")
        ->check(CLI::IsMember({"paper", "two-edge", "both"}))
        ->capture_default_str();
    app.add_option("--format", cfg.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--out", cfg.out, "output path (default stdout)");
    app.add_option("--pure", cfg.pure, "expand a single resonance (1 = lowest Re K)");
    app.add_flag("--vbar-profile", cfg.vbar_profile, "emit (x, vbar) instead of a trajectory");
    app.add_option("--t", cfg.profile_t, "time of the vbar profile")->capture_default_str();
    app.add_option("--x-max", cfg.x_max, "profile range [-x_max, x_max]")->capture_default_str();
    app.add_option("--samples", cfg.samples, "profile points")->capture_default_str();
    app.add_option("--inject-k", cfg.inject_k, "check a supplied K instead of the solver roots");
    app.add_flag("--tdse-deep-well", cfg.tdse_deep_well, "add the V0 = 50 propagation check");
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Siegert resonances of the square well: roots, expanding domains, checks",
                 "siegert"};
    app.set_config("--config", "", "flat key=value file; flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);
    add_options(app, cfg);
    auto* roots = app.add_subcommand("roots", "list Siegert roots and bound states");
    auto* expand = app.add_subcommand("expand", "integrate the expanding domain");
    auto* verify = app.add_subcommand("verify", "run the leak and decay checks");
    for (auto* sub : {roots, expand, verify}) sub->fallthrough();
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "siegert: " << e.what() << "\n";
        return 2;
    }

    try {
        if (!(cfg.tol > 0.0)) throw UsageError("--tol must be > 0");
        PotentialSpec pot;
        try {
            pot = PotentialSpec(cfg.v0);
        } catch (const PreconditionError& e) {
            throw UsageError(e.what());
        }
        Context c{cfg, out, err, pot, parse_region(cfg.region, cfg.resolution)};
        if (*roots) return cmd_roots(c);
        if (*expand) return cmd_expand(c);
        return cmd_verify(c);
    } catch (const UsageError& e) {
        err << "siegert: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "siegert: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace siegert::cli
