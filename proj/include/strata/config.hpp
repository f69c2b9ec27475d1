#pragma once

/**
 * @file config.hpp
 * @brief Key-value configuration files (one section per concern) parsed into
 *        the typed problem setup: geometry, grid, background, time stepping,
 *        diagnostics and output controls.
 *
 * Format: INI-style sections `[name]`, `key = value` pairs, `#` or `;`
 * comments, comma-separated lists. Layer indices are 1-based in files
 * (degenerate_layer = 0 means none).
 */

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "strata/geometry.hpp"
#include "strata/grid.hpp"
#include "strata/transport.hpp"

namespace strata {

class ConfigFile {
public:
    static ConfigFile parse(std::istream& is) {
        ConfigFile cfg;
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::invalid_argument("config line " +
                                                std::to_string(lineno) +
                                                ": malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            cfg.values_[section + "." + key] = value;
        }
        return cfg;
    }

    static ConfigFile parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw std::invalid_argument("cannot open config file " + path);
        return parse(is);
    }

    bool has(const std::string& section, const std::string& key) const {
        return values_.count(section + "." + key) > 0;
    }

    std::string get_string(const std::string& s, const std::string& k,
                           std::optional<std::string> dflt = std::nullopt) const {
        auto it = values_.find(s + "." + k);
        if (it != values_.end()) return it->second;
        if (dflt) return *dflt;
        throw std::invalid_argument("missing config key [" + s + "] " + k);
    }

    double get_double(const std::string& s, const std::string& k,
                      std::optional<double> dflt = std::nullopt) const {
        auto it = values_.find(s + "." + k);
        if (it == values_.end()) {
            if (dflt) return *dflt;
            throw std::invalid_argument("missing config key [" + s + "] " + k);
        }
        return to_double(it->second, s, k);
    }

    long get_int(const std::string& s, const std::string& k,
                 std::optional<long> dflt = std::nullopt) const {
        const double v = get_double(s, k, dflt ? std::optional<double>(*dflt)
                                               : std::nullopt);
        return static_cast<long>(v);
    }

    bool get_bool(const std::string& s, const std::string& k, bool dflt) const {
        auto it = values_.find(s + "." + k);
        if (it == values_.end()) return dflt;
        std::string v = it->second;
        std::transform(v.begin(), v.end(), v.begin(), ::tolower);
        if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
        if (v == "0" || v == "false" || v == "no" || v == "off") return false;
        throw std::invalid_argument("config key [" + s + "] " + k +
                                    ": expected a boolean, got '" + v + "'");
    }

    std::vector<double> get_list(const std::string& s, const std::string& k,
                                 std::optional<std::vector<double>> dflt =
                                     std::nullopt) const {
        auto it = values_.find(s + "." + k);
        if (it == values_.end()) {
            if (dflt) return *dflt;
            throw std::invalid_argument("missing config key [" + s + "] " + k);
        }
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(to_double(trim(tok), s, k));
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }
    static double to_double(const std::string& v, const std::string& s,
                            const std::string& k) {
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (...) {
            throw std::invalid_argument("config key [" + s + "] " + k +
                                        ": expected a number, got '" + v + "'");
        }
    }

    std::map<std::string, std::string> values_;
};

/// Full problem setup: everything a run needs except the permeability of the
/// degenerate layer, which is supplied per run so sweeps share one setup.
struct ProblemSetup {
    double period = 2.0 * M_PI;
    double depth = 4.0;
    std::vector<double> interfaces{-3.0, -1.0};
    std::vector<double> permeabilities{1.0, 1.0, 1.0};
    std::vector<double> diffusivities{1.0, 1.0, 1.0};
    std::optional<std::size_t> degenerate_layer = std::size_t{1};
    double epsilon = 0.1;
    double c_top = -1.0;
    double c_bottom = 1.0;
    std::optional<double> delta;  ///< defaults to half the admissible bound

    std::vector<int> cells_per_layer{32, 64, 32};
    int nx = 64;
    SimConfig sim;
    double m4_constant = 16.0;
    double tol_scale = 10.0;
    std::string output_directory = "runs/out";

    LayerStack make_stack() const { return make_stack(epsilon); }

    LayerStack make_stack(double eps) const {
        return build_layer_stack(period, depth, interfaces, permeabilities,
                                 diffusivities, degenerate_layer, eps);
    }

    double resolve_delta(const LayerStack& stack) const {
        if (delta) return *delta;
        return max_delta(stack, std::abs(c_top - c_bottom)) / 2.0;
    }

    GridPtr make_grid_for(const LayerStack& stack) const {
        return strata::make_grid(stack, cells_per_layer, nx);
    }

    BackgroundProfile make_profile(const LayerStack& stack, const Grid& grid) const {
        return build_background_profile(stack, c_top, c_bottom,
                                        resolve_delta(stack), grid.z());
    }
};

inline ProblemSetup load_setup(const ConfigFile& cfg) {
    ProblemSetup p;
    p.period = cfg.get_double("domain", "period", 2.0 * M_PI);
    p.depth = cfg.get_double("domain", "depth", 4.0);
    p.interfaces = cfg.get_list("domain", "interfaces", {{-3.0, -1.0}});
    p.permeabilities = cfg.get_list("domain", "permeabilities", {{1.0, 1.0, 1.0}});
    p.diffusivities = cfg.get_list("domain", "diffusivities", {{1.0, 1.0, 1.0}});
    const long deg = cfg.get_int("domain", "degenerate_layer", 2);  // 1-based
    if (deg < 0 || static_cast<std::size_t>(deg) > p.permeabilities.size())
        throw std::invalid_argument("degenerate_layer out of range");
    p.degenerate_layer = deg == 0 ? std::nullopt
                                  : std::optional<std::size_t>(deg - 1);
    p.epsilon = cfg.get_double("domain", "epsilon", 0.1);
    p.c_top = cfg.get_double("domain", "c_top", -1.0);
    p.c_bottom = cfg.get_double("domain", "c_bottom", 1.0);
    if (cfg.has("domain", "delta")) p.delta = cfg.get_double("domain", "delta");

    if (cfg.has("grid", "cells_per_layer")) {
        p.cells_per_layer.clear();
        for (double v : cfg.get_list("grid", "cells_per_layer"))
            p.cells_per_layer.push_back(static_cast<int>(v));
        if (p.cells_per_layer.size() == 1)
            p.cells_per_layer.assign(p.permeabilities.size(),
                                     p.cells_per_layer.front());
    }
    p.nx = static_cast<int>(cfg.get_int("grid", "nx", 64));

    p.sim.dt = cfg.get_double("time", "dt", 8e-4);
    p.sim.t_end = cfg.get_double("time", "t_end", 1.0);
    p.sim.cfl = cfg.get_double("time", "cfl", 0.9);
    p.sim.adaptive = cfg.get_bool("time", "adaptive", true);
    p.sim.output_every = static_cast<int>(cfg.get_int("time", "output_every", 100));
    p.sim.diagnostics_every =
        static_cast<int>(cfg.get_int("time", "diagnostics_every", 1));
    p.sim.single_threaded = cfg.get_bool("time", "single_threaded", true);
    p.sim.velocity_off = cfg.get_bool("time", "velocity_off", false);

    const std::string preset = cfg.get_string("initial", "preset", "single_mode");
    if (preset == "zero") p.sim.initial.preset = InitialCondition::Preset::Zero;
    else if (preset == "single_mode")
        p.sim.initial.preset = InitialCondition::Preset::SingleMode;
    else if (preset == "random")
        p.sim.initial.preset = InitialCondition::Preset::Random;
    else if (preset == "file")
        p.sim.initial.preset = InitialCondition::Preset::File;
    else
        throw std::invalid_argument("unknown initial preset '" + preset + "'");
    p.sim.initial.amplitude = cfg.get_double("initial", "amplitude", 0.1);
    p.sim.initial.mode = static_cast<int>(cfg.get_int("initial", "mode", 1));
    p.sim.initial.vertical = static_cast<int>(cfg.get_int("initial", "vertical", 1));
    p.sim.initial.seed =
        static_cast<std::uint64_t>(cfg.get_int("initial", "seed", 1));
    p.sim.initial.path = cfg.get_string("initial", "file", std::string{});

    p.m4_constant = cfg.get_double("estimates", "m4_constant", 16.0);
    p.tol_scale = cfg.get_double("estimates", "tol_scale", 10.0);
    p.output_directory = cfg.get_string("output", "directory", "runs/out");
    return p;
}

inline ProblemSetup load_setup_file(const std::string& path) {
    return load_setup(ConfigFile::parse_file(path));
}

/// Canonical round-trippable rendering of a setup (written into run
/// directories so results stay reproducible from their inputs).
inline std::string render_setup(const ProblemSetup& p) {
    std::ostringstream os;
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    auto list = [&](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + num(v[i]);
        return s;
    };
    os << "[domain]\n";
    os << "period = " << num(p.period) << "\n";
    os << "depth = " << num(p.depth) << "\n";
    os << "interfaces = " << list(p.interfaces) << "\n";
    os << "permeabilities = " << list(p.permeabilities) << "\n";
    os << "diffusivities = " << list(p.diffusivities) << "\n";
    os << "degenerate_layer = "
       << (p.degenerate_layer ? *p.degenerate_layer + 1 : 0) << "\n";
    os << "epsilon = " << num(p.epsilon) << "\n";
    os << "c_top = " << num(p.c_top) << "\n";
    os << "c_bottom = " << num(p.c_bottom) << "\n";
    if (p.delta) os << "delta = " << num(*p.delta) << "\n";
    os << "\n[grid]\n";
    os << "cells_per_layer = ";
    for (std::size_t i = 0; i < p.cells_per_layer.size(); ++i)
        os << (i ? ", " : "") << p.cells_per_layer[i];
    os << "\nnx = " << p.nx << "\n";
    os << "\n[time]\n";
    os << "dt = " << num(p.sim.dt) << "\n";
    os << "t_end = " << num(p.sim.t_end) << "\n";
    os << "cfl = " << num(p.sim.cfl) << "\n";
    os << "adaptive = " << (p.sim.adaptive ? "true" : "false") << "\n";
    os << "output_every = " << p.sim.output_every << "\n";
    os << "diagnostics_every = " << p.sim.diagnostics_every << "\n";
    os << "single_threaded = " << (p.sim.single_threaded ? "true" : "false") << "\n";
    os << "velocity_off = " << (p.sim.velocity_off ? "true" : "false") << "\n";
    os << "\n[initial]\n";
    const char* preset = "single_mode";
    switch (p.sim.initial.preset) {
        case InitialCondition::Preset::Zero: preset = "zero"; break;
        case InitialCondition::Preset::SingleMode: preset = "single_mode"; break;
        case InitialCondition::Preset::Random: preset = "random"; break;
        case InitialCondition::Preset::File: preset = "file"; break;
    }
    os << "preset = " << preset << "\n";
    os << "amplitude = " << num(p.sim.initial.amplitude) << "\n";
    os << "mode = " << p.sim.initial.mode << "\n";
    os << "vertical = " << p.sim.initial.vertical << "\n";
    os << "seed = " << p.sim.initial.seed << "\n";
    if (!p.sim.initial.path.empty()) os << "file = " << p.sim.initial.path << "\n";
    os << "\n[estimates]\n";
    os << "m4_constant = " << num(p.m4_constant) << "\n";
    os << "tol_scale = " << num(p.tol_scale) << "\n";
    os << "\n[output]\n";
    os << "directory = " << p.output_directory << "\n";
    return os.str();
}

}  // namespace strata
