// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command-line driver. Settings come from an optional key=value file and flags;
// flags win over the file.

#include "wgcd/adapt.hpp"
#include "wgcd/bench.hpp"
#include "wgcd/estimator.hpp"
#include "wgcd/mesh.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace wgcd {

struct RunConfig {
    std::string benchmark; // boundary_layer | internal_layer | manufactured
    double eps = 1.0;
    int k = 2;
    int levels = 11;
    std::string mode = "adaptive"; // adaptive | uniform
    double fraction = 0.25;
    int n0 = 16;
    EdgeWeightMode edge_weight_mode = EdgeWeightMode::literal;
    std::string outdir = ".";
    bool dump_meshes = false;
    bool dump_indicators = false;
    bool dump_solutions = false;
    double solver_tol = 1e-10;
    unsigned seed = 2024; // manufactured benchmark only
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_value(const std::string& key, const std::string& value)
{
    std::istringstream in(value);
    T out{};
    in >> out;
    if (in.fail() || !(in >> std::ws).eof())
        throw ConfigError("invalid value '" + value + "' for " + key);
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& value)
{
    if (value == "1" || value == "true" || value == "yes" || value == "on")
        return true;
    if (value == "0" || value == "false" || value == "no" || value == "off")
        return false;
    throw ConfigError("invalid boolean '" + value + "' for " + key);
}

} // namespace detail

/// Applies one setting. Keys use dashes; underscores are accepted as well.
inline void set_config_value(RunConfig& cfg, std::string key, const std::string& value)
{
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "benchmark")
        cfg.benchmark = value;
    else if (key == "eps")
        cfg.eps = detail::parse_value<double>(key, value);
    else if (key == "k")
        cfg.k = detail::parse_value<int>(key, value);
    else if (key == "levels")
        cfg.levels = detail::parse_value<int>(key, value);
    else if (key == "mode")
        cfg.mode = value;
    else if (key == "fraction")
        cfg.fraction = detail::parse_value<double>(key, value);
    else if (key == "n0")
        cfg.n0 = detail::parse_value<int>(key, value);
    else if (key == "edge-weight-mode") {
        try {
            cfg.edge_weight_mode = parse_edge_weight_mode(value);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "outdir")
        cfg.outdir = value;
    else if (key == "dump-meshes")
        cfg.dump_meshes = detail::parse_bool(key, value);
    else if (key == "dump-indicators")
        cfg.dump_indicators = detail::parse_bool(key, value);
    else if (key == "dump-solutions")
        cfg.dump_solutions = detail::parse_bool(key, value);
    else if (key == "solver-tol")
        cfg.solver_tol = detail::parse_value<double>(key, value);
    else if (key == "seed")
        cfg.seed = detail::parse_value<unsigned>(key, value);
    else
        throw ConfigError("unknown config key '" + key + "'");
}

/// Reads `key = value` lines; blank lines and lines starting with '#' are skipped.
inline void load_config(RunConfig& cfg, std::istream& in)
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        set_config_value(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
}

inline void validate(const RunConfig& cfg)
{
    if (cfg.benchmark.empty())
        throw ConfigError("missing benchmark name");
    if (cfg.benchmark != "boundary_layer" && cfg.benchmark != "internal_layer" && cfg.benchmark != "manufactured")
        throw ConfigError("unknown benchmark '" + cfg.benchmark + "'");
    if (!(cfg.eps > 0.0))
        throw ConfigError("eps must be positive");
    if (cfg.k < 1 || cfg.k > 15)
        throw ConfigError("k must lie in [1, 15]");
    if (cfg.levels < 1)
        throw ConfigError("levels must be at least 1");
    if (cfg.mode != "adaptive" && cfg.mode != "uniform")
        throw ConfigError("mode must be 'adaptive' or 'uniform'");
    if (!(cfg.fraction > 0.0 && cfg.fraction <= 1.0))
        throw ConfigError("fraction must lie in (0, 1]");
    if (cfg.n0 < 1)
        throw ConfigError("n0 must be at least 1");
    if (!(cfg.solver_tol > 0.0))
        throw ConfigError("solver-tol must be positive");
    if (cfg.outdir.empty())
        throw ConfigError("outdir must not be empty");
}

inline Benchmark make_benchmark(const RunConfig& cfg)
{
    if (cfg.benchmark == "boundary_layer")
        return boundary_layer(cfg.eps);
    if (cfg.benchmark == "internal_layer")
        return internal_layer(cfg.eps);
    if (cfg.benchmark == "manufactured")
        return manufactured_poly(cfg.k, cfg.seed, cfg.eps);
    throw ConfigError("unknown benchmark '" + cfg.benchmark + "'");
}

inline void print_summary(std::ostream& os, const std::vector<ConvergenceRecord>& records)
{
    char line[160];
    std::snprintf(line, sizeof line, "%5s %8s %9s %12s %12s %12s %12s %8s\n", "level", "cells", "dofs", "eta",
                  "energy_err", "star_err", "osc", "eff");
    os << line;
    auto fmt = [](std::optional<double> v, int width) {
        char buf[32];
        if (v)
            std::snprintf(buf, sizeof buf, "%*.4e", width, *v);
        else
            std::snprintf(buf, sizeof buf, "%*s", width, "-");
        return std::string(buf);
    };
    for (const ConvergenceRecord& r : records) {
        std::snprintf(line, sizeof line, "%5d %8d %9d ", r.level, r.cells, r.dofs);
        os << line << fmt(r.eta, 12) << ' ' << fmt(r.energy_err, 12) << ' ' << fmt(r.star_err, 12) << ' '
           << fmt(r.osc, 12);
        const auto eff = r.effectivity();
        if (eff) {
            std::snprintf(line, sizeof line, " %8.3f", *eff);
            os << line;
        } else {
            os << "        -";
        }
        os << '\n';
    }
}

/// Runs a validated configuration; returns the exit status (0 ok, 2 bad config, 3 solver failure).
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    namespace fs = std::filesystem;
    const fs::path dir(cfg.outdir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "error: cannot create output directory " << dir << ": " << ec.message() << '\n';
        return 2;
    }
    std::ofstream csv(dir / "convergence.csv", std::ios::trunc);
    if (!csv) {
        err << "error: cannot write " << (dir / "convergence.csv") << '\n';
        return 2;
    }
    csv << convergence_csv_header() << '\n';

    const Benchmark bm = make_benchmark(cfg);
    AdaptOptions opt;
    opt.k = cfg.k;
    opt.levels = cfg.levels;
    opt.fraction = cfg.fraction;
    opt.n0 = cfg.n0;
    opt.uniform = cfg.mode == "uniform";
    opt.estimator.edge_weight_mode = cfg.edge_weight_mode;
    opt.solver.tol = cfg.solver_tol;
    opt.on_level = [&](const LevelData& d) {
        write_convergence_row(csv, d.record);
        csv.flush();
        const std::string tag = std::to_string(d.level);
        if (cfg.dump_meshes) {
            std::ofstream m(dir / ("mesh_" + tag + ".txt"));
            write_mesh(m, d.mesh);
        }
        if (cfg.dump_indicators) {
            std::ofstream ind(dir / ("indicators_" + tag + ".csv"));
            write_estimator_csv(ind, d.report);
        }
        if (cfg.dump_solutions) {
            std::ofstream s(dir / ("solution_" + tag + ".txt"));
            write_wg_function(s, d.mesh, d.solution);
        }
    };

    try {
        const AdaptResult result = adaptive_loop(bm, opt);
        out << bm.name << " eps=" << cfg.eps << " k=" << cfg.k << " mode=" << cfg.mode << '\n';
        print_summary(out, result.records);
    } catch (const SingularMatrixError& e) {
        err << "solver failure: " << e.what() << '\n';
        return 3;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return 3;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

/// Parses argv into a configuration; CLI parse errors and help requests are reported via the return code.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Adaptive weak Galerkin solver for convection-diffusion-reaction problems"};
    std::string config_path;
    app.add_option("--config", config_path, "key=value settings file (flags take precedence)");

    const std::vector<std::pair<std::string, std::string>> value_flags = {
        {"benchmark", "boundary_layer | internal_layer | manufactured"},
        {"eps", "diffusion coefficient"},
        {"k", "polynomial degree"},
        {"levels", "number of solve levels"},
        {"mode", "adaptive | uniform"},
        {"fraction", "marked fraction of cells (default 0.25)"},
        {"n0", "initial grid is n0 x n0 (default 16)"},
        {"outdir", "output directory"},
        {"edge-weight-mode", "literal | squared"},
        {"solver-tol", "relative residual tolerance"},
        {"seed", "coefficient seed for the manufactured benchmark"},
    };
    std::map<std::string, std::string> given;
    std::vector<std::pair<std::string, CLI::Option*>> opts;
    for (const auto& [name, help] : value_flags)
        opts.emplace_back(name, app.add_option("--" + name, given[name], help));
    bool dump_meshes = false;
    bool dump_indicators = false;
    bool dump_solutions = false;
    app.add_flag("--dump-meshes", dump_meshes, "write mesh_L.txt per level");
    app.add_flag("--dump-indicators", dump_indicators, "write indicators_L.csv per level");
    app.add_flag("--dump-solutions", dump_solutions, "write solution_L.txt per level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                throw ConfigError("cannot read config file '" + config_path + "'");
            load_config(cfg, in);
        }
        for (const auto& [name, opt] : opts)
            if (opt->count() > 0)
                set_config_value(cfg, name, given[name]);
        if (dump_meshes)
            cfg.dump_meshes = true;
        if (dump_indicators)
            cfg.dump_indicators = true;
        if (dump_solutions)
            cfg.dump_solutions = true;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return run(cfg, out, err);
}

} // namespace wgcd
