#pragma once

/// @file experiment.hpp
/// @brief YAML scenario configuration and the end-to-end runner that writes
///        the CSV / SVG artifact tree.
///
/// Grammar (every key optional; an empty document is the baseline scenario):
///
///     scenario: baseline
///     grid:        { cells: 128 }
///     time:        { total: 1.0, outer_dt: 0.01, control_dt_ratio: 0.02 }
///     prediction_times: [0.01, 0.1, 1.0]
///     physics:     { sigma2: 0.05, input_bound: 1.0, density_floor: 1.0e-8 }
///     initial:     { kind: gaussian | uniform, center: 0.5, width: 0.02 }
///     solver:      { tol, max_iters, damping, norm: linf | l2,
///                    hamiltonian: central | upwind,
///                    constraint: post_hoc | in_hamiltonian,
///                    min_window_steps, max_inner_dt, max_refinements,
///                    warm_start, magnitude_cap, cfl_limit }
///     brs:         { dt: 2.0e-5, reference: clamped | unclamped }
///     particles:   { enabled: false, prediction_time: 0.1, count: 100000,
///                    seed: 20200101, substeps: 2, times: [0.25, 1.0] }
///     output:      { directory: baseline, plots: true }
///
/// Unknown keys are errors. The Gaussian initial density is
/// exp(-(x - center)^2 / width) / sqrt(pi width), renormalized on the grid.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "mfgcov/brs.hpp"
#include "mfgcov/csv.hpp"
#include "mfgcov/errors.hpp"
#include "mfgcov/fp.hpp"
#include "mfgcov/grid.hpp"
#include "mfgcov/metrics.hpp"
#include "mfgcov/mp_mfg.hpp"
#include "mfgcov/plot.hpp"

namespace mfgcov {

/// Every problem found while reading a config, each prefixed by its key path.
class ConfigInvalid : public std::runtime_error {
public:
    explicit ConfigInvalid(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
    [[nodiscard]] const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string s = "invalid config";
        for (const auto& i : issues) s += "\n  " + i;
        return s;
    }
    std::vector<std::string> issues_;
};

enum class InitialKind { Gaussian, Uniform };

struct InitialDensity {
    InitialKind kind = InitialKind::Gaussian;
    double center = 0.5;
    double width = 0.02;

    bool operator==(const InitialDensity&) const = default;
};

struct BrsSettings {
    double dt = 2e-5;
    bool reference_clamped = true;  ///< which BRS run the distance table compares against

    bool operator==(const BrsSettings&) const = default;
};

struct ParticleSettings {
    bool enabled = false;
    double prediction_time = 0.1;
    std::size_t count = 100000;
    std::uint64_t seed = 20200101;
    std::size_t substeps = 2;
    std::vector<double> times{0.25, 1.0};

    bool operator==(const ParticleSettings&) const = default;
};

struct ExperimentConfig {
    std::string scenario = "baseline";
    int cells = 128;
    double total_time = 1.0;
    double outer_dt = 0.01;
    double control_dt_ratio = 0.02;
    std::vector<double> prediction_times{0.01, 0.1, 1.0};
    double sigma2 = 0.05;
    double input_bound = 1.0;
    double density_floor = CostModel::kDefaultDensityFloor;
    InitialDensity initial{};
    MfgConfig inner{};
    PdeOptions pde{};
    std::size_t min_window_steps = 50;
    double max_inner_dt = 1e-3;
    std::size_t max_refinements = 6;
    bool warm_start = true;
    BrsSettings brs{};
    ParticleSettings particles{};
    std::string output_directory = "baseline";
    bool plots = true;

    bool operator==(const ExperimentConfig&) const = default;

    [[nodiscard]] Grid grid() const { return Grid(cells); }

    [[nodiscard]] Field initial_density() const {
        const Grid g = grid();
        if (initial.kind == InitialKind::Uniform) return Field(g, std::vector<double>(g.size(), 1.0));
        const double c = initial.center;
        const double w = initial.width;
        return normalize_density(Field::sample(g, [c, w](double x) {
            return std::exp(-(x - c) * (x - c) / w) / std::sqrt(std::numbers::pi * w);
        }));
    }

    [[nodiscard]] MpMfgConfig mp_mfg(double prediction_time) const {
        MpMfgConfig c;
        c.prediction_time = prediction_time;
        c.outer_dt = outer_dt;
        c.control_dt_ratio = control_dt_ratio;
        c.total_time = total_time;
        c.inner = inner;
        c.sigma2 = sigma2;
        c.density_floor = density_floor;
        c.input_bound = input_bound;
        c.options = pde;
        c.min_window_steps = min_window_steps;
        c.max_inner_dt = max_inner_dt;
        c.max_refinements = max_refinements;
        c.warm_start = warm_start;
        return c;
    }

    [[nodiscard]] BrsConfig brs_config(bool clamp) const {
        BrsConfig b;
        b.total_time = total_time;
        b.record_dt = outer_dt;
        b.dt = brs.dt;
        b.sigma2 = sigma2;
        b.cost.density_floor = density_floor;
        b.input_bound = input_bound;
        b.clamp = clamp;
        return b;
    }
};

namespace detail {

class ConfigReader {
public:
    std::vector<std::string> issues;

    void keys(const YAML::Node& map, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!map.IsMap()) return;
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
                issues.push_back(join(path, key) + ": unknown key");
            }
        }
    }

    /// The sub-map at `key`, or a null node when absent or malformed.
    YAML::Node section(const YAML::Node& map, const std::string& path, const char* key) {
        if (!map.IsMap()) return {};
        const YAML::Node n = map[key];
        if (!n.IsDefined() || n.IsNull()) return {};
        if (!n.IsMap()) {
            issues.push_back(join(path, key) + ": expected a mapping");
            return {};
        }
        return n;
    }

    void read(const YAML::Node& map, const std::string& path, const char* key, double& out) {
        if (auto s = scalar(map, path, key)) {
            double v = 0.0;
            if (parse(*s, v) && std::isfinite(v)) {
                out = v;
            } else {
                issues.push_back(join(path, key) + ": expected a finite number, got '" + *s + "'");
            }
        }
    }

    template <class Int>
        requires std::is_integral_v<Int>
    void read(const YAML::Node& map, const std::string& path, const char* key, Int& out) {
        if (auto s = scalar(map, path, key)) {
            Int v{};
            if (parse(*s, v)) {
                out = v;
            } else {
                issues.push_back(join(path, key) + ": expected a " +
                                 (std::is_signed_v<Int> ? "integer" : "nonnegative integer") + ", got '" + *s + "'");
            }
        }
    }

    void read(const YAML::Node& map, const std::string& path, const char* key, bool& out) {
        if (auto s = scalar(map, path, key)) {
            if (*s == "true") {
                out = true;
            } else if (*s == "false") {
                out = false;
            } else {
                issues.push_back(join(path, key) + ": expected true or false, got '" + *s + "'");
            }
        }
    }

    void read(const YAML::Node& map, const std::string& path, const char* key, std::string& out) {
        if (auto s = scalar(map, path, key)) out = *s;
    }

    void read(const YAML::Node& map, const std::string& path, const char* key, std::vector<double>& out) {
        if (!map.IsMap()) return;
        const YAML::Node n = map[key];
        if (!n.IsDefined()) return;
        if (!n.IsSequence()) {
            issues.push_back(join(path, key) + ": expected a list of numbers");
            return;
        }
        std::vector<double> vals;
        for (std::size_t i = 0; i < n.size(); ++i) {
            double v = 0.0;
            if (!n[i].IsScalar() || !parse(n[i].Scalar(), v) || !std::isfinite(v)) {
                issues.push_back(join(path, key) + "[" + std::to_string(i) + "]: expected a finite number");
                return;
            }
            vals.push_back(v);
        }
        out = std::move(vals);
    }

    template <class Enum>
    void choice(const YAML::Node& map, const std::string& path, const char* key, Enum& out,
                std::initializer_list<std::pair<const char*, Enum>> options) {
        if (auto s = scalar(map, path, key)) {
            for (const auto& [name, value] : options) {
                if (*s == name) {
                    out = value;
                    return;
                }
            }
            std::string names;
            for (const auto& o : options) names += (names.empty() ? "" : ", ") + std::string(o.first);
            issues.push_back(join(path, key) + ": expected one of " + names + ", got '" + *s + "'");
        }
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

private:
    std::optional<std::string> scalar(const YAML::Node& map, const std::string& path, const char* key) {
        if (!map.IsMap()) return std::nullopt;
        const YAML::Node n = map[key];
        if (!n.IsDefined()) return std::nullopt;
        if (!n.IsScalar()) {
            issues.push_back(join(path, key) + ": expected a scalar");
            return std::nullopt;
        }
        return n.Scalar();
    }

    template <class T>
    static bool parse(const std::string& s, T& v) {
        const char* first = s.data();
        const char* last = s.data() + s.size();
        if (first != last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, v);
        return ec == std::errc{} && ptr == last && first != last;
    }
};

inline bool is_multiple(double a, double b) {
    const double q = a / b;
    return std::llround(q) >= 1 && std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q);
}

inline std::vector<std::string> check(const ExperimentConfig& c) {
    std::vector<std::string> bad;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) bad.push_back(msg);
    };
    need(!c.scenario.empty(), "scenario: must not be empty");
    need(c.cells >= Grid::kMinCells, "grid.cells: must be >= " + std::to_string(Grid::kMinCells));
    need(c.total_time > 0.0, "time.total: must be > 0");
    need(c.outer_dt > 0.0, "time.outer_dt: must be > 0");
    if (c.total_time > 0.0 && c.outer_dt > 0.0) {
        need(is_multiple(c.total_time, c.outer_dt), "time.total: must be a positive multiple of time.outer_dt");
    }
    need(c.control_dt_ratio > 0.0 && c.control_dt_ratio <= 1.0, "time.control_dt_ratio: must lie in (0, 1]");
    need(!c.prediction_times.empty(), "prediction_times: must not be empty");
    std::set<double> seen;
    for (std::size_t i = 0; i < c.prediction_times.size(); ++i) {
        const double t = c.prediction_times[i];
        const std::string p = "prediction_times[" + std::to_string(i) + "]";
        if (!(t > 0.0)) {
            bad.push_back(p + ": must be > 0");
            continue;
        }
        need(seen.insert(t).second, p + ": duplicate value");
        need(!(c.outer_dt > t * (1.0 + 1e-12)), p + ": time.outer_dt " + csv::format(c.outer_dt) +
                                                    " exceeds the prediction time " + csv::format(t) +
                                                    " (outer step must satisfy dt <= T_pred)");
    }
    need(c.sigma2 >= 0.0, "physics.sigma2: must be >= 0");
    need(c.input_bound > 0.0, "physics.input_bound: must be > 0");
    need(c.density_floor > 0.0 && c.density_floor <= 1e-4, "physics.density_floor: must lie in (0, 1e-4]");
    if (c.initial.kind == InitialKind::Gaussian) {
        need(c.initial.width > 0.0, "initial.width: must be > 0");
        need(c.initial.center >= 0.0 && c.initial.center <= 1.0, "initial.center: must lie in [0, 1]");
    }
    need(c.inner.tol > 0.0, "solver.tol: must be > 0");
    need(c.inner.max_iters > 0, "solver.max_iters: must be > 0");
    need(c.inner.damping > 0.0 && c.inner.damping <= 1.0, "solver.damping: must lie in (0, 1]");
    need(c.min_window_steps > 0, "solver.min_window_steps: must be > 0");
    need(c.max_inner_dt > 0.0, "solver.max_inner_dt: must be > 0");
    need(c.pde.magnitude_cap > 0.0, "solver.magnitude_cap: must be > 0");
    need(c.pde.cfl_limit > 0.0, "solver.cfl_limit: must be > 0");
    need(c.brs.dt > 0.0, "brs.dt: must be > 0");
    need(!(c.brs.dt > c.outer_dt), "brs.dt: must not exceed time.outer_dt");
    if (c.particles.enabled) {
        need(c.particles.count > 0, "particles.count: must be > 0");
        need(c.particles.substeps > 0, "particles.substeps: must be > 0");
        need(std::find(c.prediction_times.begin(), c.prediction_times.end(), c.particles.prediction_time) !=
                 c.prediction_times.end(),
             "particles.prediction_time: must be one of prediction_times");
        for (std::size_t i = 0; i < c.particles.times.size(); ++i) {
            const double t = c.particles.times[i];
            const bool on_grid = t == 0.0 || (t > 0.0 && is_multiple(t, c.outer_dt));
            need(on_grid && t <= c.total_time * (1.0 + 1e-12),
                 "particles.times[" + std::to_string(i) + "]: must be a multiple of time.outer_dt within [0, time.total]");
        }
        need(std::is_sorted(c.particles.times.begin(), c.particles.times.end()), "particles.times: must be sorted");
    }
    need(!c.output_directory.empty(), "output.directory: must not be empty");
    return bad;
}

}  // namespace detail

/// Parses, defaults and checks a YAML config. Throws ConfigInvalid listing every problem.
[[nodiscard]] inline ExperimentConfig validate_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigInvalid({std::string("yaml: ") + e.what()});
    }
    ExperimentConfig c;
    detail::ConfigReader r;
    if (root.IsDefined() && !root.IsNull() && !root.IsMap()) throw ConfigInvalid({"top level: expected a mapping"});

    r.keys(root, "", {"scenario", "grid", "time", "prediction_times", "physics", "initial", "solver", "brs",
                      "particles", "output"});
    r.read(root, "", "scenario", c.scenario);
    r.read(root, "", "prediction_times", c.prediction_times);

    const auto grid = r.section(root, "", "grid");
    r.keys(grid, "grid", {"cells"});
    r.read(grid, "grid", "cells", c.cells);

    const auto time = r.section(root, "", "time");
    r.keys(time, "time", {"total", "outer_dt", "control_dt_ratio"});
    r.read(time, "time", "total", c.total_time);
    r.read(time, "time", "outer_dt", c.outer_dt);
    r.read(time, "time", "control_dt_ratio", c.control_dt_ratio);

    const auto phys = r.section(root, "", "physics");
    r.keys(phys, "physics", {"sigma2", "input_bound", "density_floor"});
    r.read(phys, "physics", "sigma2", c.sigma2);
    r.read(phys, "physics", "input_bound", c.input_bound);
    r.read(phys, "physics", "density_floor", c.density_floor);

    const auto init = r.section(root, "", "initial");
    r.keys(init, "initial", {"kind", "center", "width"});
    r.choice(init, "initial", "kind", c.initial.kind,
             {{"gaussian", InitialKind::Gaussian}, {"uniform", InitialKind::Uniform}});
    r.read(init, "initial", "center", c.initial.center);
    r.read(init, "initial", "width", c.initial.width);

    const auto sol = r.section(root, "", "solver");
    r.keys(sol, "solver", {"tol", "max_iters", "damping", "norm", "hamiltonian", "constraint", "min_window_steps",
                           "max_inner_dt", "max_refinements", "warm_start", "magnitude_cap", "cfl_limit"});
    r.read(sol, "solver", "tol", c.inner.tol);
    r.read(sol, "solver", "max_iters", c.inner.max_iters);
    r.read(sol, "solver", "damping", c.inner.damping);
    r.choice(sol, "solver", "norm", c.inner.norm_kind, {{"linf", NormKind::Linf}, {"l2", NormKind::L2}});
    r.choice(sol, "solver", "hamiltonian", c.pde.hamiltonian,
             {{"central", HamiltonianScheme::Central}, {"upwind", HamiltonianScheme::Upwind}});
    r.choice(sol, "solver", "constraint", c.pde.constraint,
             {{"post_hoc", InputConstraint::PostHoc}, {"in_hamiltonian", InputConstraint::InHamiltonian}});
    r.read(sol, "solver", "min_window_steps", c.min_window_steps);
    r.read(sol, "solver", "max_inner_dt", c.max_inner_dt);
    r.read(sol, "solver", "max_refinements", c.max_refinements);
    r.read(sol, "solver", "warm_start", c.warm_start);
    r.read(sol, "solver", "magnitude_cap", c.pde.magnitude_cap);
    r.read(sol, "solver", "cfl_limit", c.pde.cfl_limit);

    const auto brs = r.section(root, "", "brs");
    r.keys(brs, "brs", {"dt", "reference"});
    r.read(brs, "brs", "dt", c.brs.dt);
    r.choice(brs, "brs", "reference", c.brs.reference_clamped, {{"clamped", true}, {"unclamped", false}});

    const auto part = r.section(root, "", "particles");
    r.keys(part, "particles", {"enabled", "prediction_time", "count", "seed", "substeps", "times"});
    r.read(part, "particles", "enabled", c.particles.enabled);
    r.read(part, "particles", "prediction_time", c.particles.prediction_time);
    r.read(part, "particles", "count", c.particles.count);
    r.read(part, "particles", "seed", c.particles.seed);
    r.read(part, "particles", "substeps", c.particles.substeps);
    r.read(part, "particles", "times", c.particles.times);

    const auto out = r.section(root, "", "output");
    r.keys(out, "output", {"directory", "plots"});
    r.read(out, "output", "directory", c.output_directory);
    r.read(out, "output", "plots", c.plots);

    auto issues = std::move(r.issues);
    for (auto& i : detail::check(c)) issues.push_back(std::move(i));
    if (!issues.empty()) throw ConfigInvalid(std::move(issues));
    return c;
}

/// Canonical YAML form; validate_config(to_yaml(c)) == c.
[[nodiscard]] inline std::string to_yaml(const ExperimentConfig& c) {
    auto num = [](double v) { return csv::format(v); };
    auto list = [&](const std::vector<double>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
        return s + "]";
    };
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
    auto quoted = [](const std::string& v) {
        std::string q = "\"";
        for (char ch : v) {
            if (ch == '"' || ch == '\\') q += '\\';
            q += ch;
        }
        return q + "\"";
    };
    std::string s;
    s += "scenario: " + quoted(c.scenario) + "\n";
    s += "grid:\n  cells: " + std::to_string(c.cells) + "\n";
    s += "time:\n  total: " + num(c.total_time) + "\n  outer_dt: " + num(c.outer_dt) +
         "\n  control_dt_ratio: " + num(c.control_dt_ratio) + "\n";
    s += "prediction_times: " + list(c.prediction_times) + "\n";
    s += "physics:\n  sigma2: " + num(c.sigma2) + "\n  input_bound: " + num(c.input_bound) +
         "\n  density_floor: " + num(c.density_floor) + "\n";
    s += "initial:\n  kind: " + std::string(c.initial.kind == InitialKind::Gaussian ? "gaussian" : "uniform") +
         "\n  center: " + num(c.initial.center) + "\n  width: " + num(c.initial.width) + "\n";
    s += "solver:\n  tol: " + num(c.inner.tol) + "\n  max_iters: " + std::to_string(c.inner.max_iters) +
         "\n  damping: " + num(c.inner.damping) +
         "\n  norm: " + std::string(c.inner.norm_kind == NormKind::Linf ? "linf" : "l2") +
         "\n  hamiltonian: " + std::string(c.pde.hamiltonian == HamiltonianScheme::Central ? "central" : "upwind") +
         "\n  constraint: " + std::string(c.pde.constraint == InputConstraint::PostHoc ? "post_hoc" : "in_hamiltonian") +
         "\n  min_window_steps: " + std::to_string(c.min_window_steps) + "\n  max_inner_dt: " + num(c.max_inner_dt) +
         "\n  max_refinements: " + std::to_string(c.max_refinements) + "\n  warm_start: " + flag(c.warm_start) +
         "\n  magnitude_cap: " + num(c.pde.magnitude_cap) + "\n  cfl_limit: " + num(c.pde.cfl_limit) + "\n";
    s += "brs:\n  dt: " + num(c.brs.dt) + "\n  reference: " + (c.brs.reference_clamped ? "clamped" : "unclamped") + "\n";
    s += "particles:\n  enabled: " + flag(c.particles.enabled) + "\n  prediction_time: " +
         num(c.particles.prediction_time) + "\n  count: " + std::to_string(c.particles.count) +
         "\n  seed: " + std::to_string(c.particles.seed) + "\n  substeps: " + std::to_string(c.particles.substeps) +
         "\n  times: " + list(c.particles.times) + "\n";
    s += "output:\n  directory: " + quoted(c.output_directory) + "\n  plots: " + flag(c.plots) + "\n";
    return s;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct RunOptions {
    std::filesystem::path output_root = ".";
    std::optional<bool> plots;  ///< overrides cfg.plots when set
};

/// Resolves the output root: an explicit path wins, then MFGCOV_OUTPUT_ROOT, then ".".
[[nodiscard]] inline std::filesystem::path output_root_from_env(const std::optional<std::string>& explicit_root) {
    if (explicit_root && !explicit_root->empty()) return *explicit_root;
    if (const char* env = std::getenv("MFGCOV_OUTPUT_ROOT"); env != nullptr && *env != '\0') return env;
    return ".";
}

struct PredictionSummary {
    double prediction_time = 0.0;
    std::size_t windows = 0;
    std::size_t total_iters = 0;
    std::size_t max_iters = 0;
    std::size_t max_window_steps = 0;
    double max_residual = 0.0;
    double max_abs_u = 0.0;
    double jbar_start = 0.0;
    double jbar_end = 0.0;
    double max_mass_error = 0.0;
    double min_density = 0.0;
    StrategyDistance distance{};
};

struct ExperimentReport {
    std::filesystem::path directory;
    std::vector<std::filesystem::path> files;  ///< relative to directory, in write order
    std::vector<PredictionSummary> predictions;
    std::vector<MpMfgTrajectory> mp_mfg;  ///< one per prediction time, same order
    std::optional<MpMfgTrajectory> brs;
    std::optional<MpMfgTrajectory> brs_clamped;
};

/// `mpmfg_T0.01` etc.
[[nodiscard]] inline std::string prediction_dir(double prediction_time) {
    return "mpmfg_T" + csv::format(prediction_time);
}

namespace detail {

inline std::string series_table(const char* name, const EvalSeries& s) {
    std::string out = std::string("t,") + name + "\n";
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        csv::append_time(out, s.times[k]);
        out += ',';
        csv::append(out, s.values[k]);
        out += '\n';
    }
    return out;
}

inline std::string window_table(const MpMfgTrajectory& traj) {
    std::string out = "step,t,iters,residual,window_steps,max_mass_error,min_density,terminal_max_abs\n";
    const double dt = traj.control_u ? traj.control_u->dt() : traj.rho.dt();
    for (std::size_t c = 0; c < traj.per_step_diagnostics.size(); ++c) {
        const auto& d = traj.per_step_diagnostics[c];
        csv::append(out, c);
        out += ',';
        csv::append_time(out, static_cast<double>(c) * dt);
        out += ',';
        csv::append(out, d.iters);
        out += ',';
        csv::append(out, d.residual);
        out += ',';
        csv::append(out, d.window_steps);
        out += ',';
        csv::append(out, d.max_mass_error);
        out += ',';
        csv::append(out, d.min_density);
        out += ',';
        csv::append(out, d.terminal_max_abs);
        out += '\n';
    }
    return out;
}

class ArtifactWriter {
public:
    ArtifactWriter(std::filesystem::path dir, ExperimentReport& report) : dir_(std::move(dir)), report_(report) {}

    void text(const std::filesystem::path& rel, const std::string& body) {
        csv::write_file(dir_ / rel, body);
        report_.files.push_back(rel);
    }

    [[nodiscard]] std::filesystem::path path(const std::filesystem::path& rel) {
        report_.files.push_back(rel);
        return dir_ / rel;
    }

private:
    std::filesystem::path dir_;
    ExperimentReport& report_;
};

inline void write_trajectory(ArtifactWriter& w, const std::string& dir, const MpMfgTrajectory& traj,
                             const EvalSeries& jbar) {
    w.text(dir + "/rho.csv", csv::space_time_table(traj.rho));
    w.text(dir + "/u.csv", csv::space_time_table(traj.applied_u));
    w.text(dir + "/metrics.csv", series_table("Jbar", jbar));
    if (!traj.per_step_diagnostics.empty()) w.text(dir + "/diagnostics.csv", window_table(traj));
}

}  // namespace detail

/// Runs the BRS pair and every prediction time, then writes the artifact tree
/// under options.output_root / cfg.output_directory.
[[nodiscard]] inline ExperimentReport run_scenario(const ExperimentConfig& cfg, const RunOptions& options = {}) {
    if (auto issues = detail::check(cfg); !issues.empty()) throw ConfigInvalid(std::move(issues));
    const bool plots = options.plots.value_or(cfg.plots);
    const Field rho0 = cfg.initial_density();

    ExperimentReport report;
    report.directory = options.output_root / cfg.output_directory;
    std::filesystem::create_directories(report.directory);
    detail::ArtifactWriter w(report.directory, report);
    w.text("config.yaml", to_yaml(cfg));

    auto contextual = [&](const std::string& what, auto&& fn) {
        try {
            return fn();
        } catch (SolverError& e) {
            e.add_context("scenario '" + cfg.scenario + "', " + what);
            throw;
        }
    };

    report.brs = contextual("BRS", [&] { return run_brs(cfg.brs_config(false), rho0); });
    report.brs_clamped = contextual("clamped BRS", [&] { return run_brs(cfg.brs_config(true), rho0); });
    const auto jbar_brs = eval_series(*report.brs, cfg.density_floor);
    const auto jbar_brs_clamped = eval_series(*report.brs_clamped, cfg.density_floor);
    detail::write_trajectory(w, "brs", *report.brs, jbar_brs);
    detail::write_trajectory(w, "brs_clamped", *report.brs_clamped, jbar_brs_clamped);
    const MpMfgTrajectory& reference = cfg.brs.reference_clamped ? *report.brs_clamped : *report.brs;

    std::vector<double> order = cfg.prediction_times;
    std::sort(order.begin(), order.end());
    std::vector<EvalSeries> jbars;
    std::string distance = "T_pred,D_L2,D_Linf\n";
    std::string summary =
        "T_pred,windows,total_iters,max_iters,max_window_steps,max_residual,max_abs_u,Jbar_start,Jbar_end,"
        "max_mass_error,min_density\n";

    for (double tp : order) {
        auto traj = contextual("T_pred " + csv::format(tp), [&] { return run_mp_mfg(cfg.mp_mfg(tp), rho0); });
        const auto jbar = eval_series(traj, cfg.density_floor);
        const std::string dir = prediction_dir(tp);
        detail::write_trajectory(w, dir, traj, jbar);

        PredictionSummary s;
        s.prediction_time = tp;
        s.windows = traj.per_step_diagnostics.size();
        s.min_density = INFINITY;
        for (const auto& d : traj.per_step_diagnostics) {
            s.total_iters += d.iters;
            s.max_iters = std::max(s.max_iters, d.iters);
            s.max_window_steps = std::max(s.max_window_steps, d.window_steps);
            s.max_residual = std::max(s.max_residual, d.residual);
            s.max_mass_error = std::max(s.max_mass_error, d.max_mass_error);
            s.min_density = std::min(s.min_density, d.min_density);
        }
        for (std::size_t k = 0; k < traj.rho.num_rows(); ++k) {
            const auto r = traj.rho.row(k);
            s.max_mass_error = std::max(s.max_mass_error, std::abs(ops::integrate(r, traj.rho.grid().dx()) - 1.0));
            s.min_density = std::min(s.min_density, *std::min_element(r.begin(), r.end()));
        }
        s.max_abs_u = ops::max_abs(traj.applied_u.values());
        s.jbar_start = jbar.values.front();
        s.jbar_end = jbar.values.back();
        s.distance = strategy_distance(traj, reference);

        csv::append(distance, tp);
        distance += ',';
        csv::append(distance, s.distance.l2);
        distance += ',';
        csv::append(distance, s.distance.linf);
        distance += '\n';
        csv::append(summary, tp);
        for (std::size_t v : {s.windows, s.total_iters, s.max_iters, s.max_window_steps}) {
            summary += ',';
            csv::append(summary, v);
        }
        for (double v : {s.max_residual, s.max_abs_u, s.jbar_start, s.jbar_end, s.max_mass_error, s.min_density}) {
            summary += ',';
            csv::append(summary, v);
        }
        summary += '\n';

        if (cfg.particles.enabled && tp == cfg.particles.prediction_time) {
            ParticleLoopConfig pl{cfg.particles.count, cfg.particles.seed, cfg.particles.substeps};
            std::vector<std::size_t> rows;
            for (double t : cfg.particles.times) rows.push_back(static_cast<std::size_t>(std::llround(t / cfg.outer_dt)));
            const auto est = replay_particles(traj, rho0, cfg.sigma2, std::nullopt, pl, rows);
            std::string kde = "t";
            for (std::size_t i = 0; i < rho0.size(); ++i) {
                kde += ',';
                csv::append(kde, rho0.grid().x(i));
            }
            kde += '\n';
            std::string l1 = "t,bandwidth,L1\n";
            for (std::size_t j = 0; j < rows.size(); ++j) {
                csv::append_time(kde, cfg.particles.times[j]);
                double err = 0.0;
                const auto pde = traj.rho.row(rows[j]);
                for (std::size_t i = 0; i < rho0.size(); ++i) {
                    kde += ',';
                    csv::append(kde, est[j].field[i]);
                    err += std::abs(est[j].field[i] - pde[i]);
                }
                kde += '\n';
                csv::append_time(l1, cfg.particles.times[j]);
                l1 += ',';
                csv::append(l1, est[j].bandwidth_or_bins);
                l1 += ',';
                csv::append(l1, err * rho0.grid().dx());
                l1 += '\n';
            }
            const std::string pdir = "particles_T" + csv::format(tp);
            w.text(pdir + "/kde.csv", kde);
            w.text(pdir + "/l1.csv", l1);
        }

        if (plots) {
            plot::heatmap(w.path("plots/" + dir + "_rho.svg"), "density, T_pred = " + csv::format(tp), traj.rho);
            plot::heatmap(w.path("plots/" + dir + "_u.svg"), "input, T_pred = " + csv::format(tp), traj.applied_u);
        }
        jbars.push_back(jbar);
        report.predictions.push_back(s);
        report.mp_mfg.push_back(std::move(traj));
    }
    w.text("distance.csv", distance);
    w.text("summary.csv", summary);

    if (plots) {
        plot::heatmap(w.path("plots/brs_rho.svg"), "density, BRS", report.brs->rho);
        plot::heatmap(w.path("plots/brs_u.svg"), "input, BRS", report.brs->applied_u);
        plot::heatmap(w.path("plots/brs_clamped_rho.svg"), "density, clamped BRS", report.brs_clamped->rho);
        plot::heatmap(w.path("plots/brs_clamped_u.svg"), "input, clamped BRS", report.brs_clamped->applied_u);
        std::vector<plot::Series> curves;
        for (std::size_t j = 0; j < order.size(); ++j) {
            curves.push_back({"T_pred = " + csv::format(order[j]), jbars[j].times, jbars[j].values});
        }
        curves.push_back({"clamped BRS", jbar_brs_clamped.times, jbar_brs_clamped.values});
        plot::lines(w.path("plots/jbar.svg"), "evaluation function", curves, {"t", "Jbar(t)", false, false});
        plot::Series l2{"D (L2)", order, {}};
        plot::Series linf{"D (Linf)", order, {}};
        for (const auto& s : report.predictions) {
            l2.y.push_back(s.distance.l2);
            linf.y.push_back(s.distance.linf);
        }
        plot::lines(w.path("plots/distance.svg"), "distance to BRS", {l2, linf}, {"T_pred", "D", order.size() > 1, true});
    }
    return report;
}

}  // namespace mfgcov
