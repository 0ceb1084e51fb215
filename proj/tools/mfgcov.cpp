// mfgcov: run, validate or compare coverage-control experiments.
//
//   mfgcov run configs/baseline.yaml [--output-root DIR] [--no-plots]
//   mfgcov validate configs/baseline.yaml
//   mfgcov compare out/baseline/mpmfg_T0.01 out/baseline/brs_clamped
//
// Exit codes: 0 ok, 2 config error, 3 fixed point not converged, 4 diverged.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mfgcov/csv.hpp"
#include "mfgcov/errors.hpp"
#include "mfgcov/experiment.hpp"
#include "mfgcov/metrics.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNotConverged = 3;
constexpr int kDiverged = 4;

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw mfgcov::ConfigInvalid({"cannot read config file '" + path + "'"});
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

mfgcov::MpMfgTrajectory load_run(const std::filesystem::path& dir) {
    auto rho = mfgcov::csv::read_space_time_table(dir / "rho.csv");
    auto u = mfgcov::csv::read_space_time_table(dir / "u.csv");
    return {std::move(rho), std::move(u), {}, {}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field-game coverage control: MP-MFG and BRS experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_root;
    bool no_plots = false;
    auto* run = app.add_subcommand("run", "run a scenario and write its artifact tree");
    run->add_option("config", config_path, "YAML config")->required();
    run->add_option("--output-root", output_root, "root directory for outputs (default: $MFGCOV_OUTPUT_ROOT or .)");
    run->add_flag("--no-plots", no_plots, "write CSVs only");

    auto* validate = app.add_subcommand("validate", "check a config and print its resolved form");
    validate->add_option("config", config_path, "YAML config")->required();

    std::string run_a;
    std::string run_b;
    auto* compare = app.add_subcommand("compare", "distance between two stored trajectories");
    compare->add_option("runA", run_a, "directory holding rho.csv and u.csv")->required();
    compare->add_option("runB", run_b, "directory holding rho.csv and u.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (*validate) {
            const auto cfg = mfgcov::validate_config(slurp(config_path));
            std::cout << mfgcov::to_yaml(cfg);
            return kOk;
        }
        if (*compare) {
            const auto a = load_run(run_a);
            const auto b = load_run(run_b);
            const auto d = mfgcov::strategy_distance(a, b);
            std::cout << "D_L2,D_Linf\n" << mfgcov::csv::format(d.l2) << ',' << mfgcov::csv::format(d.linf) << '\n';
            return kOk;
        }

        const auto cfg = mfgcov::validate_config(slurp(config_path));
        mfgcov::RunOptions opts;
        opts.output_root = mfgcov::output_root_from_env(output_root.empty() ? std::nullopt
                                                                            : std::optional<std::string>(output_root));
        if (no_plots) opts.plots = false;
        const auto report = mfgcov::run_scenario(cfg, opts);

        std::cout << "wrote " << report.files.size() << " files to " << report.directory.string() << '\n';
        std::cout << "T_pred,total_iters,max_abs_u,Jbar_end,D_L2,D_Linf\n";
        for (const auto& s : report.predictions) {
            std::cout << mfgcov::csv::format(s.prediction_time) << ',' << s.total_iters << ','
                      << mfgcov::csv::format(s.max_abs_u) << ',' << mfgcov::csv::format(s.jbar_end) << ','
                      << mfgcov::csv::format(s.distance.l2) << ',' << mfgcov::csv::format(s.distance.linf) << '\n';
        }
        return kOk;
    } catch (const mfgcov::ConfigInvalid& e) {
        std::cerr << e.what() << '\n';
        return kConfigError;
    } catch (const mfgcov::NotConverged& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNotConverged;
    } catch (const mfgcov::SolverError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDiverged;
    } catch (const mfgcov::GridMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
