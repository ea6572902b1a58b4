#include "pinnflow/experiment.hpp"
#include "pinnflow/manifest.hpp"
#include "pinnflow/util.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitDiverged = 2;

int cmd_run(const std::string& config_path, const std::string& mode, long long seed,
            const std::string& out_dir, bool have_seed) {
    pinnflow::RunManifest manifest =
        config_path.empty() ? pinnflow::RunManifest{} : pinnflow::load_manifest(config_path);
    if (!mode.empty()) {
        manifest.mode = pinnflow::run_mode_from_string(mode);
    }
    if (have_seed) {
        manifest.seed = static_cast<std::uint64_t>(seed);
    }
    if (!out_dir.empty()) {
        manifest.output_dir = out_dir;
    }
    manifest.validate();

    std::cout << "running " << pinnflow::to_string(manifest.mode) << " experiment (seed "
              << manifest.seed << ") -> " << manifest.output_dir << std::endl;
    const pinnflow::ErrorReport report = pinnflow::run_experiment(manifest);
    std::cout << "status: "
              << (report.status == pinnflow::TrainStatus::Completed ? "completed" : "diverged")
              << "\n"
              << "front_linf_error = " << report.front_linf_error << "\n"
              << "front_l2_error = " << report.front_l2_error << "\n"
              << "pressure_l2_error = " << report.pressure_l2_error << "\n"
              << "final_train_cost = " << report.final_train_cost << "\n"
              << "final_test_cost = " << report.final_test_cost << "\n"
              << "generalization_gap = " << report.generalization_gap << "\n"
              << "wall_seconds = " << report.wall_seconds << std::endl;
    return report.status == pinnflow::TrainStatus::Completed ? kExitOk : kExitDiverged;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b) {
    namespace fs = std::filesystem;
    const pinnflow::ErrorReport a =
        pinnflow::read_report((fs::path(dir_a) / "report.txt").string());
    const pinnflow::ErrorReport b =
        pinnflow::read_report((fs::path(dir_b) / "report.txt").string());
    const pinnflow::ComparisonSummary summary = pinnflow::compare_runs(a, b);
    pinnflow::print_comparison(std::cout, summary, pinnflow::to_string(a.mode) + "(a)",
                               pinnflow::to_string(b.mode) + "(b)");
    return kExitOk;
}

int cmd_oracle(const std::string& config_path, const std::string& out_dir) {
    pinnflow::RunManifest manifest =
        config_path.empty() ? pinnflow::RunManifest{} : pinnflow::load_manifest(config_path);
    pinnflow::export_oracle(manifest.problem, out_dir.empty() ? manifest.output_dir : out_dir);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-informed solver for 1D two-phase porous-media filling"};
    app.require_subcommand(1);

    std::string config_path;
    std::string mode;
    long long seed = 0;
    std::string out_dir;

    CLI::App* run = app.add_subcommand("run", "train one experiment and export its artifacts");
    run->add_option("--config", config_path, "config file (defaults applied when omitted)");
    run->add_option("--mode", mode, "fixed | adaptive")
        ->check(CLI::IsMember({"fixed", "adaptive"}));
    CLI::Option* seed_opt = run->add_option("--seed", seed, "run seed");
    run->add_option("--out", out_dir, "output directory");

    std::string dir_a;
    std::string dir_b;
    CLI::App* compare = app.add_subcommand("compare", "compare two finished run directories");
    compare->add_option("--a", dir_a, "first run directory")->required();
    compare->add_option("--b", dir_b, "second run directory")->required();

    std::string oracle_config;
    std::string oracle_out;
    CLI::App* oracle = app.add_subcommand("oracle", "export the analytic solution only");
    oracle->add_option("--config", oracle_config, "config file");
    oracle->add_option("--out", oracle_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(config_path, mode, seed, out_dir, seed_opt->count() > 0);
        }
        if (compare->parsed()) {
            return cmd_compare(dir_a, dir_b);
        }
        if (oracle->parsed()) {
            return cmd_oracle(oracle_config, oracle_out);
        }
    } catch (const pinnflow::ConfigError& err) {
        std::cerr << "configuration error: " << err.what() << std::endl;
        return kExitConfigError;
    } catch (const pinnflow::NumericalError& err) {
        std::cerr << "numerical error: " << err.what() << std::endl;
        return kExitDiverged;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << std::endl;
        return kExitConfigError;
    }
    return kExitOk;
}
