// coloc: command-line front end for runs, sweeps, trajectory generation and
// evaluation. Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

#include "coloc/error.hpp"
#include "coloc/experiment.hpp"
#include "coloc/traj_eval.hpp"
#include "coloc/trajectory_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace coloc;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Usage: return kExitUsage;
        case ErrorCategory::Data: return kExitData;
        case ErrorCategory::Numeric: return kExitNumeric;
    }
    return kExitData;
}

// Flags shared by `run` and `sweep` that override config-file values.
struct Overrides {
    std::optional<fs::path> config;
    fs::path out;
    std::vector<std::uint64_t> seeds;
    std::optional<unsigned> workers;
    std::optional<double> sigma_raw;
    std::optional<double> gamma_raw;
    std::optional<double> duration;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "Experiment config (JSON)")->check(CLI::ExistingFile);
        cmd->add_option("--out", out, "Output directory")->required();
        cmd->add_option("--seed", seeds, "Base seed; repeat for several")->take_all();
        cmd->add_option("--workers", workers, "Worker threads for sweep cells");
        cmd->add_option("--sigma-raw", sigma_raw, "Raw-pose translation noise (m)");
        cmd->add_option("--gamma-raw", gamma_raw, "Raw-pose yaw noise (deg)");
        cmd->add_option("--duration", duration, "Synthetic trajectory duration (s)");
    }

    experiment::ExperimentConfig load() const {
        experiment::ExperimentConfig cfg = config ? experiment::load_config(*config) : experiment::ExperimentConfig{};
        if (!seeds.empty()) cfg.seeds = seeds;
        if (workers) cfg.workers = *workers;
        if (sigma_raw) cfg.raw_noise.sigma_trans = *sigma_raw;
        if (gamma_raw) cfg.raw_noise.gamma_yaw = *gamma_raw;
        if (duration) cfg.input.synthetic.duration = *duration;
        cfg.output_dir = out;
        cfg.validate();
        return cfg;
    }
};

int cmd_run(const Overrides& o) {
    const experiment::ExperimentConfig cfg = o.load();
    const std::uint64_t seed = cfg.seeds.front();
    const experiment::RunResult r = experiment::run_single(cfg, seed);
    experiment::write_run_outputs(r, cfg, seed, cfg.output_dir);
    std::cout << "fused    translation RMSE " << r.fused.translation.rmse << " m, orientation RMSE "
              << r.fused.orientation.rmse << " deg\n"
              << "baseline translation RMSE " << r.baseline.translation.rmse << " m, orientation RMSE "
              << r.baseline.orientation.rmse << " deg\n";
    return 0;
}

int cmd_sweep(const Overrides& o) {
    const experiment::ExperimentConfig cfg = o.load();
    const experiment::RunReport report = experiment::run_sweep(cfg);
    experiment::write_sweep_outputs(report, cfg, cfg.output_dir);
    std::cout << experiment::report_table(report, cfg.grid);
    std::size_t failed = 0;
    for (const auto& c : report.cells) {
        if (c.error) {
            ++failed;
            std::cerr << "cell sigma=" << c.sigma_m << " gamma=" << c.gamma_deg << ": " << *c.error << "\n";
        }
    }
    std::cerr << "sweep finished in " << report.wall_seconds << " s";
    if (failed) std::cerr << " with " << failed << " failed cell(s)";
    std::cerr << "\n";
    return 0;
}

int cmd_gen(const SyntheticSpec& spec, const std::string& kind, const fs::path& out) {
    SyntheticSpec s = spec;
    s.kind = parse_path_kind(kind);
    const SyntheticPair pair = generate_synthetic(s);
    fs::create_directories(out);
    export_trajectory(pair.smart, out / "smart.csv");
    export_trajectory(pair.adas, out / "adas.csv");
    return 0;
}

int cmd_eval(const fs::path& est, const fs::path& gt, const std::string& align, double max_dt,
             const std::optional<fs::path>& series) {
    const eval::AlignmentMode mode = eval::parse_alignment_mode(align);
    const TrajectoryLog e = load_trajectory(est);
    const TrajectoryLog g = load_trajectory(gt);
    const eval::ErrorStats stats = eval::evaluate(e.samples, g.samples, mode, max_dt);
    std::cout << eval::to_json(stats) << "\n";
    if (series) {
        std::ofstream f(*series, std::ios::binary);
        if (!f) throw IoError("cannot open '" + series->string() + "' for writing");
        eval::write_error_series(f, stats);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-vehicle cooperative localization experiments"};
    app.require_subcommand(1);

    Overrides run_opts, sweep_opts;
    CLI::App* run = app.add_subcommand("run", "Single run: fused and odometry-only estimates");
    run_opts.attach(run);
    CLI::App* sweep = app.add_subcommand("sweep", "Perception-noise grid with baseline");
    sweep_opts.attach(sweep);

    SyntheticSpec gen_spec;
    std::string gen_kind = to_string(gen_spec.kind);
    fs::path gen_out;
    CLI::App* gen = app.add_subcommand("gen", "Write a synthetic leader/follower pair");
    gen->add_option("--kind", gen_kind, "straight|circle|figure-eight|waypoint-spline")->capture_default_str();
    gen->add_option("--duration", gen_spec.duration, "Seconds")->capture_default_str();
    gen->add_option("--rate", gen_spec.rate, "Hz")->capture_default_str();
    gen->add_option("--speed", gen_spec.speed, "m/s")->capture_default_str();
    gen->add_option("--gap", gen_spec.gap, "Arc length between leader and follower (m)")->capture_default_str();
    gen->add_option("--size", gen_spec.size, "Path scale (m)")->capture_default_str();
    gen->add_option("--seed", gen_spec.seed, "Waypoint layout seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output directory")->required();

    fs::path eval_est, eval_gt;
    std::string eval_align = "se3";
    double eval_max_dt = 0.02;
    std::optional<fs::path> eval_series;
    CLI::App* ev = app.add_subcommand("eval", "Error statistics of an estimate against ground truth");
    ev->add_option("--est", eval_est, "Estimated trajectory CSV")->required();
    ev->add_option("--gt", eval_gt, "Ground-truth trajectory CSV")->required();
    ev->add_option("--align", eval_align, "se3|yaw|none")->capture_default_str();
    ev->add_option("--max-dt", eval_max_dt, "Association window (s)")->capture_default_str();
    ev->add_option("--series", eval_series, "Also write per-sample errors to this CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run) return cmd_run(run_opts);
        if (*sweep) return cmd_sweep(sweep_opts);
        if (*gen) return cmd_gen(gen_spec, gen_kind, gen_out);
        if (*ev) return cmd_eval(eval_est, eval_gt, eval_align, eval_max_dt, eval_series);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
