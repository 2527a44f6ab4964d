#pragma once

#include "coloc/ekf.hpp"
#include "coloc/noise.hpp"
#include "coloc/perception.hpp"
#include "coloc/traj_eval.hpp"
#include "coloc/trajectory_io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace coloc::experiment {

struct InputSpec {
    /// When both paths are set, logs are loaded; otherwise `synthetic` is
    /// generated.
    std::optional<std::filesystem::path> smart_path;
    std::optional<std::filesystem::path> adas_path;
    SyntheticSpec synthetic;
};

struct EkfSettings {
    /// Per-second process noise variances (diagonal of Q) for each node.
    ekf::StateVector node1_process_noise = default_process_noise();
    ekf::StateVector node2_process_noise = default_node2_process_noise();
    /// Node 2 attaches the raw-pose noise (sigma_raw, gamma_raw) times this
    /// factor to each node-1 output it differences.
    double odometry_noise_scale = 0.3;
    /// Variance floor on the raw and odometry channels.
    double covariance_floor = 1e-12;
    double max_prediction_gap = 1.0;
    double max_substep = 0.1;

    static ekf::StateVector default_process_noise();
    /// default_process_noise() with the pose block scaled by 1e-3: node 2
    /// gets its motion from the odometry twist.
    static ekf::StateVector default_node2_process_noise();
};

struct EvalSettings {
    eval::AlignmentMode mode = eval::AlignmentMode::SE3;
    double max_dt = 0.02;
};

struct SweepGrid {
    std::vector<double> sigma_m;
    std::vector<double> gamma_deg;
};

struct ExperimentConfig {
    InputSpec input;
    SyncSpec sync;
    NoiseSpec raw_noise;              // sigma_raw (m), gamma_raw (deg)
    std::optional<double> raw_rate;   // Hz decimation of the raw-pose channel
    bool perception_enabled = true;
    PerceptionConfig perception;
    EkfSettings ekf;
    EvalSettings eval;
    std::vector<std::uint64_t> seeds{1};
    SweepGrid grid;
    std::filesystem::path output_dir = "out";
    unsigned workers = 1;

    void validate() const;
};

/// Parses the JSON experiment config. Unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);

/// Seed of the raw-odometry noise for one repetition.
std::uint64_t raw_seed(std::uint64_t base_seed, std::size_t repetition);
/// Seed of the perception noise for one sweep cell and repetition.
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t sigma_index, std::size_t gamma_index,
                        std::size_t repetition);

/// Ground truth after ingestion/generation and clock synchronization.
struct GroundTruth {
    TrajectoryLog smart;
    TrajectoryLog adas;
};
GroundTruth prepare_ground_truth(const ExperimentConfig& cfg);

/// Noisy raw odometry in the Local frame plus node-1 output, shared by the
/// fused and baseline runs of one repetition.
struct OdometryTrack {
    Pose world_to_local;
    std::vector<ekf::MeasurementEvent> raw;   // Local -> Body(Adas)
    std::vector<Pose> node1_output;           // parallel to raw
    std::size_t rejected = 0;
};
OdometryTrack run_node1(const ExperimentConfig& cfg, const GroundTruth& gt, std::uint64_t seed);

/// Simulated perception events, gated, noised and rate limited.
std::vector<ekf::MeasurementEvent> simulate_perception(const ExperimentConfig& cfg, const GroundTruth& gt,
                                                       std::uint64_t seed);

struct FusionOutput {
    std::vector<ekf::StateEstimate> series;  // node-2 state after every odometry event
    std::size_t perception_events = 0;
    std::size_t rejected = 0;
};
/// Node 2 over the odometry track and (possibly empty) perception events.
FusionOutput run_node2(const ExperimentConfig& cfg, const OdometryTrack& odom,
                       const std::vector<ekf::MeasurementEvent>& perception);

struct RunResult {
    eval::ErrorStats fused;
    eval::ErrorStats baseline;
    FusionOutput fused_output;
    FusionOutput baseline_output;
};

/// End-to-end: ground truth, raw noise, node 1, perception, node 2 with and
/// without perception, evaluation against ADAS ground truth.
RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed);
RunResult run_single(const ExperimentConfig& cfg, const GroundTruth& gt, std::uint64_t seed);

/// Per-seed summary of one cell.
struct SeedResult {
    std::uint64_t seed = 0;
    double translation_rmse = 0.0;
    double translation_mean = 0.0;
    double orientation_rmse = 0.0;
    double orientation_mean = 0.0;
    std::size_t n_samples = 0;
};

struct CellResult {
    bool baseline = false;
    double sigma_m = 0.0;
    double gamma_deg = 0.0;
    std::vector<SeedResult> per_seed;
    std::optional<std::string> error;

    double mean_translation_rmse() const;
    double mean_translation_mean() const;
    double mean_orientation_rmse() const;
};

struct RunReport {
    std::string config_json;
    std::vector<CellResult> cells;  // baseline first, then sigma-major grid order
    double wall_seconds = 0.0;      // not serialized

    const CellResult& baseline() const { return cells.front(); }
    const CellResult& cell(std::size_t sigma_index, std::size_t gamma_index) const;
};

/// Runs every (sigma, gamma) cell plus the baseline for every seed.
/// Cells run on cfg.workers threads; the report does not depend on it.
RunReport run_sweep(const ExperimentConfig& cfg);

/// Deterministic JSON (no timing information).
std::string report_to_json(const RunReport& report);
/// Rows gamma, columns sigma, "w/o perception" on top; values are the
/// seed-averaged translation RMSE in metres.
std::string report_table(const RunReport& report, const SweepGrid& grid);

/// Writes report.json and table.txt plus per-cell summaries under dir.
void write_sweep_outputs(const RunReport& report, const ExperimentConfig& cfg,
                         const std::filesystem::path& dir);

/// Writes report.json, fused.csv, baseline.csv and errors.csv.
void write_run_outputs(const RunResult& result, const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::filesystem::path& dir);

}  // namespace coloc::experiment
