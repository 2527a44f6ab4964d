#include "coloc/experiment.hpp"

#include "coloc/error.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace coloc::experiment {

using json = nlohmann::ordered_json;

ekf::StateVector EkfSettings::default_process_noise() {
    // per-second variances: x y z, roll pitch yaw, v, angular rate, accel
    ekf::StateVector q;
    q << 0.05, 0.05, 0.06, 0.03, 0.03, 0.06, 0.025, 0.025, 0.04, 0.01, 0.01, 0.02, 0.01, 0.01, 0.015;
    return q;
}

ekf::StateVector EkfSettings::default_node2_process_noise() {
    ekf::StateVector q = default_process_noise();
    q.head<6>() *= 1e-3;
    return q;
}

void ExperimentConfig::validate() const {
    raw_noise.validate();
    perception.validate();
    if (seeds.empty()) throw InvalidArgument("config needs at least one seed");
    if (raw_rate && !(*raw_rate > 0.0)) throw InvalidArgument("raw_rate_hz must be > 0");
    if (!input.smart_path != !input.adas_path) {
        throw InvalidArgument("input needs both smart and adas paths, or neither");
    }
    if (!input.smart_path) input.synthetic.validate();
    if (!(eval.max_dt > 0.0)) throw InvalidArgument("eval max_dt_s must be > 0");
    if (!(ekf.covariance_floor > 0.0)) throw InvalidArgument("ekf covariance_floor must be > 0");
    if (!(ekf.odometry_noise_scale >= 0.0)) throw InvalidArgument("ekf odometry_noise_scale must be >= 0");
    if ((ekf.node1_process_noise.array() < 0.0).any() || (ekf.node2_process_noise.array() < 0.0).any()) {
        throw InvalidArgument("process noise variances must be >= 0");
    }
    for (double s : grid.sigma_m) {
        if (!(s >= 0.0)) throw InvalidArgument("sweep sigma values must be >= 0");
    }
    for (double g : grid.gamma_deg) {
        if (!(g >= 0.0)) throw InvalidArgument("sweep gamma values must be >= 0");
    }
    if (workers == 0) throw InvalidArgument("workers must be >= 1");
}

// ---------------------------------------------------------------- config io

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw InvalidArgument("config: '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw InvalidArgument("config: unknown key '" + where + "." + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_opt(const json& j, const char* key, std::optional<double>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) out.reset();
    else out = j.at(key).get<double>();
}

ekf::StateVector read_state_vector(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != ekf::kStateDim) {
        throw InvalidArgument("config: '" + where + "' must be an array of 15 numbers");
    }
    ekf::StateVector v;
    for (int i = 0; i < ekf::kStateDim; ++i) v(i) = j.at(i).get<double>();
    return v;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
    ExperimentConfig cfg;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }

    try {
        check_keys(root, {"input", "sync", "raw_noise", "raw_rate_hz", "perception", "ekf", "eval", "seeds",
                          "sweep", "output_dir", "workers"},
                   "<root>");

        if (root.contains("input")) {
            const json& in = root.at("input");
            check_keys(in, {"smart", "adas", "synthetic"}, "input");
            if (in.contains("smart")) cfg.input.smart_path = in.at("smart").get<std::string>();
            if (in.contains("adas")) cfg.input.adas_path = in.at("adas").get<std::string>();
            if (in.contains("synthetic")) {
                const json& s = in.at("synthetic");
                check_keys(s, {"kind", "duration", "rate", "speed", "seed", "gap", "size"}, "input.synthetic");
                if (s.contains("kind")) cfg.input.synthetic.kind = parse_path_kind(s.at("kind").get<std::string>());
                read(s, "duration", cfg.input.synthetic.duration);
                read(s, "rate", cfg.input.synthetic.rate);
                read(s, "speed", cfg.input.synthetic.speed);
                read(s, "seed", cfg.input.synthetic.seed);
                read(s, "gap", cfg.input.synthetic.gap);
                read(s, "size", cfg.input.synthetic.size);
            }
        }
        if (root.contains("sync")) {
            const json& s = root.at("sync");
            check_keys(s, {"offset_seconds", "reference"}, "sync");
            read(s, "offset_seconds", cfg.sync.offset_seconds);
            if (s.contains("reference")) cfg.sync.reference = parse_agent(s.at("reference").get<std::string>());
        }
        if (root.contains("raw_noise")) {
            const json& r = root.at("raw_noise");
            check_keys(r, {"sigma_m", "gamma_deg"}, "raw_noise");
            read(r, "sigma_m", cfg.raw_noise.sigma_trans);
            read(r, "gamma_deg", cfg.raw_noise.gamma_yaw);
        }
        read_opt(root, "raw_rate_hz", cfg.raw_rate);
        if (root.contains("perception")) {
            const json& p = root.at("perception");
            check_keys(p, {"enabled", "sigma_m", "gamma_deg", "gate_s", "rate_hz", "covariance_floor"}, "perception");
            read(p, "enabled", cfg.perception_enabled);
            read(p, "sigma_m", cfg.perception.noise.sigma_trans);
            read(p, "gamma_deg", cfg.perception.noise.gamma_yaw);
            read(p, "gate_s", cfg.perception.gate_threshold);
            read_opt(p, "rate_hz", cfg.perception.output_rate);
            read(p, "covariance_floor", cfg.perception.covariance_floor);
        }
        if (root.contains("ekf")) {
            const json& e = root.at("ekf");
            check_keys(e, {"node1_process_noise", "node2_process_noise", "odometry_noise_scale",
                           "covariance_floor", "max_prediction_gap_s", "max_substep_s"},
                       "ekf");
            if (e.contains("node1_process_noise")) {
                cfg.ekf.node1_process_noise = read_state_vector(e.at("node1_process_noise"), "ekf.node1_process_noise");
            }
            if (e.contains("node2_process_noise")) {
                cfg.ekf.node2_process_noise = read_state_vector(e.at("node2_process_noise"), "ekf.node2_process_noise");
            }
            read(e, "odometry_noise_scale", cfg.ekf.odometry_noise_scale);
            read(e, "covariance_floor", cfg.ekf.covariance_floor);
            read(e, "max_prediction_gap_s", cfg.ekf.max_prediction_gap);
            read(e, "max_substep_s", cfg.ekf.max_substep);
        }
        if (root.contains("eval")) {
            const json& e = root.at("eval");
            check_keys(e, {"align", "max_dt_s"}, "eval");
            if (e.contains("align")) cfg.eval.mode = eval::parse_alignment_mode(e.at("align").get<std::string>());
            read(e, "max_dt_s", cfg.eval.max_dt);
        }
        if (root.contains("seeds")) cfg.seeds = root.at("seeds").get<std::vector<std::uint64_t>>();
        if (root.contains("sweep")) {
            const json& s = root.at("sweep");
            check_keys(s, {"sigma_m", "gamma_deg"}, "sweep");
            read(s, "sigma_m", cfg.grid.sigma_m);
            read(s, "gamma_deg", cfg.grid.gamma_deg);
        }
        if (root.contains("output_dir")) cfg.output_dir = root.at("output_dir").get<std::string>();
        read(root, "workers", cfg.workers);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
    json j;
    json input = json::object();
    if (cfg.input.smart_path) {
        input["smart"] = cfg.input.smart_path->string();
        input["adas"] = cfg.input.adas_path->string();
    } else {
        const auto& s = cfg.input.synthetic;
        input["synthetic"] = {{"kind", to_string(s.kind)}, {"duration", s.duration}, {"rate", s.rate},
                              {"speed", s.speed}, {"seed", s.seed}, {"gap", s.gap}, {"size", s.size}};
    }
    j["input"] = input;
    j["sync"] = {{"offset_seconds", cfg.sync.offset_seconds}, {"reference", to_string(cfg.sync.reference)}};
    j["raw_noise"] = {{"sigma_m", cfg.raw_noise.sigma_trans}, {"gamma_deg", cfg.raw_noise.gamma_yaw}};
    j["raw_rate_hz"] = opt_json(cfg.raw_rate);
    j["perception"] = {{"enabled", cfg.perception_enabled},
                       {"sigma_m", cfg.perception.noise.sigma_trans},
                       {"gamma_deg", cfg.perception.noise.gamma_yaw},
                       {"gate_s", cfg.perception.gate_threshold},
                       {"rate_hz", opt_json(cfg.perception.output_rate)},
                       {"covariance_floor", cfg.perception.covariance_floor}};
    auto vec = [](const ekf::StateVector& v) {
        json a = json::array();
        for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
        return a;
    };
    j["ekf"] = {{"node1_process_noise", vec(cfg.ekf.node1_process_noise)},
                {"node2_process_noise", vec(cfg.ekf.node2_process_noise)},
                {"odometry_noise_scale", cfg.ekf.odometry_noise_scale},
                {"covariance_floor", cfg.ekf.covariance_floor},
                {"max_prediction_gap_s", cfg.ekf.max_prediction_gap},
                {"max_substep_s", cfg.ekf.max_substep}};
    j["eval"] = {{"align", eval::to_string(cfg.eval.mode)}, {"max_dt_s", cfg.eval.max_dt}};
    j["seeds"] = cfg.seeds;
    j["sweep"] = {{"sigma_m", cfg.grid.sigma_m}, {"gamma_deg", cfg.grid.gamma_deg}};
    return j.dump(indent);
}

// ---------------------------------------------------------------- pipeline

std::uint64_t raw_seed(std::uint64_t base_seed, std::size_t repetition) {
    return mix_seed(mix_seed(base_seed, hash_label("raw")), repetition);
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t sigma_index, std::size_t gamma_index,
                        std::size_t repetition) {
    std::uint64_t s = mix_seed(base_seed, hash_label("perception"));
    s = mix_seed(s, sigma_index);
    s = mix_seed(s, gamma_index);
    return mix_seed(s, repetition);
}

namespace {

void tag_agent(TrajectoryLog& log, Agent agent) {
    log.agent = agent;
    for (Pose& p : log.samples) p.child = FrameId::body(agent);
}

}  // namespace

GroundTruth prepare_ground_truth(const ExperimentConfig& cfg) {
    GroundTruth gt;
    if (cfg.input.smart_path) {
        gt.smart = load_trajectory(*cfg.input.smart_path);
        gt.adas = load_trajectory(*cfg.input.adas_path);
    } else {
        SyntheticPair pair = generate_synthetic(cfg.input.synthetic);
        gt.smart = std::move(pair.smart);
        gt.adas = std::move(pair.adas);
    }
    tag_agent(gt.smart, Agent::Smart);
    tag_agent(gt.adas, Agent::Adas);
    auto [smart, adas] = synchronize(std::move(gt.smart), std::move(gt.adas), cfg.sync);
    gt.smart = std::move(smart);
    gt.adas = std::move(adas);
    if (gt.adas.samples.empty()) throw InvalidArgument("ADAS trajectory is empty");
    return gt;
}

OdometryTrack run_node1(const ExperimentConfig& cfg, const GroundTruth& gt, std::uint64_t seed) {
    OdometryTrack track;
    track.world_to_local = gt.adas.samples.front();
    track.world_to_local.child = FrameId::local();
    const Pose local_from_world = invert(track.world_to_local);

    std::vector<Pose> truth = gt.adas.samples;
    if (cfg.raw_rate) truth = rate_limit(std::span<const Pose>(truth), *cfg.raw_rate);

    const ekf::Mat6 R = ekf::diagonal_covariance(cfg.raw_noise.sigma_trans, 0.0, 0.0,
                                                 deg2rad(cfg.raw_noise.gamma_yaw), cfg.ekf.covariance_floor);
    NoiseStreams rng(seed, "raw/adas");

    ekf::FilterNodeConfig node;
    node.id = ekf::NodeId::Node1;
    node.process = ekf::ProcessModel::diagonal(cfg.ekf.node1_process_noise);
    node.max_prediction_gap = cfg.ekf.max_prediction_gap;
    node.max_substep = cfg.ekf.max_substep;
    ekf::LocalOdometryFilter filter(node);

    track.raw.reserve(truth.size());
    track.node1_output.reserve(truth.size());
    for (const Pose& p : truth) {
        ekf::MeasurementEvent m;
        m.timestamp = p.timestamp;
        m.kind = ekf::MeasurementKind::OdometryDifferential;
        m.pose = compose(local_from_world, perturb_pose(p, cfg.raw_noise, rng));
        m.R6 = R;
        m.source = "odometry/adas";
        try {
            track.node1_output.push_back(filter.step(m));
            track.raw.push_back(std::move(m));
        } catch (const OutOfOrderEvent&) {
            ++track.rejected;
        }
    }
    return track;
}

std::vector<ekf::MeasurementEvent> simulate_perception(const ExperimentConfig& cfg, const GroundTruth& gt,
                                                       std::uint64_t seed) {
    std::vector<ekf::MeasurementEvent> out;
    if (!cfg.perception_enabled) return out;
    std::vector<PairedSample> pairs =
        pair_samples(gt.smart.samples, gt.adas.samples, cfg.perception.gate_threshold);
    if (cfg.perception.output_rate) {
        pairs = rate_limit(std::span<const PairedSample>(pairs), *cfg.perception.output_rate,
                           [](const PairedSample& p) { return p.pair_time; });
    }
    NoiseStreams rng(seed, "perception");
    out.reserve(pairs.size());
    for (const PairedSample& pair : pairs) out.push_back(make_measurement(pair, cfg.perception, rng));
    return out;
}

FusionOutput run_node2(const ExperimentConfig& cfg, const OdometryTrack& odom,
                       const std::vector<ekf::MeasurementEvent>& perception) {
    ekf::FilterNodeConfig node;
    node.id = ekf::NodeId::Node2;
    node.process = ekf::ProcessModel::diagonal(cfg.ekf.node2_process_noise);
    node.world_to_local = odom.world_to_local;
    const double k = cfg.ekf.odometry_noise_scale;
    node.odometry_covariance = ekf::diagonal_covariance(k * cfg.raw_noise.sigma_trans, 0.0, 0.0,
                                                        k * deg2rad(cfg.raw_noise.gamma_yaw), cfg.ekf.covariance_floor);
    node.max_prediction_gap = cfg.ekf.max_prediction_gap;
    node.max_substep = cfg.ekf.max_substep;
    ekf::WorldFusionFilter filter(node);

    FusionOutput out;
    out.series.reserve(odom.raw.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < odom.raw.size(); ++i) {
        const double t = odom.raw[i].timestamp;
        for (; j < perception.size() && perception[j].timestamp <= t; ++j) {
            try {
                filter.step(perception[j]);
                ++out.perception_events;
            } catch (const OutOfOrderEvent&) {
                ++out.rejected;
            }
        }
        try {
            out.series.push_back(filter.step(odom.raw[i], odom.node1_output[i]));
        } catch (const OutOfOrderEvent&) {
            ++out.rejected;
        }
    }
    return out;
}

namespace {

std::vector<Pose> series_poses(const FusionOutput& out) {
    std::vector<Pose> poses;
    poses.reserve(out.series.size());
    for (const auto& s : out.series) poses.push_back(s.pose(FrameId::world(), FrameId::body(Agent::Adas)));
    return poses;
}

eval::ErrorStats score(const ExperimentConfig& cfg, const GroundTruth& gt, const FusionOutput& out) {
    const std::vector<Pose> est = series_poses(out);
    return eval::evaluate(est, gt.adas.samples, cfg.eval.mode, cfg.eval.max_dt);
}

}  // namespace

RunResult run_single(const ExperimentConfig& cfg, const GroundTruth& gt, std::uint64_t seed) {
    cfg.validate();
    RunResult r;
    const OdometryTrack odom = run_node1(cfg, gt, raw_seed(seed, 0));
    const auto perception = simulate_perception(cfg, gt, cell_seed(seed, 0, 0, 0));
    r.fused_output = run_node2(cfg, odom, perception);
    r.baseline_output = run_node2(cfg, odom, {});
    r.fused = score(cfg, gt, r.fused_output);
    r.baseline = score(cfg, gt, r.baseline_output);
    return r;
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    return run_single(cfg, prepare_ground_truth(cfg), seed);
}

// ---------------------------------------------------------------- sweep

namespace {

double mean_of(const std::vector<SeedResult>& v, double SeedResult::*field) {
    if (v.empty()) return std::nan("");
    double sum = 0.0;
    for (const auto& s : v) sum += s.*field;
    return sum / static_cast<double>(v.size());
}

SeedResult summarize_seed(std::uint64_t seed, const eval::ErrorStats& e) {
    return {seed, e.translation.rmse, e.translation.mean, e.orientation.rmse, e.orientation.mean, e.n_samples};
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    for (unsigned w = 0; w < count; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

std::string error_text(const std::exception& e, const char* stage) {
    return std::string(stage) + ": " + e.what();
}

}  // namespace

double CellResult::mean_translation_rmse() const { return mean_of(per_seed, &SeedResult::translation_rmse); }
double CellResult::mean_translation_mean() const { return mean_of(per_seed, &SeedResult::translation_mean); }
double CellResult::mean_orientation_rmse() const { return mean_of(per_seed, &SeedResult::orientation_rmse); }

const CellResult& RunReport::cell(std::size_t sigma_index, std::size_t gamma_index) const {
    const json cfg = json::parse(config_json);
    const std::size_t n_gamma = cfg.at("sweep").at("gamma_deg").size();
    return cells.at(1 + sigma_index * n_gamma + gamma_index);
}

RunReport run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.grid.sigma_m.empty() || cfg.grid.gamma_deg.empty()) {
        throw InvalidArgument("sweep grid needs at least one sigma and one gamma");
    }
    const auto start = std::chrono::steady_clock::now();

    RunReport report;
    report.config_json = config_to_json(cfg);
    const GroundTruth gt = prepare_ground_truth(cfg);

    const std::size_t n_sigma = cfg.grid.sigma_m.size();
    const std::size_t n_gamma = cfg.grid.gamma_deg.size();
    const std::size_t n_cells = n_sigma * n_gamma;

    report.cells.resize(1 + n_cells);
    report.cells[0].baseline = true;
    for (std::size_t si = 0; si < n_sigma; ++si) {
        for (std::size_t gi = 0; gi < n_gamma; ++gi) {
            CellResult& c = report.cells[1 + si * n_gamma + gi];
            c.sigma_m = cfg.grid.sigma_m[si];
            c.gamma_deg = cfg.grid.gamma_deg[gi];
        }
    }

    // per-cell, per-repetition slots so worker scheduling cannot reorder output
    std::vector<std::vector<std::optional<SeedResult>>> slots(1 + n_cells,
                                                              std::vector<std::optional<SeedResult>>(cfg.seeds.size()));
    std::vector<std::vector<std::string>> errors(1 + n_cells);
    std::mutex error_mutex;

    for (std::size_t rep = 0; rep < cfg.seeds.size(); ++rep) {
        const std::uint64_t seed = cfg.seeds[rep];
        OdometryTrack odom;
        try {
            odom = run_node1(cfg, gt, raw_seed(seed, rep));
        } catch (const std::exception& e) {
            for (auto& err : errors) err.push_back(error_text(e, "node1"));
            continue;
        }

        // task 0 is the baseline, then the grid cells
        parallel_for(1 + n_cells, cfg.workers, [&](std::size_t task) {
            try {
                if (task == 0) {
                    const FusionOutput out = run_node2(cfg, odom, {});
                    slots[0][rep] = summarize_seed(seed, score(cfg, gt, out));
                    return;
                }
                const std::size_t si = (task - 1) / n_gamma;
                const std::size_t gi = (task - 1) % n_gamma;
                ExperimentConfig cell_cfg = cfg;
                cell_cfg.perception_enabled = true;
                cell_cfg.perception.noise.sigma_trans = cfg.grid.sigma_m[si];
                cell_cfg.perception.noise.gamma_yaw = cfg.grid.gamma_deg[gi];
                const auto perception = simulate_perception(cell_cfg, gt, cell_seed(seed, si, gi, rep));
                const FusionOutput out = run_node2(cell_cfg, odom, perception);
                slots[task][rep] = summarize_seed(seed, score(cell_cfg, gt, out));
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                errors[task].push_back("seed " + std::to_string(seed) + ": " + e.what());
            }
        });
    }

    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        for (const auto& slot : slots[c]) {
            if (slot) report.cells[c].per_seed.push_back(*slot);
        }
        if (!errors[c].empty()) {
            std::sort(errors[c].begin(), errors[c].end());
            std::string joined;
            for (const auto& e : errors[c]) joined += (joined.empty() ? "" : "; ") + e;
            report.cells[c].error = joined;
        }
    }

    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

namespace {

json seed_json(const SeedResult& s) {
    return {{"seed", s.seed},
            {"translation_rmse_m", s.translation_rmse},
            {"translation_mean_m", s.translation_mean},
            {"orientation_rmse_deg", s.orientation_rmse},
            {"orientation_mean_deg", s.orientation_mean},
            {"n_samples", s.n_samples}};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json cell_json(const CellResult& c) {
    json j;
    j["label"] = c.baseline ? "w/o perception" : "perception";
    j["sigma_m"] = c.baseline ? json(nullptr) : json(c.sigma_m);
    j["gamma_deg"] = c.baseline ? json(nullptr) : json(c.gamma_deg);
    j["aggregate"] = {{"translation_rmse_m", number_or_null(c.mean_translation_rmse())},
                      {"translation_mean_m", number_or_null(c.mean_translation_mean())},
                      {"orientation_rmse_deg", number_or_null(c.mean_orientation_rmse())},
                      {"seeds", c.per_seed.size()}};
    json seeds = json::array();
    for (const auto& s : c.per_seed) seeds.push_back(seed_json(s));
    j["per_seed"] = seeds;
    j["error"] = c.error ? json(*c.error) : json(nullptr);
    return j;
}

std::string fixed3(double v) {
    if (!std::isfinite(v)) return "n/a";
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string report_to_json(const RunReport& report) {
    json j;
    j["config"] = json::parse(report.config_json);
    json cells = json::array();
    for (const auto& c : report.cells) cells.push_back(cell_json(c));
    j["cells"] = cells;
    return j.dump(2) + "\n";
}

std::string report_table(const RunReport& report, const SweepGrid& grid) {
    const json cfg = json::parse(report.config_json);
    std::ostringstream os;
    os << "Translation RMSE [m] for sigma_raw = " << cfg["raw_noise"]["sigma_m"].get<double>()
       << " m, gamma_raw = " << cfg["raw_noise"]["gamma_deg"].get<double>() << " deg ("
       << cfg["seeds"].size() << " seeds)\n";

    const std::size_t col = 14;
    auto cell = [&](const std::string& s) {
        std::string out = s;
        if (out.size() < col) out.append(col - out.size(), ' ');
        return out + "|";
    };
    os << cell("perception noise");
    for (double s : grid.sigma_m) {
        std::ostringstream h;
        h << "sigma = " << s << "m";
        os << cell(" " + h.str());
    }
    os << "\n";
    os << cell("w/o perception") << " " << fixed3(report.baseline().mean_translation_rmse()) << "\n";
    for (std::size_t gi = 0; gi < grid.gamma_deg.size(); ++gi) {
        std::ostringstream h;
        h << "gamma = " << grid.gamma_deg[gi] << "deg";
        os << cell(h.str());
        for (std::size_t si = 0; si < grid.sigma_m.size(); ++si) {
            const CellResult& c = report.cells.at(1 + si * grid.gamma_deg.size() + gi);
            os << cell(" " + fixed3(c.mean_translation_rmse()));
        }
        os << "\n";
    }
    return os.str();
}

void write_sweep_outputs(const RunReport& report, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "report.json", report_to_json(report));
    write_text(dir / "table.txt", report_table(report, cfg.grid));
    const std::size_t n_gamma = cfg.grid.gamma_deg.size();
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        std::string name = "baseline";
        if (c > 0) {
            name = "cell_s" + std::to_string((c - 1) / n_gamma) + "_g" + std::to_string((c - 1) % n_gamma);
        }
        const auto sub = dir / name;
        std::filesystem::create_directories(sub);
        write_text(sub / "summary.json", cell_json(report.cells[c]).dump(2) + "\n");
    }
}

void write_run_outputs(const RunResult& result, const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json j;
    j["config"] = json::parse(config_to_json(cfg));
    j["seed"] = seed;
    j["fused"] = json::parse(eval::to_json(result.fused));
    j["baseline"] = json::parse(eval::to_json(result.baseline));
    j["perception_events"] = result.fused_output.perception_events;
    j["rejected_events"] = result.fused_output.rejected;
    write_text(dir / "report.json", j.dump(2) + "\n");

    export_trajectory(estimates_to_log(result.fused_output.series, Agent::Adas), dir / "fused.csv");
    export_trajectory(estimates_to_log(result.baseline_output.series, Agent::Adas), dir / "baseline.csv");
    std::ofstream errors(dir / "errors.csv", std::ios::binary);
    if (!errors) throw IoError("cannot open '" + (dir / "errors.csv").string() + "' for writing");
    eval::write_error_series(errors, result.fused);
}

}  // namespace coloc::experiment
