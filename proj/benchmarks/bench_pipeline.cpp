#include "coloc/ekf.hpp"
#include "coloc/experiment.hpp"
#include "coloc/traj_eval.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace coloc;
using namespace coloc::ekf;

namespace {

StateEstimate moving_state() {
    StateEstimate s;
    s.x(kVx) = 10.0;
    s.x(kVyaw) = 0.2;
    s.P = StateMatrix::Identity();
    return s;
}

MeasurementEvent pose_event(double t, FrameId parent, std::string source) {
    MeasurementEvent m;
    m.timestamp = t;
    m.pose.timestamp = t;
    m.pose.translation = Vec3(10.0 * t, 0.5, 0.0);
    m.pose.rotation = quat_yaw(0.2 * t);
    m.pose.parent = parent;
    m.pose.child = FrameId::body(Agent::Adas);
    m.R6 = diagonal_covariance(0.3, 0.0, 0.0, 0.17, 1e-6);
    m.source = std::move(source);
    return m;
}

void BM_Predict(benchmark::State& state) {
    const ProcessModel model = ProcessModel::diagonal(experiment::EkfSettings::default_process_noise());
    StateEstimate s = moving_state();
    for (auto _ : state) {
        s = predict(s, model, 0.005);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_Predict);

void BM_UpdateAbsolute(benchmark::State& state) {
    const StateEstimate s = moving_state();
    const MeasurementEvent m = pose_event(0.0, FrameId::world(), "perception");
    for (auto _ : state) benchmark::DoNotOptimize(update_absolute(s, m));
}
BENCHMARK(BM_UpdateAbsolute);

void BM_UpdateDifferential(benchmark::State& state) {
    const StateEstimate s = moving_state();
    MeasurementEvent a = pose_event(1.0, FrameId::local(), "odometry/adas");
    MeasurementEvent b = pose_event(1.005, FrameId::local(), "odometry/adas");
    a.kind = b.kind = MeasurementKind::OdometryDifferential;
    for (auto _ : state) benchmark::DoNotOptimize(update_differential(s, a, b));
}
BENCHMARK(BM_UpdateDifferential);

void BM_Align(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::vector<eval::PosePair> pairs(static_cast<std::size_t>(state.range(0)));
    for (auto& p : pairs) {
        p.est.translation = Vec3(n(rng), n(rng), n(rng));
        p.gt.translation = p.est.translation + Vec3(1.0, 2.0, 0.0);
    }
    for (auto _ : state) benchmark::DoNotOptimize(eval::align(pairs, eval::AlignmentMode::SE3));
}
BENCHMARK(BM_Align)->Arg(1000)->Arg(24000);

// One end-to-end run: 20 s of a 200 Hz figure-eight with noisy raw poses.
void BM_RunSingle(benchmark::State& state) {
    experiment::ExperimentConfig cfg;
    cfg.input.synthetic.duration = 20.0;
    cfg.raw_noise = NoiseSpec{2.5, 0.0, 0};
    cfg.perception.noise = NoiseSpec{0.3, 10.0, 0};
    const experiment::GroundTruth gt = experiment::prepare_ground_truth(cfg);
    for (auto _ : state) benchmark::DoNotOptimize(experiment::run_single(cfg, gt, 1));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gt.adas.samples.size()));
}
BENCHMARK(BM_RunSingle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
