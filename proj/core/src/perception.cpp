#include "coloc/perception.hpp"

#include "coloc/error.hpp"

#include <cmath>

namespace coloc {

void PerceptionConfig::validate() const {
    noise.validate();
    if (!(gate_threshold > 0.0)) throw InvalidArgument("gate_threshold must be > 0");
    if (output_rate && !(*output_rate > 0.0)) throw InvalidArgument("output_rate must be > 0");
    if (!(covariance_floor > 0.0)) throw InvalidArgument("covariance_floor must be > 0");
}

ekf::Mat6 PerceptionConfig::measurement_covariance() const {
    return ekf::diagonal_covariance(noise.sigma_trans, 0.0, 0.0, deg2rad(noise.gamma_yaw),
                                    covariance_floor);
}

bool gate_pair(double smart_t, double adas_t, double threshold) {
    // 10.1 - 10.0 evaluates below 0.1; anything within kTimeEpsilon of the
    // threshold counts as on the boundary.
    return std::abs(smart_t - adas_t) < threshold - kTimeEpsilon;
}

std::vector<PairedSample> pair_samples(std::span<const Pose> smart, std::span<const Pose> adas,
                                       double threshold) {
    std::vector<PairedSample> out;
    if (smart.empty()) return out;
    out.reserve(adas.size());

    std::size_t j = 0;
    for (const Pose& a : adas) {
        // advance while the next smart sample is at least as close
        while (j + 1 < smart.size() &&
               std::abs(smart[j + 1].timestamp - a.timestamp) <= std::abs(smart[j].timestamp - a.timestamp)) {
            ++j;
        }
        if (gate_pair(smart[j].timestamp, a.timestamp, threshold)) {
            out.push_back({smart[j], a, a.timestamp});
        }
    }
    return out;
}

ekf::MeasurementEvent make_measurement(const PairedSample& pair, const PerceptionConfig& cfg,
                                       NoiseStreams& rng) {
    const Pose smart_adas = relative_pose(pair.smart_pose, pair.adas_pose);
    const Pose noisy = perturb_pose(smart_adas, cfg.noise, rng);

    ekf::MeasurementEvent m;
    m.timestamp = pair.pair_time;
    m.kind = ekf::MeasurementKind::PerceptionAbsolute;
    m.pose = compose(pair.smart_pose, noisy);
    m.pose.timestamp = pair.pair_time;
    m.R6 = cfg.measurement_covariance();
    m.source = "perception";
    return m;
}

std::vector<Pose> rate_limit(std::span<const Pose> stream, double target_hz) {
    return rate_limit(stream, target_hz, [](const Pose& p) { return p.timestamp; });
}

std::vector<ekf::MeasurementEvent> rate_limit(std::span<const ekf::MeasurementEvent> stream,
                                              double target_hz) {
    return rate_limit(stream, target_hz, [](const ekf::MeasurementEvent& m) { return m.timestamp; });
}

}  // namespace coloc
