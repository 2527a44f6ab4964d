#pragma once

#include "coloc/ekf.hpp"
#include "coloc/noise.hpp"
#include "coloc/se3.hpp"

#include <optional>
#include <span>
#include <vector>

namespace coloc {

struct PerceptionConfig {
    NoiseSpec noise;              // sigma (m), gamma (deg)
    double gate_threshold = 0.1;  // s
    std::optional<double> output_rate;  // Hz; unset emits every gated pair
    /// Variance floor used for the unperturbed channels (z, roll, pitch) and
    /// for zero-noise configurations.
    double covariance_floor = 1e-6;

    void validate() const;
    /// Measurement covariance matching the injected noise.
    ekf::Mat6 measurement_covariance() const;
};

struct PairedSample {
    Pose smart_pose;  // World -> Body(Smart)
    Pose adas_pose;   // World -> Body(Adas)
    double pair_time = 0.0;  // ADAS-side timestamp
};

/// Timestamps closer than this are treated as equal by the gate and the
/// rate limiter.
constexpr double kTimeEpsilon = 1e-9;

/// |smart_t - adas_t| < threshold, strictly. Differences within
/// kTimeEpsilon of the threshold are on the boundary and fail.
bool gate_pair(double smart_t, double adas_t, double threshold);

/// For every ADAS sample, picks the nearest-in-time smart sample and keeps
/// the pair if it passes the gate. Both inputs must be time-ordered.
std::vector<PairedSample> pair_samples(std::span<const Pose> smart, std::span<const Pose> adas,
                                       double threshold);

/// Relative pose, noise in the smart vehicle's frame, recomposition into
/// the world. The result is a PerceptionAbsolute event at pair_time.
ekf::MeasurementEvent make_measurement(const PairedSample& pair, const PerceptionConfig& cfg,
                                       NoiseStreams& rng);

/**
 * Deterministic decimation: keeps an item iff its time is at least
 * 1/target_hz - kTimeEpsilon after the last kept item. The first item is kept.
 */
template <typename T, typename TimeFn>
std::vector<T> rate_limit(std::span<const T> stream, double target_hz, TimeFn time_of) {
    std::vector<T> out;
    if (stream.empty()) return out;
    const double period = 1.0 / target_hz;
    double last = 0.0;
    bool first = true;
    for (const T& item : stream) {
        const double t = time_of(item);
        if (first || t >= last + period - kTimeEpsilon) {
            out.push_back(item);
            last = t;
            first = false;
        }
    }
    return out;
}

std::vector<Pose> rate_limit(std::span<const Pose> stream, double target_hz);
std::vector<ekf::MeasurementEvent> rate_limit(std::span<const ekf::MeasurementEvent> stream,
                                              double target_hz);

}  // namespace coloc
