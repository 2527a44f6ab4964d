#pragma once

#include "coloc/se3.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace coloc {

/// Additive perturbation levels. Translation noise hits x and y only, yaw
/// noise is a body-frame rotation about z.
struct NoiseSpec {
    double sigma_trans = 0.0;  // m, standard deviation
    double gamma_yaw = 0.0;    // deg, standard deviation
    std::uint64_t seed = 0;

    void validate() const;
    bool is_zero() const { return sigma_trans == 0.0 && gamma_yaw == 0.0; }
};

/// Mixes a seed with further integers (splitmix64 finalizer chain).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value);
/// FNV-1a of a label, used to derive per-channel stream seeds.
std::uint64_t hash_label(std::string_view label);

/**
 * Deterministic standard-normal source keyed by (seed, label).
 *
 * Uses mt19937_64 for bits and does its own uniform and Gaussian
 * conversion, so the draw sequence does not depend on the standard
 * library's distribution implementations.
 */
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::string_view label);

    /// Uniform on (0, 1).
    double uniform();
    double standard_normal();
    double gaussian(double stddev) { return stddev * standard_normal(); }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// One stream per perturbed channel so that changing one noise level never
/// shifts another channel's draws.
struct NoiseStreams {
    RandomStream x;
    RandomStream y;
    RandomStream yaw;

    /// Streams labelled "<prefix>/x", "<prefix>/y", "<prefix>/yaw".
    NoiseStreams(std::uint64_t seed, std::string_view prefix);
};

/// x and y get independent N(0, sigma_trans^2) offsets; z is untouched.
Vec3 perturb_translation(const Vec3& t, const NoiseSpec& spec, NoiseStreams& rng);

/// Returns (q * quat_yaw(theta)) with theta ~ N(0, gamma_yaw^2).
Quaternion perturb_yaw(const Quaternion& q, const NoiseSpec& spec, NoiseStreams& rng);

/// Both of the above. Frames and timestamp are preserved.
Pose perturb_pose(const Pose& p, const NoiseSpec& spec, NoiseStreams& rng);

}  // namespace coloc
