#include "coloc/noise.hpp"

#include "coloc/error.hpp"

#include <cmath>

namespace coloc {

void NoiseSpec::validate() const {
    if (!(sigma_trans >= 0.0) || !std::isfinite(sigma_trans)) {
        throw InvalidArgument("sigma_trans must be finite and >= 0");
    }
    if (!(gamma_yaw >= 0.0) || !std::isfinite(gamma_yaw)) {
        throw InvalidArgument("gamma_yaw must be finite and >= 0");
    }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) {
    std::uint64_t z = seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

RandomStream::RandomStream(std::uint64_t seed, std::string_view label)
    : engine_(mix_seed(seed, hash_label(label))) {}

double RandomStream::uniform() {
    // 53 random bits, offset by half an ulp so 0 is never returned
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RandomStream::standard_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Marsaglia polar method
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

NoiseStreams::NoiseStreams(std::uint64_t seed, std::string_view prefix)
    : x(seed, std::string(prefix) + "/x"),
      y(seed, std::string(prefix) + "/y"),
      yaw(seed, std::string(prefix) + "/yaw") {}

Vec3 perturb_translation(const Vec3& t, const NoiseSpec& spec, NoiseStreams& rng) {
    // draws happen even at zero sigma so the stream position only depends on
    // how many samples were perturbed
    const double ex = rng.x.gaussian(spec.sigma_trans);
    const double ey = rng.y.gaussian(spec.sigma_trans);
    if (spec.sigma_trans == 0.0) return t;
    return {t.x() + ex, t.y() + ey, t.z()};
}

Quaternion perturb_yaw(const Quaternion& q, const NoiseSpec& spec, NoiseStreams& rng) {
    const double theta = rng.yaw.gaussian(deg2rad(spec.gamma_yaw));
    if (spec.gamma_yaw == 0.0) return q;
    return q * quat_yaw(theta);
}

Pose perturb_pose(const Pose& p, const NoiseSpec& spec, NoiseStreams& rng) {
    Pose out = p;
    out.translation = perturb_translation(p.translation, spec, rng);
    out.rotation = perturb_yaw(p.rotation, spec, rng);
    return out;
}

}  // namespace coloc
