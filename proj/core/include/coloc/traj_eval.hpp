#pragma once

#include "coloc/se3.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace coloc::eval {

enum class AlignmentMode { None, SE3, YawOnly };

std::string to_string(AlignmentMode mode);
AlignmentMode parse_alignment_mode(const std::string& text);

struct PosePair {
    Pose est;
    Pose gt;
};

struct Association {
    std::vector<PosePair> pairs;
    std::size_t dropped = 0;  // estimates with no ground truth within max_dt
};

/// Pairs each estimate with the nearest ground-truth sample within max_dt.
/// Throws InvalidArgument when nothing pairs.
Association associate(std::span<const Pose> est, std::span<const Pose> gt, double max_dt);

/// Rigid transform (rotation, translation) applied to estimate positions.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Pose apply(const Pose& p) const;
};

/**
 * Least-squares rigid alignment of estimate positions onto ground truth:
 * minimizes sum |R est_i + t - gt_i|^2. SE3 is the scale-free Umeyama
 * solution; YawOnly restricts R to rotations about z.
 *
 * Throws NumericError for degenerate geometry (fewer than 3 non-collinear
 * points for SE3, fewer than 2 distinct points for YawOnly).
 */
RigidTransform align(std::span<const PosePair> pairs, AlignmentMode mode);

/// Sum of squared position residuals after applying `t` to the estimates.
double alignment_cost(std::span<const PosePair> pairs, const RigidTransform& t);

struct ErrorSummary {
    double rmse = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
    std::vector<double> per_sample;
};

struct ErrorStats {
    ErrorSummary translation;  // m
    ErrorSummary orientation;  // deg
    std::vector<double> timestamps;  // ground-truth time of each pair
    std::size_t n_samples = 0;
};

/// Translation error is the position distance, orientation error the
/// geodesic angle in degrees. Pairs must be non-empty.
ErrorStats compute_errors(std::span<const PosePair> pairs);

/// associate, align, apply, compute_errors in one go.
ErrorStats evaluate(std::span<const Pose> est, std::span<const Pose> gt, AlignmentMode mode,
                    double max_dt);

/// Summary statistics as a JSON object (series omitted).
std::string to_json(const ErrorStats& stats, int indent = 2);

/// CSV with header `t,e_trans_m,e_rot_deg`.
void write_error_series(std::ostream& out, const ErrorStats& stats);

}  // namespace coloc::eval
