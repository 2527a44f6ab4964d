#include "coloc/traj_eval.hpp"

#include "coloc/error.hpp"

#include <json.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace coloc::eval {

std::string to_string(AlignmentMode mode) {
    switch (mode) {
        case AlignmentMode::None: return "none";
        case AlignmentMode::SE3: return "se3";
        case AlignmentMode::YawOnly: return "yaw";
    }
    return "?";
}

AlignmentMode parse_alignment_mode(const std::string& text) {
    if (text == "none") return AlignmentMode::None;
    if (text == "se3") return AlignmentMode::SE3;
    if (text == "yaw" || text == "4dof") return AlignmentMode::YawOnly;
    throw InvalidArgument("unknown alignment mode '" + text + "' (expected none|se3|yaw)");
}

Association associate(std::span<const Pose> est, std::span<const Pose> gt, double max_dt) {
    Association out;
    out.pairs.reserve(est.size());
    std::size_t j = 0;
    for (const Pose& e : est) {
        if (gt.empty()) {
            ++out.dropped;
            continue;
        }
        while (j + 1 < gt.size() &&
               std::abs(gt[j + 1].timestamp - e.timestamp) <= std::abs(gt[j].timestamp - e.timestamp)) {
            ++j;
        }
        if (std::abs(gt[j].timestamp - e.timestamp) <= max_dt) {
            out.pairs.push_back({e, gt[j]});
        } else {
            ++out.dropped;
        }
    }
    if (out.pairs.empty()) throw InvalidArgument("no estimate could be associated with ground truth");
    return out;
}

Pose RigidTransform::apply(const Pose& p) const {
    Pose out = p;
    out.translation = apply(p.translation);
    out.rotation = Quaternion::from_rotation_matrix(rotation) * p.rotation;
    return out;
}

RigidTransform align(std::span<const PosePair> pairs, AlignmentMode mode) {
    RigidTransform out;
    if (mode == AlignmentMode::None) return out;
    if (pairs.empty()) throw InvalidArgument("alignment needs at least one pair");

    const double n = static_cast<double>(pairs.size());
    Vec3 mu_est = Vec3::Zero(), mu_gt = Vec3::Zero();
    for (const auto& p : pairs) {
        mu_est += p.est.translation;
        mu_gt += p.gt.translation;
    }
    mu_est /= n;
    mu_gt /= n;

    if (mode == AlignmentMode::SE3) {
        if (pairs.size() < 3) throw NumericError("SE3 alignment needs at least 3 pairs");
        Mat3 cov = Mat3::Zero();
        for (const auto& p : pairs) cov += (p.gt.translation - mu_gt) * (p.est.translation - mu_est).transpose();
        cov /= n;
        Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vec3 sv = svd.singularValues();
        if (!(sv(1) > 1e-12 * std::max(sv(0), 1e-300))) {
            throw NumericError("degenerate geometry: positions are collinear or coincident");
        }
        Mat3 S = Mat3::Identity();
        if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) S(2, 2) = -1.0;
        out.rotation = svd.matrixU() * S * svd.matrixV().transpose();
    } else {
        if (pairs.size() < 2) throw NumericError("yaw alignment needs at least 2 pairs");
        double cross = 0.0, dotsum = 0.0;
        for (const auto& p : pairs) {
            const Vec3 e = p.est.translation - mu_est;
            const Vec3 g = p.gt.translation - mu_gt;
            cross += e.x() * g.y() - e.y() * g.x();
            dotsum += e.x() * g.x() + e.y() * g.y();
        }
        if (std::hypot(cross, dotsum) < 1e-12) {
            throw NumericError("degenerate geometry: horizontal positions are coincident");
        }
        out.rotation = Eigen::AngleAxisd(std::atan2(cross, dotsum), Vec3::UnitZ()).toRotationMatrix();
    }
    out.translation = mu_gt - out.rotation * mu_est;
    return out;
}

double alignment_cost(std::span<const PosePair> pairs, const RigidTransform& t) {
    double sum = 0.0;
    for (const auto& p : pairs) sum += (t.apply(p.est.translation) - p.gt.translation).squaredNorm();
    return sum;
}

namespace {

ErrorSummary summarize(std::vector<double> errors) {
    ErrorSummary s;
    const double n = static_cast<double>(errors.size());
    double sq = 0.0, sum = 0.0;
    for (double e : errors) {
        sq += e * e;
        sum += e;
    }
    s.rmse = std::sqrt(sq / n);
    s.mean = sum / n;
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    s.max = sorted.back();
    s.per_sample = std::move(errors);
    return s;
}

}  // namespace

ErrorStats compute_errors(std::span<const PosePair> pairs) {
    if (pairs.empty()) throw InvalidArgument("compute_errors needs at least one pair");
    std::vector<double> trans, rot;
    ErrorStats stats;
    trans.reserve(pairs.size());
    rot.reserve(pairs.size());
    stats.timestamps.reserve(pairs.size());
    for (const auto& p : pairs) {
        trans.push_back((p.est.translation - p.gt.translation).norm());
        rot.push_back(rad2deg(rotation_geodesic(p.est.rotation, p.gt.rotation)));
        stats.timestamps.push_back(p.gt.timestamp);
    }
    stats.translation = summarize(std::move(trans));
    stats.orientation = summarize(std::move(rot));
    stats.n_samples = pairs.size();
    return stats;
}

ErrorStats evaluate(std::span<const Pose> est, std::span<const Pose> gt, AlignmentMode mode,
                    double max_dt) {
    Association assoc = associate(est, gt, max_dt);
    const RigidTransform t = align(assoc.pairs, mode);
    for (auto& p : assoc.pairs) p.est = t.apply(p.est);
    return compute_errors(assoc.pairs);
}

std::string to_json(const ErrorStats& stats, int indent) {
    auto summary = [](const ErrorSummary& s) {
        return nlohmann::ordered_json{{"rmse", s.rmse}, {"mean", s.mean}, {"median", s.median}, {"max", s.max}};
    };
    nlohmann::ordered_json j;
    j["n_samples"] = stats.n_samples;
    j["translation_m"] = summary(stats.translation);
    j["orientation_deg"] = summary(stats.orientation);
    return j.dump(indent);
}

void write_error_series(std::ostream& out, const ErrorStats& stats) {
    auto num = [&out](double v) {
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, r.ptr - buf);
    };
    out << "t,e_trans_m,e_rot_deg\n";
    for (std::size_t i = 0; i < stats.n_samples; ++i) {
        num(stats.timestamps[i]);
        out << ',';
        num(stats.translation.per_sample[i]);
        out << ',';
        num(stats.orientation.per_sample[i]);
        out << '\n';
    }
}

}  // namespace coloc::eval
