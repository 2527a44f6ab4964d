#include "coloc/se3.hpp"

#include "coloc/error.hpp"

#include <algorithm>
#include <cmath>

namespace coloc {

double wrap_angle(double rad) {
    double wrapped = std::remainder(rad, 2.0 * kPi);  // [-pi, pi]
    if (wrapped <= -kPi) wrapped += 2.0 * kPi;
    return wrapped;
}

Quaternion::Quaternion(double x, double y, double z, double w) {
    const double n = std::sqrt(x * x + y * y + z * z + w * w);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw InvalidArgument("quaternion with zero or non-finite norm");
    }
    x_ = x / n;
    y_ = y / n;
    z_ = z / n;
    w_ = w / n;
}

Quaternion::Quaternion(const Eigen::Quaterniond& q) : Quaternion(q.x(), q.y(), q.z(), q.w()) {}

Quaternion Quaternion::from_rotation_matrix(const Mat3& r) {
    return Quaternion(Eigen::Quaterniond(r));
}

Quaternion Quaternion::from_rpy(double roll, double pitch, double yaw) {
    const Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                                 Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                                 Eigen::AngleAxisd(roll, Vec3::UnitX());
    return Quaternion(q);
}

Quaternion Quaternion::from_rotation_vector(const Vec3& v) {
    const double angle = v.norm();
    if (angle < 1e-12) {
        // first-order expansion keeps tiny rotations exact to machine precision
        return Quaternion(0.5 * v.x(), 0.5 * v.y(), 0.5 * v.z(), 1.0);
    }
    const Vec3 axis = v / angle;
    const double s = std::sin(0.5 * angle);
    return Quaternion(axis.x() * s, axis.y() * s, axis.z() * s, std::cos(0.5 * angle));
}

double Quaternion::norm() const { return std::sqrt(x_ * x_ + y_ * y_ + z_ * z_ + w_ * w_); }

Quaternion Quaternion::canonical() const { return w_ < 0.0 ? -*this : *this; }

Mat3 Quaternion::rotation_matrix() const { return eigen().toRotationMatrix(); }

Vec3 Quaternion::rotate(const Vec3& v) const { return rotation_matrix() * v; }

Vec3 Quaternion::to_rpy() const {
    const double roll = std::atan2(2.0 * (w_ * x_ + y_ * z_), 1.0 - 2.0 * (x_ * x_ + y_ * y_));
    const double sinp = std::clamp(2.0 * (w_ * y_ - z_ * x_), -1.0, 1.0);
    const double pitch = std::asin(sinp);
    const double yaw = std::atan2(2.0 * (w_ * z_ + x_ * y_), 1.0 - 2.0 * (y_ * y_ + z_ * z_));
    return {wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)};
}

Vec3 Quaternion::to_rotation_vector() const {
    const Quaternion q = canonical();
    const double vn = std::sqrt(q.x_ * q.x_ + q.y_ * q.y_ + q.z_ * q.z_);
    if (vn < 1e-12) return 2.0 * Vec3(q.x_, q.y_, q.z_);
    const double angle = 2.0 * std::atan2(vn, q.w_);
    return Vec3(q.x_, q.y_, q.z_) * (angle / vn);
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return Quaternion(a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
                      a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
                      a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_,
                      a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_);
}

double dot(const Quaternion& a, const Quaternion& b) {
    return a.x() * b.x() + a.y() * b.y() + a.z() * b.z() + a.w() * b.w();
}

Quaternion quat_yaw(double theta) {
    return Quaternion(0.0, 0.0, std::sin(0.5 * theta), std::cos(0.5 * theta));
}

double rotation_geodesic(const Quaternion& a, const Quaternion& b) {
    // atan2 form is well conditioned near zero where acos(|<a,b>|) is not;
    // the two agree for unit quaternions.
    const Quaternion d = a.conjugate() * b;
    const double vn = std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
    return 2.0 * std::atan2(vn, std::abs(d.w()));
}

std::string to_string(Agent agent) { return agent == Agent::Smart ? "smart" : "adas"; }

Agent parse_agent(const std::string& text) {
    if (text == "smart") return Agent::Smart;
    if (text == "adas") return Agent::Adas;
    throw InvalidArgument("unknown agent '" + text + "' (expected smart|adas)");
}

std::string FrameId::str() const {
    switch (kind_) {
        case Kind::World: return "world";
        case Kind::Local: return "local";
        case Kind::Body: return "body(" + to_string(agent_) + ")";
    }
    return "?";
}

Pose Pose::identity(FrameId parent, FrameId child, double timestamp) {
    Pose p;
    p.timestamp = timestamp;
    p.parent = parent;
    p.child = child;
    return p;
}

Mat4 Pose::matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation.rotation_matrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
}

void Pose::validate() const {
    if (parent == child) throw InvalidArgument("pose parent and child frame are both " + parent.str());
    if (!std::isfinite(timestamp) || timestamp < 0.0) {
        throw InvalidArgument("pose timestamp must be finite and non-negative");
    }
    if (!translation.allFinite()) throw InvalidArgument("pose translation is not finite");
    if (std::abs(rotation.norm() - 1.0) > 1e-9) throw InvalidArgument("pose rotation is not unit norm");
}

Pose compose(const Pose& a, const Pose& b) {
    if (!(a.child == b.parent)) {
        throw FrameMismatch("cannot compose " + a.parent.str() + "->" + a.child.str() + " with " +
                            b.parent.str() + "->" + b.child.str());
    }
    Pose out;
    out.timestamp = b.timestamp;
    out.parent = a.parent;
    out.child = b.child;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation.rotate(b.translation) + a.translation;
    return out;
}

Pose invert(const Pose& p) {
    Pose out;
    out.timestamp = p.timestamp;
    out.parent = p.child;
    out.child = p.parent;
    out.rotation = p.rotation.conjugate();
    out.translation = -out.rotation.rotate(p.translation);
    return out;
}

Pose relative_pose(const Pose& world_smart, const Pose& world_adas) {
    if (!(world_smart.parent == FrameId::world()) || !(world_adas.parent == FrameId::world())) {
        throw FrameMismatch("relative_pose expects both poses in the world frame");
    }
    return compose(invert(world_smart), world_adas);
}

namespace {

// World axes: (n, e, d) -> (e, n, u). Symmetric, so it is its own inverse.
const Mat3& ned_enu_axes() {
    static const Mat3 m = (Mat3() << 0, 1, 0, 1, 0, 0, 0, 0, -1).finished();
    return m;
}

// Body axes: forward-right-down -> forward-left-up. Also self-inverse.
const Mat3& frd_flu_axes() {
    static const Mat3 m = Vec3(1, -1, -1).asDiagonal();
    return m;
}

Pose remap(const Pose& p) {
    Pose out = p;
    const Vec3& t = p.translation;
    out.translation = Vec3(t.y(), t.x(), -t.z());
    out.rotation = Quaternion::from_rotation_matrix(ned_enu_axes() * p.rotation.rotation_matrix() *
                                                    frd_flu_axes());
    return out;
}

}  // namespace

Pose ned_to_enu(const Pose& p) { return remap(p); }

Pose enu_to_ned(const Pose& p) { return remap(p); }

}  // namespace coloc
