#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <string>

namespace coloc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double rad);

/**
 * Unit quaternion stored in (x, y, z, w) order.
 *
 * Every constructor and product normalizes. The sign is left alone; use
 * canonical() when two rotations have to be compared component-wise.
 */
class Quaternion {
  public:
    Quaternion() = default;
    Quaternion(double x, double y, double z, double w);
    explicit Quaternion(const Eigen::Quaterniond& q);

    static Quaternion identity() { return {}; }
    static Quaternion from_rotation_matrix(const Mat3& r);
    /// Intrinsic Z-Y-X (yaw, pitch, roll).
    static Quaternion from_rpy(double roll, double pitch, double yaw);
    /// Rotation vector (axis * angle), radians.
    static Quaternion from_rotation_vector(const Vec3& v);

    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }
    double w() const { return w_; }

    double norm() const;
    Quaternion conjugate() const { return {-x_, -y_, -z_, w_, RawTag{}}; }
    Quaternion operator-() const { return {-x_, -y_, -z_, -w_, RawTag{}}; }
    /// Same rotation with w >= 0.
    Quaternion canonical() const;

    Mat3 rotation_matrix() const;
    Eigen::Quaterniond eigen() const { return {w_, x_, y_, z_}; }
    Vec3 rotate(const Vec3& v) const;
    /// Roll, pitch, yaw (Z-Y-X), each wrapped to (-pi, pi].
    Vec3 to_rpy() const;
    Vec3 to_rotation_vector() const;

    friend Quaternion operator*(const Quaternion& a, const Quaternion& b);
    friend bool operator==(const Quaternion&, const Quaternion&) = default;

  private:
    struct RawTag {};
    Quaternion(double x, double y, double z, double w, RawTag)
        : x_(x), y_(y), z_(z), w_(w) {}

    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
    double w_ = 1.0;
};

/// Inner product of the 4-vectors.
double dot(const Quaternion& a, const Quaternion& b);

/// Rotation about +z: (0, 0, sin(theta/2), cos(theta/2)).
Quaternion quat_yaw(double theta);

/// Angle of the relative rotation, in [0, pi]. Insensitive to sign.
double rotation_geodesic(const Quaternion& a, const Quaternion& b);

enum class Agent { Smart, Adas };

std::string to_string(Agent agent);
Agent parse_agent(const std::string& text);

class FrameId {
  public:
    enum class Kind { World, Local, Body };

    static FrameId world() { return FrameId(Kind::World, Agent::Smart); }
    static FrameId local() { return FrameId(Kind::Local, Agent::Smart); }
    static FrameId body(Agent agent) { return FrameId(Kind::Body, agent); }

    Kind kind() const { return kind_; }
    /// Only meaningful for Body frames.
    Agent agent() const { return agent_; }

    std::string str() const;

    friend bool operator==(const FrameId& a, const FrameId& b) {
        return a.kind_ == b.kind_ && (a.kind_ != Kind::Body || a.agent_ == b.agent_);
    }

  private:
    FrameId(Kind kind, Agent agent) : kind_(kind), agent_(agent) {}

    Kind kind_;
    Agent agent_;
};

/**
 * Timestamped rigid transform. A Pose with parent P and child C maps
 * coordinates expressed in C into P, i.e. it is the pose of C seen from P.
 */
struct Pose {
    double timestamp = 0.0;
    Vec3 translation = Vec3::Zero();
    Quaternion rotation;
    FrameId parent = FrameId::world();
    FrameId child = FrameId::body(Agent::Adas);

    static Pose identity(FrameId parent, FrameId child, double timestamp = 0.0);

    Mat4 matrix() const;
    /// Throws InvalidArgument if frames coincide, the timestamp is negative or
    /// non-finite, or any component is non-finite.
    void validate() const;
};

/// a ∘ b. Requires a.child == b.parent; the result carries b's timestamp.
Pose compose(const Pose& a, const Pose& b);

Pose invert(const Pose& p);

/// Pose of the ADAS body in the smart vehicle's body frame.
Pose relative_pose(const Pose& world_smart, const Pose& world_adas);

/// Re-expresses a pose given in a North-East-Down world in East-North-Up.
/// Body axes are converted from forward-right-down to forward-left-up.
Pose ned_to_enu(const Pose& p);
/// Exact inverse of ned_to_enu.
Pose enu_to_ned(const Pose& p);

}  // namespace coloc
