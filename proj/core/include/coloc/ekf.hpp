#pragma once

#include "coloc/se3.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>

namespace coloc::ekf {

constexpr int kStateDim = 15;
constexpr int kPoseDim = 6;

/// Layout of the 15-dim state. Velocities, angular rates and accelerations
/// are expressed in the body frame; position and roll/pitch/yaw in the
/// node's estimation frame.
enum StateIndex : int {
    kX = 0, kY, kZ,
    kRoll, kPitch, kYaw,
    kVx, kVy, kVz,
    kVroll, kVpitch, kVyaw,
    kAx, kAy, kAz,
};

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using Vec6 = Eigen::Matrix<double, kPoseDim, 1>;
using Mat6 = Eigen::Matrix<double, kPoseDim, kPoseDim>;

struct StateEstimate {
    StateVector x = StateVector::Zero();
    StateMatrix P = StateMatrix::Identity();
    double timestamp = 0.0;

    Vec3 position() const { return x.segment<3>(kX); }
    Vec3 rpy() const { return x.segment<3>(kRoll); }
    Pose pose(FrameId parent, FrameId child) const;
    /// Symmetric within 1e-9 and smallest eigenvalue >= -1e-9.
    bool covariance_healthy() const;
};

/// Rigid-body kinematics: constant body-frame acceleration and angular
/// rate between events, Z-Y-X Euler angles for orientation.
StateVector transition(const StateVector& x, double dt);
/// Analytic d transition / d x at (x, dt).
StateMatrix transition_jacobian(const StateVector& x, double dt);

struct ProcessModel {
    /// Noise added per second of prediction: P += Q * dt.
    StateMatrix Q = StateMatrix::Zero();

    static ProcessModel diagonal(const StateVector& per_second_variance);
};

/// Propagates by dt >= 0. dt == 0 leaves x and P untouched.
StateEstimate predict(const StateEstimate& s, const ProcessModel& model, double dt);

enum class MeasurementKind { OdometryDifferential, PerceptionAbsolute };

struct MeasurementEvent {
    double timestamp = 0.0;
    MeasurementKind kind = MeasurementKind::PerceptionAbsolute;
    Pose pose;
    /// Pose covariance over (x, y, z, roll, pitch, yaw).
    Mat6 R6 = Mat6::Identity();
    std::string source;
};

/// Diagonal R6 from translation/angle standard deviations. Each variance is
/// floored at floor_variance.
Mat6 diagonal_covariance(double sigma_xy, double sigma_z, double sigma_rp, double sigma_yaw,
                         double floor_variance);

/// Identity measurement of the 6 pose states. Angular innovations wrapped,
/// Joseph-form covariance update.
StateEstimate update_absolute(const StateEstimate& s, const MeasurementEvent& m);

/// Body-frame twist implied by two consecutive poses of the same source.
struct Twist {
    Vec6 value = Vec6::Zero();  // (vx, vy, vz, wx, wy, wz)
    Mat6 covariance = Mat6::Identity();
};
Twist differential_twist(const MeasurementEvent& prev, const MeasurementEvent& cur);

/// Fuses the pose delta between prev and cur as a velocity measurement.
/// The pose covariances of both events are summed and scaled by 1/dt^2.
StateEstimate update_differential(const StateEstimate& s, const MeasurementEvent& prev,
                                  const MeasurementEvent& cur);

enum class NodeId { Node1, Node2 };

struct FilterNodeConfig {
    NodeId id = NodeId::Node1;
    StateVector initial_state = StateVector::Zero();
    StateMatrix initial_covariance = default_initial_covariance();
    ProcessModel process;
    /// Covariance attached to the raw-pose channel when node 2 differences
    /// node-1 outputs.
    Mat6 odometry_covariance = Mat6::Identity();
    /// Required for Node2: pose of the Local frame in World.
    std::optional<Pose> world_to_local;
    /// Gaps longer than this are predicted in sub-steps of max_substep.
    double max_prediction_gap = 1.0;
    double max_substep = 0.1;

    static StateMatrix default_initial_covariance();
    void validate() const;
};

/// Predicts `s` forward to time t, splitting long gaps.
StateEstimate predict_to(const StateEstimate& s, const ProcessModel& model, double t,
                         double max_gap, double max_substep);

/**
 * Node 1: filters the ADAS raw poses in the Local (start) frame and
 * produces the Local -> Body transform.
 */
class LocalOdometryFilter {
  public:
    explicit LocalOdometryFilter(FilterNodeConfig cfg);

    /// Predict to the event time, fuse it as an absolute pose, return the
    /// current Local -> Body estimate. Throws OutOfOrderEvent (state kept)
    /// for events older than the filter clock.
    Pose step(const MeasurementEvent& raw);

    const StateEstimate& state() const { return state_; }
    std::size_t rejected_events() const { return rejected_; }

  private:
    FilterNodeConfig cfg_;
    StateEstimate state_;
    std::size_t rejected_ = 0;
    bool started_ = false;
};

/**
 * Node 2: fuses node-1 odometry (differentially) with world-frame
 * perception poses (absolutely). Starts at world_to_local.
 */
class WorldFusionFilter {
  public:
    explicit WorldFusionFilter(FilterNodeConfig cfg);

    /// Odometry events need local_to_body (the node-1 output); their own
    /// pose field is ignored. The twist between the previous and this
    /// odometry event is fused at the filter's current time, then the state
    /// is predicted to the event time. Perception events carry a
    /// World -> Body pose and are fused after predicting to their time.
    const StateEstimate& step(const MeasurementEvent& event,
                              const std::optional<Pose>& local_to_body = std::nullopt);

    const StateEstimate& state() const { return state_; }
    std::size_t rejected_events() const { return rejected_; }
    Pose estimate() const { return state_.pose(FrameId::world(), FrameId::body(Agent::Adas)); }

  private:
    void advance(double t);

    FilterNodeConfig cfg_;
    StateEstimate state_;
    std::optional<MeasurementEvent> last_odometry_;
    std::size_t rejected_ = 0;
};

}  // namespace coloc::ekf
