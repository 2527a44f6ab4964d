#include "coloc/ekf.hpp"

#include "coloc/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace coloc::ekf {

namespace {

using Gain = Eigen::Matrix<double, kStateDim, kPoseDim>;

Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return (Mat3() << 1, 0, 0, 0, c, -s, 0, s, c).finished();
}
Mat3 rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return (Mat3() << c, 0, s, 0, 1, 0, -s, 0, c).finished();
}
Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return (Mat3() << c, -s, 0, s, c, 0, 0, 0, 1).finished();
}
Mat3 drot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return (Mat3() << 0, 0, 0, 0, -s, -c, 0, c, -s).finished();
}
Mat3 drot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return (Mat3() << -s, 0, c, 0, 0, 0, -c, 0, -s).finished();
}
Mat3 drot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return (Mat3() << -s, -c, 0, c, -s, 0, 0, 0, 0).finished();
}

// Body angular rate -> Z-Y-X Euler angle rates.
Mat3 euler_rate_matrix(double roll, double pitch) {
    const double sr = std::sin(roll), cr = std::cos(roll);
    const double tp = std::tan(pitch), cp = std::cos(pitch);
    return (Mat3() << 1, sr * tp, cr * tp,
                      0, cr, -sr,
                      0, sr / cp, cr / cp).finished();
}

void require_finite(const StateEstimate& s, const char* where) {
    if (!s.x.allFinite() || !s.P.allFinite()) {
        throw NumericError(std::string("non-finite filter state in ") + where);
    }
}

// Kalman update on a direct measurement of the 6 consecutive states starting
// at `offset` (H = [0 I 0]). Joseph form, expanded so that only the selected
// rows/columns of P are touched:
//   (I - KH) P (I - KH)^T + K R K^T = P - K (PH^T)^T - (PH^T) K^T + K S K^T
StateEstimate fuse(const StateEstimate& s, int offset, const Vec6& innovation, const Mat6& R) {
    const Gain PHt = s.P.middleCols<kPoseDim>(offset);
    const Mat6 S = PHt.middleRows<kPoseDim>(offset) + R;
    Eigen::LLT<Mat6> llt(S);
    if (llt.info() != Eigen::Success || !S.allFinite()) {
        throw NumericError("innovation covariance is not positive definite");
    }
    const Gain K = llt.solve(PHt.transpose()).transpose();
    const StateMatrix KPHt = K * PHt.transpose();

    StateEstimate out = s;
    out.x += K * innovation;
    out.P = s.P - KPHt - KPHt.transpose() + K * S * K.transpose();
    out.P = 0.5 * (out.P + out.P.transpose());
    for (int i = kRoll; i <= kYaw; ++i) out.x(i) = wrap_angle(out.x(i));
    return out;
}

}  // namespace

Pose StateEstimate::pose(FrameId parent, FrameId child) const {
    Pose p;
    p.timestamp = timestamp;
    p.parent = parent;
    p.child = child;
    p.translation = position();
    p.rotation = Quaternion::from_rpy(x(kRoll), x(kPitch), x(kYaw));
    return p;
}

bool StateEstimate::covariance_healthy() const {
    if (!P.allFinite()) return false;
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
    Eigen::SelfAdjointEigenSolver<StateMatrix> eig(P, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() >= -1e-9;
}

StateVector transition(const StateVector& x, double dt) {
    const double roll = x(kRoll), pitch = x(kPitch), yaw = x(kYaw);
    const Mat3 R = rot_z(yaw) * rot_y(pitch) * rot_x(roll);
    const Vec3 v = x.segment<3>(kVx);
    const Vec3 w = x.segment<3>(kVroll);
    const Vec3 a = x.segment<3>(kAx);

    StateVector out = x;
    out.segment<3>(kX) += R * (v * dt + 0.5 * a * dt * dt);
    out.segment<3>(kRoll) += euler_rate_matrix(roll, pitch) * w * dt;
    out.segment<3>(kVx) += a * dt;
    return out;
}

StateMatrix transition_jacobian(const StateVector& x, double dt) {
    const double roll = x(kRoll), pitch = x(kPitch), yaw = x(kYaw);
    const Mat3 Rx = rot_x(roll), Ry = rot_y(pitch), Rz = rot_z(yaw);
    const Mat3 R = Rz * Ry * Rx;
    const Vec3 v = x.segment<3>(kVx);
    const Vec3 w = x.segment<3>(kVroll);
    const Vec3 a = x.segment<3>(kAx);
    const Vec3 u = v * dt + 0.5 * a * dt * dt;

    StateMatrix A = StateMatrix::Identity();

    A.block<3, 1>(kX, kRoll) = Rz * Ry * drot_x(roll) * u;
    A.block<3, 1>(kX, kPitch) = Rz * drot_y(pitch) * Rx * u;
    A.block<3, 1>(kX, kYaw) = drot_z(yaw) * Ry * Rx * u;
    A.block<3, 3>(kX, kVx) = R * dt;
    A.block<3, 3>(kX, kAx) = 0.5 * R * dt * dt;

    const double sr = std::sin(roll), cr = std::cos(roll);
    const double sp = std::sin(pitch), cp = std::cos(pitch), tp = std::tan(pitch);
    const double sec2 = 1.0 / (cp * cp);
    const Mat3 dE_droll = (Mat3() << 0, cr * tp, -sr * tp,
                                     0, -sr, -cr,
                                     0, cr / cp, -sr / cp).finished();
    const Mat3 dE_dpitch = (Mat3() << 0, sr * sec2, cr * sec2,
                                      0, 0, 0,
                                      0, sr * sp * sec2, cr * sp * sec2).finished();
    A.block<3, 1>(kRoll, kRoll) += dE_droll * w * dt;
    A.block<3, 1>(kRoll, kPitch) += dE_dpitch * w * dt;
    A.block<3, 3>(kRoll, kVroll) = euler_rate_matrix(roll, pitch) * dt;

    A.block<3, 3>(kVx, kAx) = Mat3::Identity() * dt;
    return A;
}

ProcessModel ProcessModel::diagonal(const StateVector& per_second_variance) {
    ProcessModel m;
    m.Q = per_second_variance.asDiagonal();
    return m;
}

StateEstimate predict(const StateEstimate& s, const ProcessModel& model, double dt) {
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw NumericError("predict with negative or non-finite dt");
    require_finite(s, "predict");
    if (dt == 0.0) return s;

    const StateMatrix A = transition_jacobian(s.x, dt);
    StateEstimate out;
    out.x = transition(s.x, dt);
    for (int i = kRoll; i <= kYaw; ++i) out.x(i) = wrap_angle(out.x(i));
    out.P = A * s.P * A.transpose() + model.Q * dt;
    out.P = 0.5 * (out.P + out.P.transpose());
    out.timestamp = s.timestamp + dt;
    return out;
}

StateEstimate predict_to(const StateEstimate& s, const ProcessModel& model, double t,
                         double max_gap, double max_substep) {
    const double gap = t - s.timestamp;
    if (gap <= max_gap) {
        StateEstimate out = predict(s, model, gap);
        out.timestamp = t;
        return out;
    }
    StateEstimate out = s;
    const int steps = static_cast<int>(std::ceil(gap / max_substep));
    const double h = gap / steps;
    for (int i = 0; i < steps; ++i) out = predict(out, model, h);
    out.timestamp = t;
    return out;
}

Mat6 diagonal_covariance(double sigma_xy, double sigma_z, double sigma_rp, double sigma_yaw,
                         double floor_variance) {
    Vec6 var;
    var << sigma_xy * sigma_xy, sigma_xy * sigma_xy, sigma_z * sigma_z, sigma_rp * sigma_rp,
        sigma_rp * sigma_rp, sigma_yaw * sigma_yaw;
    return var.cwiseMax(floor_variance).asDiagonal();
}

StateEstimate update_absolute(const StateEstimate& s, const MeasurementEvent& m) {
    if (!m.pose.translation.allFinite() || !m.R6.allFinite()) {
        throw NumericError("non-finite absolute measurement");
    }
    require_finite(s, "update_absolute");

    Vec6 y;
    y.head<3>() = m.pose.translation;
    y.tail<3>() = m.pose.rotation.to_rpy();

    Vec6 innovation = y - s.x.segment<kPoseDim>(kX);
    for (int i = 3; i < 6; ++i) innovation(i) = wrap_angle(innovation(i));
    return fuse(s, kX, innovation, m.R6);
}

Twist differential_twist(const MeasurementEvent& prev, const MeasurementEvent& cur) {
    if (prev.source != cur.source) {
        throw InvalidArgument("differential update across sources '" + prev.source + "' and '" +
                              cur.source + "'");
    }
    const double dt = cur.timestamp - prev.timestamp;
    if (!(dt > 0.0)) throw InvalidArgument("differential update needs increasing timestamps");

    if (!(prev.pose.parent == cur.pose.parent) || !(prev.pose.child == cur.pose.child)) {
        throw FrameMismatch("differential update across different frames");
    }
    // Difference the positions before rotating so a common offset cancels exactly.
    const Quaternion inv = prev.pose.rotation.conjugate();
    Twist tw;
    tw.value.head<3>() = inv.rotate(cur.pose.translation - prev.pose.translation) / dt;
    tw.value.tail<3>() = (inv * cur.pose.rotation).to_rotation_vector() / dt;
    tw.covariance = (prev.R6 + cur.R6) / (dt * dt);
    return tw;
}

StateEstimate update_differential(const StateEstimate& s, const MeasurementEvent& prev,
                                  const MeasurementEvent& cur) {
    require_finite(s, "update_differential");
    const Twist tw = differential_twist(prev, cur);
    if (!tw.value.allFinite()) throw NumericError("non-finite differential measurement");

    const Vec6 innovation = tw.value - s.x.segment<kPoseDim>(kVx);
    return fuse(s, kVx, innovation, tw.covariance);
}

StateMatrix FilterNodeConfig::default_initial_covariance() {
    StateVector d = StateVector::Constant(1e3);
    d.head<6>().setConstant(1e-6);
    return d.asDiagonal();
}

void FilterNodeConfig::validate() const {
    if (id == NodeId::Node2 && !world_to_local) {
        throw InvalidArgument("node 2 needs a world_to_local transform");
    }
    if (!(max_prediction_gap > 0.0) || !(max_substep > 0.0)) {
        throw InvalidArgument("prediction gap limits must be positive");
    }
}

LocalOdometryFilter::LocalOdometryFilter(FilterNodeConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    state_.x = cfg_.initial_state;
    state_.P = cfg_.initial_covariance;
}

Pose LocalOdometryFilter::step(const MeasurementEvent& raw) {
    if (!started_) {
        state_.timestamp = raw.timestamp;
        started_ = true;
    } else if (raw.timestamp < state_.timestamp) {
        ++rejected_;
        throw OutOfOrderEvent("node 1 received an event older than its clock");
    }
    state_ = predict_to(state_, cfg_.process, raw.timestamp, cfg_.max_prediction_gap,
                        cfg_.max_substep);
    state_ = update_absolute(state_, raw);
    return state_.pose(FrameId::local(), FrameId::body(Agent::Adas));
}

WorldFusionFilter::WorldFusionFilter(FilterNodeConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.id != NodeId::Node2) throw InvalidArgument("WorldFusionFilter requires a Node2 config");
    cfg_.validate();
    const Pose& start = *cfg_.world_to_local;
    state_.x = cfg_.initial_state;
    state_.x.segment<3>(kX) = start.translation;
    state_.x.segment<3>(kRoll) = start.rotation.to_rpy();
    state_.P = cfg_.initial_covariance;
    state_.timestamp = -1.0;
}

void WorldFusionFilter::advance(double t) {
    if (state_.timestamp < 0.0) {
        state_.timestamp = t;
        return;
    }
    if (t < state_.timestamp) {
        ++rejected_;
        throw OutOfOrderEvent("node 2 received an event older than its clock");
    }
    state_ = predict_to(state_, cfg_.process, t, cfg_.max_prediction_gap, cfg_.max_substep);
}

const StateEstimate& WorldFusionFilter::step(const MeasurementEvent& event,
                                             const std::optional<Pose>& local_to_body) {
    if (event.kind == MeasurementKind::PerceptionAbsolute) {
        advance(event.timestamp);
        state_ = update_absolute(state_, event);
        return state_;
    }

    if (!local_to_body) throw InvalidArgument("odometry event without a local_to_body pose");
    MeasurementEvent odom = event;
    odom.pose = compose(*cfg_.world_to_local, *local_to_body);
    odom.pose.timestamp = event.timestamp;
    odom.R6 = cfg_.odometry_covariance;

    if ((last_odometry_ && odom.timestamp <= last_odometry_->timestamp) ||
        (state_.timestamp >= 0.0 && odom.timestamp < state_.timestamp)) {
        ++rejected_;
        throw OutOfOrderEvent("node 2 odometry event is older than its clock");
    }
    // The twist describes motion over (prev, cur]; fuse it before predicting
    // across that interval so the prediction integrates it.
    if (last_odometry_ && state_.timestamp >= 0.0) {
        state_ = update_differential(state_, *last_odometry_, odom);
    }
    advance(event.timestamp);
    last_odometry_ = std::move(odom);
    return state_;
}

}  // namespace coloc::ekf
