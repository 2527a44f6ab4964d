#include "coloc/error.hpp"
#include "coloc/se3.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace coloc;

namespace {

Pose make_pose(Vec3 t, Quaternion q, FrameId parent = FrameId::world(),
               FrameId child = FrameId::body(Agent::Adas), double ts = 0.0) {
    Pose p;
    p.timestamp = ts;
    p.translation = t;
    p.rotation = q;
    p.parent = parent;
    p.child = child;
    return p;
}

// Homogeneous matrix built directly from an angle about z, independent of
// the Quaternion code.
Mat4 yaw_matrix(double theta, Vec3 t) {
    Mat4 m = Mat4::Identity();
    m(0, 0) = std::cos(theta);
    m(0, 1) = -std::sin(theta);
    m(1, 0) = std::sin(theta);
    m(1, 1) = std::cos(theta);
    m.block<3, 1>(0, 3) = t;
    return m;
}

Quaternion random_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    return {n(rng), n(rng), n(rng), n(rng)};
}

}  // namespace

TEST(Quaternion, NormalizesOnConstruction) {
    Quaternion q(1.0, 2.0, 3.0, 4.0);
    EXPECT_NEAR(q.norm(), 1.0, 1e-12);
    EXPECT_THROW(Quaternion(0, 0, 0, 0), InvalidArgument);
    EXPECT_THROW(Quaternion(NAN, 0, 0, 1), InvalidArgument);
}

TEST(Quaternion, ProductsStayUnitNorm) {
    std::mt19937_64 rng(7);
    Quaternion acc;
    for (int i = 0; i < 10000; ++i) {
        acc = acc * random_quat(rng);
        ASSERT_NEAR(acc.norm(), 1.0, 1e-9);
    }
}

TEST(Quaternion, CanonicalHasNonNegativeW) {
    const Quaternion q(0.1, 0.2, 0.3, -0.9);
    const Quaternion c = q.canonical();
    EXPECT_GE(c.w(), 0.0);
    EXPECT_NEAR(rotation_geodesic(q, c), 0.0, 1e-12);
}

TEST(Quaternion, RpyRoundTrip) {
    const Quaternion q = Quaternion::from_rpy(0.1, -0.2, 2.5);
    const Vec3 rpy = q.to_rpy();
    EXPECT_NEAR(rpy(0), 0.1, 1e-12);
    EXPECT_NEAR(rpy(1), -0.2, 1e-12);
    EXPECT_NEAR(rpy(2), 2.5, 1e-12);
}

TEST(QuatYaw, Examples) {
    EXPECT_EQ(quat_yaw(0.0), Quaternion(0, 0, 0, 1));
    const Quaternion half = quat_yaw(kPi);
    EXPECT_NEAR(half.x(), 0.0, 1e-15);
    EXPECT_NEAR(half.z(), 1.0, 1e-15);
    EXPECT_NEAR(half.w(), 0.0, 1e-15);
    const Quaternion quarter = quat_yaw(kPi / 2);
    EXPECT_NEAR(quarter.z(), std::sqrt(2.0) / 2, 1e-15);
    EXPECT_NEAR(quarter.w(), std::sqrt(2.0) / 2, 1e-15);
}

TEST(QuatYaw, MatchesAxisAngle) {
    for (double theta : {-3.0, -1.0, 0.25, 1.7, 3.1}) {
        const Eigen::Quaterniond ref(Eigen::AngleAxisd(theta, Vec3::UnitZ()));
        const Quaternion q = quat_yaw(theta);
        EXPECT_NEAR(q.z(), ref.z(), 1e-15);
        EXPECT_NEAR(q.w(), ref.w(), 1e-15);
    }
}

TEST(Geodesic, Examples) {
    const Quaternion q(0.3, -0.1, 0.4, 0.8);
    EXPECT_NEAR(rotation_geodesic(q, q), 0.0, 1e-12);
    EXPECT_NEAR(rotation_geodesic(q, -q), 0.0, 1e-12);
    EXPECT_NEAR(rotation_geodesic(Quaternion::identity(), quat_yaw(0.3)), 0.3, 1e-12);
}

TEST(Geodesic, SymmetricAndBounded) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Quaternion a = random_quat(rng), b = random_quat(rng);
        const double d = rotation_geodesic(a, b);
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, kPi + 1e-12);
        EXPECT_NEAR(d, rotation_geodesic(b, a), 1e-12);
        // 2 acos |<a, b>|, the textbook form.
        EXPECT_NEAR(d, 2.0 * std::acos(std::min(1.0, std::abs(dot(a, b)))), 1e-6);
    }
}

TEST(Compose, IdentityIsNeutral) {
    const Pose t = make_pose({1, 2, 3}, Quaternion::from_rpy(0.1, 0.2, 0.3));
    const Pose id = Pose::identity(FrameId::body(Agent::Adas), FrameId::body(Agent::Adas));
    const Pose r = compose(t, id);
    EXPECT_TRUE(r.translation.isApprox(t.translation, 1e-15));
    EXPECT_NEAR(rotation_geodesic(r.rotation, t.rotation), 0.0, 1e-12);
}

TEST(Compose, TranslationsAdd) {
    const Pose a = make_pose({1, 0, 0}, {}, FrameId::world(), FrameId::local());
    const Pose b = make_pose({0, 2, 0}, {}, FrameId::local(), FrameId::body(Agent::Adas), 4.0);
    const Pose r = compose(a, b);
    EXPECT_EQ(r.translation, Vec3(1, 2, 0));
    EXPECT_EQ(r.parent, FrameId::world());
    EXPECT_EQ(r.child, FrameId::body(Agent::Adas));
    EXPECT_EQ(r.timestamp, 4.0);
}

TEST(Compose, MatchesMatrixProduct) {
    const Pose a = make_pose({0, 0, 0}, quat_yaw(kPi / 2), FrameId::world(), FrameId::local());
    const Pose b = make_pose({1, 0, 0}, {}, FrameId::local(), FrameId::body(Agent::Adas));
    const Pose r = compose(a, b);
    const Mat4 oracle = yaw_matrix(kPi / 2, Vec3::Zero()) * yaw_matrix(0.0, {1, 0, 0});
    EXPECT_TRUE(r.matrix().isApprox(oracle, 1e-12));
    EXPECT_NEAR(r.translation.x(), 0.0, 1e-15);
    EXPECT_NEAR(r.translation.y(), 1.0, 1e-15);
    EXPECT_NEAR(rotation_geodesic(r.rotation, quat_yaw(kPi / 2)), 0.0, 1e-12);
}

TEST(Compose, FrameMismatchThrows) {
    const Pose a = make_pose({0, 0, 0}, {}, FrameId::world(), FrameId::local());
    const Pose b = make_pose({0, 0, 0}, {}, FrameId::world(), FrameId::body(Agent::Adas));
    EXPECT_THROW(compose(a, b), FrameMismatch);
}

TEST(Compose, AssociativeOnRandomPoses) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int i = 0; i < 200; ++i) {
        const Pose a = make_pose({n(rng), n(rng), n(rng)}, random_quat(rng), FrameId::world(), FrameId::local());
        const Pose b = make_pose({n(rng), n(rng), n(rng)}, random_quat(rng), FrameId::local(),
                                 FrameId::body(Agent::Smart));
        const Pose c = make_pose({n(rng), n(rng), n(rng)}, random_quat(rng), FrameId::body(Agent::Smart),
                                 FrameId::body(Agent::Adas));
        const Pose l = compose(compose(a, b), c);
        const Pose r = compose(a, compose(b, c));
        EXPECT_TRUE(l.matrix().isApprox(r.matrix(), 1e-12));
    }
}

TEST(Invert, Examples) {
    const Pose id = Pose::identity(FrameId::world(), FrameId::body(Agent::Adas));
    const Pose inv_id = invert(id);
    EXPECT_EQ(inv_id.translation, Vec3::Zero());
    EXPECT_EQ(inv_id.parent, FrameId::body(Agent::Adas));
    EXPECT_EQ(inv_id.child, FrameId::world());

    const Pose t = make_pose({1, 2, 3}, {});
    EXPECT_EQ(invert(t).translation, Vec3(-1, -2, -3));

    const Pose yt = make_pose({1, 0, 0}, quat_yaw(deg2rad(30.0)));
    const Mat4 oracle = yaw_matrix(deg2rad(30.0), {1, 0, 0}).inverse();
    EXPECT_TRUE(invert(yt).matrix().isApprox(oracle, 1e-12));
}

TEST(Invert, ComposeWithInverseIsIdentity) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int i = 0; i < 200; ++i) {
        const Pose p = make_pose({10 * n(rng), 10 * n(rng), n(rng)}, random_quat(rng));
        const Pose r = compose(p, invert(p));
        EXPECT_LT(r.translation.norm(), 1e-9);
        EXPECT_LT(rotation_geodesic(r.rotation, Quaternion::identity()), 1e-9);
    }
}

TEST(RelativePose, Examples) {
    const Pose s0 = make_pose({3, 4, 0}, quat_yaw(0.4), FrameId::world(), FrameId::body(Agent::Smart));
    const Pose a0 = make_pose({3, 4, 0}, quat_yaw(0.4));
    const Pose r0 = relative_pose(s0, a0);
    EXPECT_LT(r0.translation.norm(), 1e-12);
    EXPECT_EQ(r0.parent, FrameId::body(Agent::Smart));
    EXPECT_EQ(r0.child, FrameId::body(Agent::Adas));

    const Pose s1 = make_pose({0, 0, 0}, {}, FrameId::world(), FrameId::body(Agent::Smart));
    const Pose a1 = make_pose({5, 0, 0}, {});
    EXPECT_TRUE(relative_pose(s1, a1).translation.isApprox(Vec3(5, 0, 0), 1e-15));

    const Pose s2 = make_pose({1, 1, 0}, quat_yaw(kPi / 2), FrameId::world(), FrameId::body(Agent::Smart));
    const Pose a2 = make_pose({2, 1, 0}, {});
    const Mat4 oracle = yaw_matrix(kPi / 2, {1, 1, 0}).inverse() * yaw_matrix(0.0, {2, 1, 0});
    const Pose r2 = relative_pose(s2, a2);
    EXPECT_TRUE(r2.matrix().isApprox(oracle, 1e-12));
    // The ADAS car sits one metre along world +x, which is the leader's -y.
    EXPECT_NEAR(r2.translation.x(), 0.0, 1e-12);
    EXPECT_NEAR(r2.translation.y(), -1.0, 1e-12);
}

TEST(RelativePose, RoundTrip) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n;
    for (int i = 0; i < 200; ++i) {
        const Pose s = make_pose({50 * n(rng), 50 * n(rng), n(rng)}, random_quat(rng), FrameId::world(),
                                 FrameId::body(Agent::Smart));
        const Pose a = make_pose({50 * n(rng), 50 * n(rng), n(rng)}, random_quat(rng));
        const Pose back = compose(s, relative_pose(s, a));
        EXPECT_LT((back.translation - a.translation).norm(), 1e-9);
        EXPECT_LT(rotation_geodesic(back.rotation, a.rotation), 1e-9);
    }
}

TEST(RelativePose, RequiresWorldParents) {
    const Pose s = make_pose({0, 0, 0}, {}, FrameId::local(), FrameId::body(Agent::Smart));
    const Pose a = make_pose({0, 0, 0}, {});
    EXPECT_THROW(relative_pose(s, a), FrameMismatch);
}

TEST(NedToEnu, TranslationPermutation) {
    const Pose ned = make_pose({1, 2, 3}, {});
    const Pose enu = ned_to_enu(ned);
    EXPECT_EQ(enu.translation, Vec3(2, 1, -3));
}

TEST(NedToEnu, NorthHeadingBecomesYaw90) {
    // NED yaw 0 faces north. North is ENU +y, i.e. ENU yaw 90 degrees.
    const Pose enu = ned_to_enu(make_pose({0, 0, 0}, Quaternion::identity()));
    EXPECT_NEAR(enu.rotation.to_rpy()(2), kPi / 2, 1e-12);
    EXPECT_NEAR(enu.rotation.to_rpy()(0), 0.0, 1e-12);
    EXPECT_NEAR(enu.rotation.to_rpy()(1), 0.0, 1e-12);

    // East-facing NED heading (yaw 90) maps to ENU yaw 0.
    const Pose east = ned_to_enu(make_pose({0, 0, 0}, quat_yaw(kPi / 2)));
    EXPECT_NEAR(east.rotation.to_rpy()(2), 0.0, 1e-12);
}

TEST(NedToEnu, MatchesExplicitMatrices) {
    Mat3 world, body;
    world << 0, 1, 0, 1, 0, 0, 0, 0, -1;
    body << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    std::mt19937_64 rng(13);
    for (int i = 0; i < 50; ++i) {
        const Quaternion q = random_quat(rng);
        const Mat3 oracle = world * q.rotation_matrix() * body;
        const Pose enu = ned_to_enu(make_pose({1, 2, 3}, q));
        EXPECT_TRUE(enu.rotation.rotation_matrix().isApprox(oracle, 1e-12));
    }
}

TEST(NedToEnu, InverseRecoversInput) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n;
    for (int i = 0; i < 200; ++i) {
        const Pose p = make_pose({n(rng), n(rng), n(rng)}, random_quat(rng));
        const Pose back = enu_to_ned(ned_to_enu(p));
        EXPECT_LT((back.translation - p.translation).norm(), 1e-12);
        EXPECT_LT(rotation_geodesic(back.rotation, p.rotation), 1e-12);
        const Pose back2 = ned_to_enu(enu_to_ned(p));
        EXPECT_LT((back2.translation - p.translation).norm(), 1e-12);
    }
}

TEST(PoseValidate, RejectsBadPoses) {
    Pose same_frames = make_pose({0, 0, 0}, {}, FrameId::world(), FrameId::world());
    EXPECT_THROW(same_frames.validate(), InvalidArgument);
    Pose negative_time = make_pose({0, 0, 0}, {});
    negative_time.timestamp = -1.0;
    EXPECT_THROW(negative_time.validate(), InvalidArgument);
    Pose nan_translation = make_pose({NAN, 0, 0}, {});
    EXPECT_THROW(nan_translation.validate(), InvalidArgument);
    EXPECT_NO_THROW(make_pose({1, 2, 3}, quat_yaw(1.0)).validate());
}

TEST(WrapAngle, HalfOpenInterval) {
    EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-12);
    EXPECT_NEAR(wrap_angle(-3 * kPi / 2), kPi / 2, 1e-12);
    EXPECT_NEAR(wrap_angle(kPi), kPi, 1e-12);
    EXPECT_NEAR(wrap_angle(-kPi), kPi, 1e-12);
    EXPECT_NEAR(wrap_angle(0.5), 0.5, 1e-15);
}
