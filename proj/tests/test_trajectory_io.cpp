#include "coloc/error.hpp"
#include "coloc/perception.hpp"
#include "coloc/trajectory_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace coloc;

namespace {

const std::filesystem::path kData = COLOC_TEST_DATA_DIR;

template <typename E>
E expect_error(const std::string& file) {
    try {
        load_trajectory(kData / file);
    } catch (const E& e) {
        return e;
    } catch (const std::exception& e) {
        ADD_FAILURE() << file << ": wrong exception: " << e.what();
        throw;
    }
    ADD_FAILURE() << file << ": no exception";
    throw std::logic_error("unreachable");
}

std::string to_text(const TrajectoryLog& log) {
    std::ostringstream os;
    write_trajectory(os, log);
    return os.str();
}

TrajectoryLog random_log(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> dt(1e-4, 0.1);
    TrajectoryLog log;
    log.agent = Agent::Adas;
    log.metadata["note"] = "random";
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
        t += dt(rng);
        Pose p;
        p.timestamp = t;
        p.translation = Vec3(1e3 * g(rng), 1e3 * g(rng), g(rng));
        p.rotation = Quaternion(g(rng), g(rng), g(rng), g(rng));
        log.samples.push_back(p);
        log.sigmas.emplace_back(std::abs(g(rng)), std::abs(g(rng)), std::abs(g(rng)), std::abs(g(rng)));
    }
    return log;
}

}  // namespace

TEST(ParseTrajectory, WellFormedFile) {
    const TrajectoryLog log = load_trajectory(kData / "good_enu.csv");
    ASSERT_EQ(log.samples.size(), 3u);
    EXPECT_EQ(log.convention, Convention::ENU);
    ASSERT_TRUE(log.agent.has_value());
    EXPECT_EQ(*log.agent, Agent::Adas);
    EXPECT_EQ(log.metadata.at("recorded"), "bench");
    EXPECT_EQ(log.samples[1].translation, Vec3(0.05, 0, 0));
    EXPECT_EQ(log.samples[2].timestamp, 0.01);
    EXPECT_EQ(log.samples[0].child, FrameId::body(Agent::Adas));
    EXPECT_FALSE(log.has_sigmas());
    for (const Pose& p : log.samples) EXPECT_NEAR(p.rotation.norm(), 1.0, 1e-12);
}

TEST(ParseTrajectory, SigmaColumns) {
    const TrajectoryLog log = load_trajectory(kData / "with_sigmas.csv");
    ASSERT_EQ(log.sigmas.size(), 1u);
    EXPECT_EQ(log.sigmas[0], Eigen::Vector4d(0.1, 0.2, 0.001, 0.01));
}

TEST(ParseTrajectory, NedIsConverted) {
    const TrajectoryLog log = load_trajectory(kData / "ned.csv");
    EXPECT_EQ(log.convention, Convention::ENU);
    ASSERT_EQ(log.samples.size(), 1u);
    EXPECT_EQ(log.samples[0].translation, Vec3(2, 1, -3));
    EXPECT_EQ(log.samples[0].child, FrameId::body(Agent::Smart));
    EXPECT_NEAR(log.samples[0].rotation.to_rpy()(2), kPi / 2, 1e-12);
}

TEST(ParseTrajectory, DecreasingTimestampNamesRow) {
    const auto e = expect_error<MonotonicityError>("decreasing.csv");
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
}

TEST(ParseTrajectory, DuplicateTimestamp) {
    EXPECT_EQ(expect_error<DuplicateTimestampError>("duplicate.csv").row(), 2u);
}

TEST(ParseTrajectory, QuaternionNorm) {
    EXPECT_EQ(expect_error<QuaternionNormError>("bad_quaternion.csv").row(), 2u);
}

TEST(ParseTrajectory, ColumnCount) {
    EXPECT_EQ(expect_error<ColumnCountError>("bad_columns.csv").row(), 1u);
}

TEST(ParseTrajectory, BadNumberReportsLine) {
    const auto e = expect_error<ParseError>("bad_number.csv");
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
}

TEST(ParseTrajectory, NonFinite) {
    expect_error<NonFiniteValueError>("non_finite.csv");
}

TEST(ParseTrajectory, MissingHeader) {
    expect_error<ParseError>("missing_header.csv");
}

TEST(ParseTrajectory, MissingFile) {
    EXPECT_THROW(load_trajectory(kData / "does_not_exist.csv"), IoError);
}

TEST(ParseTrajectory, ErrorsAreDataCategory) {
    try {
        load_trajectory(kData / "decreasing.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Data);
    }
}

TEST(ExportTrajectory, EmptySeriesIsHeaderOnly) {
    TrajectoryLog log;
    std::istringstream in(to_text(log));
    std::string line;
    int data_lines = 0;
    std::string last;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        ++data_lines;
        last = line;
    }
    EXPECT_EQ(data_lines, 1);
    EXPECT_EQ(last, "t,x,y,z,qx,qy,qz,qw");

    std::istringstream back(to_text(log));
    EXPECT_TRUE(parse_trajectory(back).samples.empty());
}

TEST(ExportTrajectory, RoundTripThousandRandomPoses) {
    const TrajectoryLog log = random_log(1000, 1);
    std::istringstream in(to_text(log));
    const TrajectoryLog back = parse_trajectory(in);
    ASSERT_EQ(back.samples.size(), log.samples.size());
    ASSERT_EQ(back.sigmas.size(), log.sigmas.size());
    EXPECT_EQ(back.metadata, log.metadata);
    EXPECT_EQ(back.agent, log.agent);
    double worst = 0.0;
    for (std::size_t i = 0; i < log.samples.size(); ++i) {
        const Pose& a = log.samples[i];
        const Pose& b = back.samples[i];
        worst = std::max(worst, std::abs(a.timestamp - b.timestamp));
        worst = std::max(worst, (a.translation - b.translation).cwiseAbs().maxCoeff());
        worst = std::max({worst, std::abs(a.rotation.x() - b.rotation.x()), std::abs(a.rotation.y() - b.rotation.y()),
                          std::abs(a.rotation.z() - b.rotation.z()), std::abs(a.rotation.w() - b.rotation.w())});
        worst = std::max(worst, (log.sigmas[i] - back.sigmas[i]).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(ExportTrajectory, ByteDeterministic) {
    const TrajectoryLog log = random_log(200, 2);
    EXPECT_EQ(to_text(log), to_text(log));

    const auto dir = std::filesystem::temp_directory_path() / "coloc_io_test";
    std::filesystem::create_directories(dir);
    export_trajectory(log, dir / "a.csv");
    export_trajectory(log, dir / "b.csv");
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(f), {});
    };
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    EXPECT_EQ(slurp(dir / "a.csv"), to_text(log));
    std::filesystem::remove_all(dir);
}

TEST(ExportTrajectory, SigmaLengthMismatch) {
    TrajectoryLog log = random_log(3, 3);
    log.sigmas.pop_back();
    std::ostringstream os;
    EXPECT_THROW(write_trajectory(os, log), InvalidArgument);
}

TEST(EstimatesToLog, SigmasFromCovariance) {
    ekf::StateEstimate s;
    s.timestamp = 2.0;
    s.x(ekf::kX) = 1.0;
    s.P = ekf::StateMatrix::Identity();
    s.P(ekf::kX, ekf::kX) = 4.0;
    s.P(ekf::kYaw, ekf::kYaw) = 0.25;
    const TrajectoryLog log = estimates_to_log({s}, Agent::Adas);
    ASSERT_EQ(log.samples.size(), 1u);
    EXPECT_EQ(log.sigmas[0], Eigen::Vector4d(2.0, 1.0, 1.0, 0.5));
    EXPECT_EQ(log.samples[0].timestamp, 2.0);
}

TEST(Synchronize, ZeroOffsetIsNoOp) {
    const SyntheticPair gt = generate_synthetic(SyntheticSpec{PathKind::Straight, 2.0, 10.0, 1.0, 0, 5.0, 50.0});
    const auto [a, b] = synchronize(gt.smart, gt.adas, SyncSpec{});
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        EXPECT_EQ(a.samples[i].timestamp, gt.smart.samples[i].timestamp);
        EXPECT_EQ(b.samples[i].timestamp, gt.adas.samples[i].timestamp);
    }
}

TEST(Synchronize, ShiftsNonReferenceExactly) {
    const SyntheticPair gt = generate_synthetic(SyntheticSpec{PathKind::Straight, 2.0, 10.0, 1.0, 0, 5.0, 50.0});
    const auto [a, b] = synchronize(gt.smart, gt.adas, SyncSpec{1.5, Agent::Smart});
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        EXPECT_EQ(a.samples[i].timestamp, gt.smart.samples[i].timestamp);
        EXPECT_EQ(b.samples[i].timestamp, gt.adas.samples[i].timestamp + 1.5);
    }
    // Reference on the ADAS side: the smart log moves instead.
    const auto [c, d] = synchronize(gt.smart, gt.adas, SyncSpec{1.5, Agent::Adas});
    EXPECT_EQ(c.samples[0].timestamp, gt.smart.samples[0].timestamp + 1.5);
    EXPECT_EQ(d.samples[0].timestamp, gt.adas.samples[0].timestamp);
}

TEST(Synchronize, BringsClockSkewedLogsInsideGate) {
    // The smart log was stamped 100.25 s ahead: nothing falls inside the gate.
    SyntheticPair gt = generate_synthetic(SyntheticSpec{PathKind::Circle, 10.0, 20.0, 5.0, 0, 5.0, 20.0});
    for (Pose& p : gt.smart.samples) p.timestamp += 100.25;
    EXPECT_TRUE(pair_samples(gt.smart.samples, gt.adas.samples, 0.1).empty());
    const auto [a, b] = synchronize(gt.smart, gt.adas, SyncSpec{100.25, Agent::Smart});
    const auto pairs = pair_samples(a.samples, b.samples, 0.1);
    ASSERT_EQ(pairs.size(), b.samples.size());
    for (const auto& p : pairs) EXPECT_LT(std::abs(p.smart_pose.timestamp - p.adas_pose.timestamp), 1e-9);
}

TEST(Synthetic, StraightLine) {
    const SyntheticPair gt = generate_synthetic(SyntheticSpec{PathKind::Straight, 10.0, 10.0, 1.0, 0, 10.0, 50.0});
    ASSERT_EQ(gt.adas.samples.size(), 100u);
    ASSERT_EQ(gt.smart.samples.size(), 100u);
    // The follower starts at the path origin at t = 0.
    EXPECT_NEAR(gt.adas.samples.back().translation.norm(), 10.0, 1e-12);
    for (std::size_t i = 0; i < gt.adas.samples.size(); ++i) {
        const Pose rel = relative_pose(gt.smart.samples[i], gt.adas.samples[i]);
        EXPECT_NEAR(rel.translation.x(), -10.0, 1e-9);
        EXPECT_NEAR(rel.translation.y(), 0.0, 1e-9);
        EXPECT_NEAR(rel.translation.z(), 0.0, 1e-9);
    }
}

TEST(Synthetic, SampleCountIsFloor) {
    const SyntheticPair gt = generate_synthetic(SyntheticSpec{PathKind::Straight, 1.234, 100.0, 1.0, 0, 1.0, 50.0});
    EXPECT_EQ(gt.adas.samples.size(), 123u);
    EXPECT_EQ(gt.adas.samples.front().timestamp, 0.01);
}

TEST(Synthetic, CircleLapClosesAndWinds) {
    const double r = 20.0, speed = 5.0, rate = 50.0;
    const double lap = 2 * kPi * r / speed;
    const SyntheticPair gt = generate_synthetic(SyntheticSpec{PathKind::Circle, lap, rate, speed, 0, 0.0, r});
    const auto& s = gt.adas.samples;
    double wound = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        wound += wrap_angle(s[i].rotation.to_rpy()(2) - s[i - 1].rotation.to_rpy()(2));
    }
    // From t = 1/rate to the last sample: the heading covers a lap minus at most two sample steps.
    const double step = speed / rate / r;
    EXPECT_NEAR(wound, 2 * kPi - step, step + 1e-9);
    // The lap starts at the path origin (t = 0); the last sample is within one step of it.
    EXPECT_LE(s.back().translation.norm(), speed / rate + 1e-9);
    for (const Pose& p : s) EXPECT_NEAR((p.translation - Vec3(0, r, 0)).norm(), r, 1e-9);
}

TEST(Synthetic, HeadingsTangentAndSpeedConstant) {
    for (PathKind kind : {PathKind::Circle, PathKind::FigureEight, PathKind::WaypointSpline}) {
        const SyntheticPair gt = generate_synthetic(SyntheticSpec{kind, 30.0, 200.0, 10.0, 4, 10.0, 50.0});
        const auto& s = gt.adas.samples;
        for (std::size_t i = 1; i + 1 < s.size(); i += 7) {
            const Vec3 v = (s[i + 1].translation - s[i - 1].translation) / (s[i + 1].timestamp - s[i - 1].timestamp);
            EXPECT_NEAR(v.norm(), 10.0, 0.02) << to_string(kind) << " sample " << i;
            const double heading = std::atan2(v.y(), v.x());
            EXPECT_NEAR(wrap_angle(heading - s[i].rotation.to_rpy()(2)), 0.0, 2e-3) << to_string(kind);
        }
    }
}

TEST(Synthetic, GapIsArcLength) {
    const SyntheticPair gt = generate_synthetic(SyntheticSpec{PathKind::FigureEight, 20.0, 200.0, 10.0, 0, 10.0, 50.0});
    for (std::size_t i = 0; i < gt.adas.samples.size(); i += 50) {
        const double d = (gt.smart.samples[i].translation - gt.adas.samples[i].translation).norm();
        // Chord never exceeds the arc and stays close on gentle curves.
        EXPECT_LE(d, 10.0 + 1e-9);
        EXPECT_GT(d, 9.5);
    }
}

TEST(Synthetic, DeterministicAndSeeded) {
    const SyntheticSpec a{PathKind::WaypointSpline, 5.0, 50.0, 8.0, 1, 10.0, 60.0};
    SyntheticSpec b = a;
    b.seed = 2;
    const auto x = generate_synthetic(a), y = generate_synthetic(a), z = generate_synthetic(b);
    EXPECT_EQ(to_text(x.adas), to_text(y.adas));
    EXPECT_NE(to_text(x.adas), to_text(z.adas));
}

TEST(Synthetic, InvalidParameters) {
    EXPECT_THROW(generate_synthetic(SyntheticSpec{PathKind::Straight, 0.0, 10.0, 1.0, 0, 1.0, 50.0}), InvalidArgument);
    EXPECT_THROW(generate_synthetic(SyntheticSpec{PathKind::Straight, 1.0, -1.0, 1.0, 0, 1.0, 50.0}), InvalidArgument);
    EXPECT_THROW(generate_synthetic(SyntheticSpec{PathKind::Circle, 1.0, 10.0, 1.0, 0, -1.0, 50.0}), InvalidArgument);
    EXPECT_THROW(parse_path_kind("spiral"), InvalidArgument);
    EXPECT_EQ(parse_path_kind("figure-eight"), PathKind::FigureEight);
}
