#pragma once

#include "coloc/ekf.hpp"
#include "coloc/se3.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace coloc {

enum class Convention { NED, ENU };

std::string to_string(Convention c);

/// Per-sample 1-sigma of an estimate: (sx, sy, sz, syaw), SI units.
using PoseSigma = Eigen::Vector4d;

/**
 * Time-ordered World -> Body poses of one vehicle.
 *
 * `sigmas` is empty for ground-truth/raw logs and parallel to `samples`
 * for filter estimates.
 */
struct TrajectoryLog {
    std::optional<Agent> agent;
    Convention convention = Convention::ENU;
    std::vector<Pose> samples;
    std::vector<PoseSigma> sigmas;
    std::map<std::string, std::string> metadata;

    bool has_sigmas() const { return !sigmas.empty(); }
};

/// Parses the CSV trajectory format. NED logs are converted to ENU and
/// relabelled. `source` only feeds error messages.
TrajectoryLog parse_trajectory(std::istream& in, const std::string& source = "<stream>");
TrajectoryLog load_trajectory(const std::filesystem::path& path);

/// Writes the normative CSV. Numbers use the shortest representation that
/// round-trips exactly, so load(export(x)) == x.
void write_trajectory(std::ostream& out, const TrajectoryLog& log);
void export_trajectory(const TrajectoryLog& log, const std::filesystem::path& path);

/// Estimate series with 1-sigma columns taken from the pose block of P.
TrajectoryLog estimates_to_log(const std::vector<ekf::StateEstimate>& series, Agent agent);

struct SyncSpec {
    double offset_seconds = 0.0;
    Agent reference = Agent::Smart;
};

/// Shifts the log that is not the reference by offset_seconds. If neither
/// log names the reference agent, `a` is treated as the reference.
std::pair<TrajectoryLog, TrajectoryLog> synchronize(TrajectoryLog a, TrajectoryLog b,
                                                    const SyncSpec& spec);

enum class PathKind { Straight, Circle, FigureEight, WaypointSpline };

std::string to_string(PathKind kind);
PathKind parse_path_kind(const std::string& text);

struct SyntheticSpec {
    PathKind kind = PathKind::FigureEight;
    double duration = 120.0;  // s
    double rate = 200.0;      // Hz
    double speed = 10.0;      // m/s
    std::uint64_t seed = 0;   // waypoint-spline layout only
    double gap = 10.0;        // m of arc length between leader and follower
    double size = 50.0;       // circle radius / figure-eight half width / spline extent, m

    void validate() const;
};

struct SyntheticPair {
    TrajectoryLog smart;
    TrajectoryLog adas;
};

/**
 * Leader and follower ground truth on the same planar path. The follower
 * trails the leader by `gap` metres of arc length; samples are at
 * t_i = (i + 1) / rate for i < floor(duration * rate), and the follower is
 * at the path origin at t = 0.
 */
SyntheticPair generate_synthetic(const SyntheticSpec& spec);

}  // namespace coloc
