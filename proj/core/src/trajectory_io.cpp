#include "coloc/trajectory_io.hpp"

#include "coloc/error.hpp"
#include "coloc/noise.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace coloc {

std::string to_string(Convention c) { return c == Convention::NED ? "NED" : "ENU"; }

namespace {

constexpr std::string_view kPoseHeader = "t,x,y,z,qx,qy,qz,qw";
constexpr std::string_view kSigmaHeader = ",sx,sy,sz,syaw";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string where(const std::string& source, std::size_t row, std::size_t line) {
    std::ostringstream os;
    os << source << ": row " << row << " (line " << line << ")";
    return os.str();
}

double parse_number(std::string_view field, const std::string& source, std::size_t row,
                    std::size_t line) {
    std::string_view f = field;
    if (!f.empty() && f.front() == '+') f.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
    if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) {
        throw ParseError(where(source, row, line) + ": cannot parse number '" + std::string(field) + "'",
                         row, line);
    }
    if (!std::isfinite(value)) {
        throw NonFiniteValueError(where(source, row, line) + ": non-finite value '" + std::string(field) + "'",
                                  row, line);
    }
    return value;
}

void write_number(std::ostream& out, double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.write(buf.data(), res.ptr - buf.data());
}

}  // namespace

TrajectoryLog parse_trajectory(std::istream& in, const std::string& source) {
    TrajectoryLog log;
    std::string raw;
    std::size_t line_no = 0;
    std::size_t row = 0;
    std::size_t columns = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;

        if (columns == 0) {
            if (line.front() == '#') {
                const std::string_view body = trim(line.substr(1));
                const auto eq = body.find('=');
                if (eq == std::string_view::npos) continue;  // free comment
                const std::string key(trim(body.substr(0, eq)));
                const std::string value(trim(body.substr(eq + 1)));
                if (key == "convention") {
                    if (value == "NED") log.convention = Convention::NED;
                    else if (value == "ENU") log.convention = Convention::ENU;
                    else throw ParseError(source + ": unknown convention '" + value + "'", 0, line_no);
                } else if (key == "agent") {
                    try {
                        log.agent = parse_agent(value);
                    } catch (const InvalidArgument& e) {
                        throw ParseError(source + ": " + e.what(), 0, line_no);
                    }
                } else {
                    log.metadata[key] = value;
                }
                continue;
            }
            if (line == kPoseHeader) {
                columns = 8;
            } else if (line == std::string(kPoseHeader) + std::string(kSigmaHeader)) {
                columns = 12;
            } else {
                throw ParseError(source + ": expected header '" + std::string(kPoseHeader) + "' at line " +
                                     std::to_string(line_no),
                                 0, line_no);
            }
            continue;
        }

        ++row;
        const auto fields = split(line, ',');
        if (fields.size() != columns) {
            throw ColumnCountError(where(source, row, line_no) + ": expected " + std::to_string(columns) +
                                       " columns, got " + std::to_string(fields.size()),
                                   row, line_no);
        }
        std::array<double, 12> v{};
        for (std::size_t i = 0; i < columns; ++i) v[i] = parse_number(fields[i], source, row, line_no);

        const double qn = std::sqrt(v[4] * v[4] + v[5] * v[5] + v[6] * v[6] + v[7] * v[7]);
        if (std::abs(qn - 1.0) > 1e-6) {
            throw QuaternionNormError(where(source, row, line_no) + ": quaternion norm " + std::to_string(qn) +
                                          " is not within 1e-6 of 1",
                                      row, line_no);
        }
        if (v[0] < 0.0) {
            throw ParseError(where(source, row, line_no) + ": negative timestamp", row, line_no);
        }
        if (!log.samples.empty()) {
            const double prev = log.samples.back().timestamp;
            if (v[0] == prev) {
                throw DuplicateTimestampError(where(source, row, line_no) + ": duplicate timestamp", row, line_no);
            }
            if (v[0] < prev) {
                throw MonotonicityError(where(source, row, line_no) + ": timestamp decreases", row, line_no);
            }
        }

        Pose p;
        p.timestamp = v[0];
        p.translation = Vec3(v[1], v[2], v[3]);
        p.rotation = Quaternion(v[4], v[5], v[6], v[7]);
        p.parent = FrameId::world();
        p.child = FrameId::body(log.agent.value_or(Agent::Adas));
        log.samples.push_back(p);
        if (columns == 12) log.sigmas.emplace_back(v[8], v[9], v[10], v[11]);
    }

    if (columns == 0) throw ParseError(source + ": missing header line", 0, line_no);

    if (log.convention == Convention::NED) {
        for (Pose& p : log.samples) p = ned_to_enu(p);
        log.convention = Convention::ENU;
    }
    return log;
}

TrajectoryLog load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory file '" + path.string() + "'");
    return parse_trajectory(in, path.string());
}

void write_trajectory(std::ostream& out, const TrajectoryLog& log) {
    if (log.has_sigmas() && log.sigmas.size() != log.samples.size()) {
        throw InvalidArgument("sigma series length does not match sample count");
    }
    if (log.agent) out << "# agent=" << to_string(*log.agent) << '\n';
    out << "# convention=" << to_string(log.convention) << '\n';
    for (const auto& [key, value] : log.metadata) out << "# " << key << '=' << value << '\n';
    out << kPoseHeader;
    if (log.has_sigmas()) out << kSigmaHeader;
    out << '\n';

    for (std::size_t i = 0; i < log.samples.size(); ++i) {
        const Pose& p = log.samples[i];
        const std::array<double, 8> v{p.timestamp, p.translation.x(), p.translation.y(), p.translation.z(),
                                      p.rotation.x(), p.rotation.y(), p.rotation.z(), p.rotation.w()};
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (k) out << ',';
            write_number(out, v[k]);
        }
        if (log.has_sigmas()) {
            for (int k = 0; k < 4; ++k) {
                out << ',';
                write_number(out, log.sigmas[i](k));
            }
        }
        out << '\n';
    }
}

void export_trajectory(const TrajectoryLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_trajectory(out, log);
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

TrajectoryLog estimates_to_log(const std::vector<ekf::StateEstimate>& series, Agent agent) {
    TrajectoryLog log;
    log.agent = agent;
    log.convention = Convention::ENU;
    log.samples.reserve(series.size());
    log.sigmas.reserve(series.size());
    for (const auto& s : series) {
        log.samples.push_back(s.pose(FrameId::world(), FrameId::body(agent)));
        const auto& P = s.P;
        log.sigmas.emplace_back(std::sqrt(std::max(0.0, P(ekf::kX, ekf::kX))),
                                std::sqrt(std::max(0.0, P(ekf::kY, ekf::kY))),
                                std::sqrt(std::max(0.0, P(ekf::kZ, ekf::kZ))),
                                std::sqrt(std::max(0.0, P(ekf::kYaw, ekf::kYaw))));
    }
    return log;
}

std::pair<TrajectoryLog, TrajectoryLog> synchronize(TrajectoryLog a, TrajectoryLog b,
                                                    const SyncSpec& spec) {
    if (!std::isfinite(spec.offset_seconds)) throw InvalidArgument("sync offset must be finite");
    const bool shift_a = b.agent == spec.reference && a.agent != spec.reference;
    TrajectoryLog& target = shift_a ? a : b;
    for (Pose& p : target.samples) {
        p.timestamp += spec.offset_seconds;
        if (p.timestamp < 0.0) throw InvalidArgument("sync offset makes a timestamp negative");
    }
    return {std::move(a), std::move(b)};
}

std::string to_string(PathKind kind) {
    switch (kind) {
        case PathKind::Straight: return "straight";
        case PathKind::Circle: return "circle";
        case PathKind::FigureEight: return "figure-eight";
        case PathKind::WaypointSpline: return "waypoint-spline";
    }
    return "?";
}

PathKind parse_path_kind(const std::string& text) {
    for (PathKind k : {PathKind::Straight, PathKind::Circle, PathKind::FigureEight, PathKind::WaypointSpline}) {
        if (to_string(k) == text) return k;
    }
    throw InvalidArgument("unknown trajectory kind '" + text +
                          "' (expected straight|circle|figure-eight|waypoint-spline)");
}

void SyntheticSpec::validate() const {
    if (!(duration > 0.0) || !(rate > 0.0) || !(speed > 0.0)) {
        throw InvalidArgument("synthetic duration, rate and speed must be > 0");
    }
    if (!(gap >= 0.0) || !(size > 0.0)) throw InvalidArgument("synthetic gap must be >= 0 and size > 0");
}

namespace {

using Vec2 = Eigen::Vector2d;

// Closed planar curve c(u), u in [0, period), re-parametrized by arc length.
class ClosedPath {
  public:
    ClosedPath(std::function<Vec2(double)> position, std::function<Vec2(double)> tangent, double period)
        : position_(std::move(position)), tangent_(std::move(tangent)), period_(period) {
        u_.resize(kSegments + 1);
        s_.resize(kSegments + 1);
        s_[0] = 0.0;
        for (int k = 0; k <= kSegments; ++k) u_[k] = period_ * k / kSegments;
        for (int k = 0; k < kSegments; ++k) s_[k + 1] = s_[k] + segment_length(u_[k], u_[k + 1]);
    }

    double length() const { return s_.back(); }

    // Position and heading at arc length s (wrapped onto one lap).
    std::pair<Vec2, double> at(double s) const {
        const double L = length();
        s = std::fmod(s, L);
        if (s < 0.0) s += L;
        const auto it = std::upper_bound(s_.begin(), s_.end(), s);
        const std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - s_.begin() - 1, 0), kSegments - 1);
        double u = u_[k] + (s - s_[k]) / tangent_(u_[k]).norm();
        for (int iter = 0; iter < 3; ++iter) {
            const double err = s_[k] + segment_length(u_[k], u) - s;
            u -= err / tangent_(u).norm();
        }
        const Vec2 d = tangent_(u);
        return {position_(u), std::atan2(d.y(), d.x())};
    }

  private:
    static constexpr int kSegments = 4096;

    // 5-point Gauss-Legendre on |c'(u)|.
    double segment_length(double a, double b) const {
        static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831,
                                                 -0.9061798459386640, 0.9061798459386640};
        static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                 0.2369268850561891, 0.2369268850561891};
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        double sum = 0.0;
        for (int i = 0; i < 5; ++i) sum += w[i] * tangent_(mid + half * x[i]).norm();
        return sum * half;
    }

    std::function<Vec2(double)> position_;
    std::function<Vec2(double)> tangent_;
    double period_;
    std::vector<double> u_;
    std::vector<double> s_;
};

ClosedPath make_circle(double r) {
    return ClosedPath([r](double u) { return Vec2(r * std::sin(u), r - r * std::cos(u)); },
                      [r](double u) { return Vec2(r * std::cos(u), r * std::sin(u)); }, 2.0 * kPi);
}

ClosedPath make_figure_eight(double a) {
    return ClosedPath([a](double u) { return Vec2(a * std::sin(u), 0.5 * a * std::sin(2.0 * u)); },
                      [a](double u) { return Vec2(a * std::cos(u), a * std::cos(2.0 * u)); }, 2.0 * kPi);
}

// Closed Catmull-Rom spline through jittered points on a circle.
ClosedPath make_waypoint_spline(double extent, std::uint64_t seed) {
    constexpr int kWaypoints = 8;
    RandomStream rng(seed, "synthetic/waypoints");
    std::vector<Vec2> pts;
    for (int i = 0; i < kWaypoints; ++i) {
        const double ang = 2.0 * kPi * (i + 0.3 * (rng.uniform() - 0.5)) / kWaypoints;
        const double rad = extent * (0.7 + 0.6 * rng.uniform());
        pts.emplace_back(rad * std::cos(ang), rad * std::sin(ang));
    }
    const Vec2 shift = pts[0];
    for (auto& p : pts) p -= shift;

    auto segment = [pts](double u, int& i, double& t) {
        const double w = std::fmod(std::fmod(u, kWaypoints) + kWaypoints, kWaypoints);
        i = std::min(static_cast<int>(w), kWaypoints - 1);
        t = w - i;
    };
    auto point = [pts](int i) { return pts[((i % kWaypoints) + kWaypoints) % kWaypoints]; };
    auto position = [=](double u) {
        int i = 0;
        double t = 0.0;
        segment(u, i, t);
        const Vec2 p0 = point(i - 1), p1 = point(i), p2 = point(i + 1), p3 = point(i + 2);
        const double t2 = t * t, t3 = t2 * t;
        return Vec2(0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                           (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3));
    };
    auto tangent = [=](double u) {
        int i = 0;
        double t = 0.0;
        segment(u, i, t);
        const Vec2 p0 = point(i - 1), p1 = point(i), p2 = point(i + 1), p3 = point(i + 2);
        const double t2 = t * t;
        return Vec2(0.5 * ((-p0 + p2) + 2.0 * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t +
                           3.0 * (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t2));
    };
    return ClosedPath(position, tangent, kWaypoints);
}

Pose planar_pose(const Vec2& xy, double heading, double t, Agent agent) {
    Pose p;
    p.timestamp = t;
    p.translation = Vec3(xy.x(), xy.y(), 0.0);
    p.rotation = quat_yaw(heading);
    p.parent = FrameId::world();
    p.child = FrameId::body(agent);
    return p;
}

}  // namespace

SyntheticPair generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();

    std::function<std::pair<Vec2, double>(double)> at;
    std::optional<ClosedPath> closed;
    switch (spec.kind) {
        case PathKind::Straight:
            at = [](double s) { return std::make_pair(Vec2(s, 0.0), 0.0); };
            break;
        case PathKind::Circle: closed = make_circle(spec.size); break;
        case PathKind::FigureEight: closed = make_figure_eight(spec.size); break;
        case PathKind::WaypointSpline: closed = make_waypoint_spline(spec.size, spec.seed); break;
    }
    if (closed) at = [&closed](double s) { return closed->at(s); };

    SyntheticPair out;
    out.smart.agent = Agent::Smart;
    out.adas.agent = Agent::Adas;
    for (TrajectoryLog* log : {&out.smart, &out.adas}) {
        log->convention = Convention::ENU;
        log->metadata["source"] = "synthetic";
        log->metadata["kind"] = to_string(spec.kind);
    }

    const auto n = static_cast<std::size_t>(std::floor(spec.duration * spec.rate));
    out.smart.samples.reserve(n);
    out.adas.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1) / spec.rate;
        const double s = spec.speed * t;
        const auto [lead_xy, lead_heading] = at(s + spec.gap);
        const auto [follow_xy, follow_heading] = at(s);
        out.smart.samples.push_back(planar_pose(lead_xy, lead_heading, t, Agent::Smart));
        out.adas.samples.push_back(planar_pose(follow_xy, follow_heading, t, Agent::Adas));
    }
    return out;
}

}  // namespace coloc
