#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vvaas/geo.hpp"
#include "vvaas/ids.hpp"
#include "vvaas/rng.hpp"

namespace vvaas {

// Ground-truth motion of one physical vehicle.
struct Kinematics {
    GeoPosition position;
    double speed_kmh = 0.0;
    double heading_deg = 0.0;

    bool operator==(const Kinematics&) const = default;
};

using SpeedTransition = std::array<std::array<double, 3>, 3>;

struct GridParams {
    WorldBounds world{1000.0, 1000.0};
    double block_length = 100.0;
    double turn_probability = 0.5;
    // Row i: probability of moving from speed class i to each class per tick.
    SpeedTransition speed_transition{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    std::array<double, 3> class_speeds_kmh{10.0, 35.0, 80.0};

    // Throws ConfigError describing the first violated constraint.
    void validate() const;
};

// Manhattan-grid mobility: vehicles drive along the lines x = k*block and
// y = k*block, turn at intersections, and bounce off the world edge.
class GridMobility {
public:
    explicit GridMobility(GridParams params);

    const GridParams& params() const { return params_; }

    // Random start on a road: an intersection, an axis heading and a class.
    Kinematics spawn(Rng& rng) const;

    // Draw order: one speed-class draw, then one turn draw per intersection
    // reached during the step.
    Kinematics step(const Kinematics& state, double dt, Rng& rng) const;

private:
    SpeedClass next_class(SpeedClass current, Rng& rng) const;
    double choose_heading(double heading, const GeoPosition& at, Rng& rng) const;
    bool leads_outside(const GeoPosition& at, double heading) const;

    GridParams params_;
};

// One row of a trace file.
struct TraceRecord {
    double t = 0.0;
    VehicleId vehicle;
    GeoPosition position;
    double speed_kmh = 0.0;
    double heading_deg = 0.0;

    bool operator==(const TraceRecord&) const = default;
};

inline constexpr std::string_view kTraceHeader = "t_s,vehicle_id,x_m,y_m,speed_kmh,heading_deg";

struct TraceSummary {
    std::size_t rows = 0;
    std::size_t vehicles = 0;
    double t_first = 0.0;
    double t_last = 0.0;
};

// Parse errors carry the 1-based line number in the message.
std::vector<TraceRecord> parse_trace(std::istream& in);
std::vector<TraceRecord> load_trace(const std::filesystem::path& path);

// Canonical form: header, LF endings, shortest round-trip decimals.
void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);

TraceSummary summarize(const std::vector<TraceRecord>& records);

}  // namespace vvaas
