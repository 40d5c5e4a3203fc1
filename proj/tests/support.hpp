#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vvaas/engine.hpp"
#include "vvaas/scenario.hpp"

namespace vvaas::testing {

// A vehicle driving in a straight line, one trace row per second.
inline std::vector<TraceRecord> straight_trace(const std::string& id, GeoPosition start, double speed_kmh,
                                               double heading_deg, double t0, double t1) {
    std::vector<TraceRecord> out;
    const Velocity v = velocity_of(speed_kmh, heading_deg);
    for (double t = t0; t <= t1 + 1e-9; t += 1.0) {
        const double dt = t - t0;
        out.push_back({t, VehicleId(id), {start.x + v.vx * dt, start.y + v.vy * dt}, speed_kmh, heading_deg});
    }
    return out;
}

inline void append(std::vector<TraceRecord>& to, const std::vector<TraceRecord>& more) {
    to.insert(to.end(), more.begin(), more.end());
}

// 1 km square, one RSU in the middle covering all of it, lossless links.
inline Scenario base_scenario() {
    Scenario sc;
    sc.world = {1000.0, 1000.0};
    sc.grid.world = sc.world;
    sc.rsus.push_back({{500.0, 500.0}, 800.0, 50.0});
    sc.run.end_time = 600.0;
    return sc;
}

inline ConsumerScript consumer(const std::string& id, double t, GeoPosition source, SpeedClass cls,
                               Heading8 heading, GeoPosition destination = {999.0, 999.0}) {
    ConsumerScript c;
    c.id = ConsumerId(id);
    c.t = t;
    c.params = {source, destination, cls, heading};
    return c;
}

}  // namespace vvaas::testing
