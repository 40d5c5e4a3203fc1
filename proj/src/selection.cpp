#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <tuple>

#include "vvaas/error.hpp"
#include "vvaas/migration.hpp"

namespace vvaas {

bool needs_migration(const VirtualVehicle& vv, const VehicleState& host) {
    return quantize_heading(host.heading_deg) != vv.params.heading ||
           classify_speed(host.speed_kmh) != vv.params.speed_class;
}

std::string_view to_string(SelectionPolicy p) {
    switch (p) {
        case SelectionPolicy::MinWorkload: return "min_workload";
        case SelectionPolicy::Random: return "random";
        case SelectionPolicy::MaxRemainingTime: return "max_remaining_time";
    }
    return "?";
}

std::optional<SelectionPolicy> parse_selection_policy(std::string_view s) {
    for (auto p : {SelectionPolicy::MinWorkload, SelectionPolicy::Random,
                   SelectionPolicy::MaxRemainingTime}) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

std::vector<Candidate> zone_matches(const Directory& dir, const SelectionQuery& q) {
    std::vector<Candidate> out;
    for (const VehicleState* v : dir.query_zone(q.location, q.zone_radius, q.exclude, q.current_rsu)) {
        if (classify_speed(v->speed_kmh) != q.speed_class) continue;
        if (quantize_heading(v->heading_deg) != q.heading) continue;
        const GeoPosition rel{v->position.x - q.location.x, v->position.y - q.location.y};
        const Velocity mv = v->velocity();
        const Velocity rv{mv.vx - q.anchor_velocity.vx, mv.vy - q.anchor_velocity.vy};
        out.push_back({v->id, distance(v->position, q.location), v->workload(),
                       remaining_time_in_zone(rel, rv, q.zone_radius, q.horizon_cap)});
    }
    return out;
}

std::optional<Candidate> select_candidate(const Directory& dir, const SelectionQuery& q, Rng& rng) {
    return select_from(zone_matches(dir, q), q.policy, rng);
}

std::optional<Candidate> select_from(const std::vector<Candidate>& matches, SelectionPolicy policy, Rng& rng) {
    if (matches.empty()) return std::nullopt;

    switch (policy) {
        case SelectionPolicy::MinWorkload:
            return *std::min_element(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
                return std::tie(a.workload, a.distance, a.id) < std::tie(b.workload, b.distance, b.id);
            });
        case SelectionPolicy::Random:
            return matches[rng.index(matches.size())];
        case SelectionPolicy::MaxRemainingTime:
            return *std::min_element(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
                return std::make_tuple(-a.remaining_time, a.workload, a.distance, a.id) <
                       std::make_tuple(-b.remaining_time, b.workload, b.distance, b.id);
            });
    }
    return std::nullopt;
}

double remaining_time_in_zone(GeoPosition p, Velocity v, double radius, double horizon_cap) {
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "zone radius must be > 0");
    const double c = p.x * p.x + p.y * p.y - radius * radius;
    if (!(c < 0.0)) {
        throw Error(ErrorCode::NotInZone, "member is not inside the zone");
    }
    const double a = v.vx * v.vx + v.vy * v.vy;
    if (a == 0.0) return horizon_cap;
    const double b = 2.0 * (p.x * v.vx + p.y * v.vy);
    // c < 0 guarantees one positive and one negative root; pick the positive
    // one without cancellation.
    const double sq = std::sqrt(b * b - 4.0 * a * c);
    const double t = b >= 0.0 ? (2.0 * c) / (-b - sq) : (-b + sq) / (2.0 * a);
    return std::min(t, horizon_cap);
}

double remaining_time_in_zone(const VehicleState& member, const VehicleState& host, double radius,
                              double horizon_cap) {
    const Velocity mv = member.velocity();
    const Velocity hv = host.velocity();
    return remaining_time_in_zone({member.position.x - host.position.x, member.position.y - host.position.y},
                                  {mv.vx - hv.vx, mv.vy - hv.vy}, radius, horizon_cap);
}

}  // namespace vvaas
