#include "vvaas/directory.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "vvaas/error.hpp"

namespace vvaas {

std::string_view to_string(VehicleStatus s) {
    switch (s) {
        case VehicleStatus::Active: return "active";
        case VehicleStatus::Deactivated: return "deactivated";
        case VehicleStatus::Left: return "left";
    }
    return "?";
}

std::string_view to_string(Lifecycle l) {
    switch (l) {
        case Lifecycle::Requested: return "requested";
        case Lifecycle::Creating: return "creating";
        case Lifecycle::Active: return "active";
        case Lifecycle::Migrating: return "migrating";
        case Lifecycle::Completed: return "completed";
        case Lifecycle::Failed: return "failed";
    }
    return "?";
}

Directory::Directory(DirectoryConfig config) : config_(config) {
    if (!(config_.update_interval > 0.0) || config_.miss_limit < 0 || !(config_.zone_radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "directory config: interval and radius must be > 0");
    }
}

void Directory::add_rsu(RsuState rsu) {
    if (!(rsu.coverage_radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "RSU " + rsu.id.str() + ": coverage_radius must be > 0");
    }
    if (!(rsu.bandwidth_mbps > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "RSU " + rsu.id.str() + ": bandwidth must be > 0");
    }
    const RsuId id = rsu.id;
    if (!rsus_.emplace(id, std::move(rsu)).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate RSU id " + id.str());
    }
}

const VehicleState& Directory::register_vehicle(const VehicleRegistration& info, double now) {
    if (info.resources.cpu_units < 1 || info.resources.storage_mb < 0) {
        throw Error(ErrorCode::InvalidArgument, "vehicle " + info.id.str() + ": invalid resources");
    }
    auto it = vehicles_.find(info.id);
    if (it != vehicles_.end() && it->second.status != VehicleStatus::Left) {
        throw Error(ErrorCode::DuplicateRegistration, "vehicle already registered: " + info.id.str());
    }
    VehicleState state;
    state.id = info.id;
    state.position = info.position;
    state.speed_kmh = info.speed_kmh;
    state.heading_deg = info.heading_deg;
    state.resources = info.resources;
    state.status = VehicleStatus::Active;
    state.last_update = now;
    state.current_rsu = try_current_rsu(info.position);
    auto [pos, _] = vehicles_.insert_or_assign(info.id, std::move(state));
    return pos->second;
}

bool Directory::update_vehicle(const VehicleId& id, GeoPosition position, double speed_kmh,
                               double heading_deg, double now) {
    auto it = vehicles_.find(id);
    if (it == vehicles_.end() || it->second.status == VehicleStatus::Left) {
        throw Error(ErrorCode::UnknownVehicle, "unknown vehicle: " + id.str());
    }
    VehicleState& v = it->second;
    v.position = position;
    v.speed_kmh = speed_kmh;
    v.heading_deg = heading_deg;
    v.last_update = now;
    v.current_rsu = try_current_rsu(position);
    const bool reactivated = v.status == VehicleStatus::Deactivated;
    v.status = VehicleStatus::Active;
    return reactivated;
}

std::vector<VehicleId> Directory::deactivate_stale(double now) {
    const double limit = config_.miss_limit * config_.update_interval;
    std::vector<VehicleId> out;
    for (auto& [id, v] : vehicles_) {
        if (v.status == VehicleStatus::Active && now - v.last_update > limit) {
            v.status = VehicleStatus::Deactivated;
            out.push_back(id);
        }
    }
    return out;
}

void Directory::mark_left(const VehicleId& id) {
    VehicleState& v = vehicle(id);
    v.status = VehicleStatus::Left;
    v.leaving = false;
}

std::vector<const VehicleState*> Directory::query_zone(const GeoPosition& center, double radius,
                                                       const std::optional<VehicleId>& exclude,
                                                       const std::optional<RsuId>& rsu_scope) const {
    if (!(radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "zone radius must be > 0");
    }
    std::vector<std::pair<double, const VehicleState*>> hits;
    for (const auto& [id, v] : vehicles_) {
        if (!v.selectable()) continue;
        if (exclude && id == *exclude) continue;
        if (rsu_scope && v.current_rsu != rsu_scope) continue;
        const double d = distance(v.position, center);
        if (d < radius) hits.emplace_back(d, &v);
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first, a.second->id) < std::tie(b.first, b.second->id);
    });
    std::vector<const VehicleState*> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(h.second);
    return out;
}

std::optional<RsuId> Directory::try_current_rsu(const GeoPosition& position) const {
    std::optional<RsuId> best;
    double best_d = 0.0;
    for (const auto& [id, r] : rsus_) {
        const double d = distance(position, r.position);
        if (d > r.coverage_radius) continue;
        // map iteration is id-ordered, so strict < keeps the smaller id on ties
        if (!best || d < best_d) {
            best = id;
            best_d = d;
        }
    }
    return best;
}

RsuId Directory::current_rsu(const GeoPosition& position) const {
    auto r = try_current_rsu(position);
    if (!r) {
        throw Error(ErrorCode::NoCoverage, "no RSU covers (" + std::to_string(position.x) + ", " +
                                               std::to_string(position.y) + ")");
    }
    return *r;
}

const VehicleState& Directory::vehicle(const VehicleId& id) const {
    auto it = vehicles_.find(id);
    if (it == vehicles_.end()) throw Error(ErrorCode::UnknownVehicle, "unknown vehicle: " + id.str());
    return it->second;
}

VehicleState& Directory::vehicle(const VehicleId& id) {
    return const_cast<VehicleState&>(std::as_const(*this).vehicle(id));
}

const RsuState& Directory::rsu(const RsuId& id) const {
    auto it = rsus_.find(id);
    if (it == rsus_.end()) throw Error(ErrorCode::InvalidArgument, "unknown RSU: " + id.str());
    return it->second;
}

RsuState& Directory::rsu(const RsuId& id) {
    return const_cast<RsuState&>(std::as_const(*this).rsu(id));
}

VirtualVehicle& Directory::vv(const VvId& id) {
    return const_cast<VirtualVehicle&>(std::as_const(*this).vv(id));
}

const VirtualVehicle& Directory::vv(const VvId& id) const {
    auto it = vvs_.find(id);
    if (it == vvs_.end()) {
        throw Error(ErrorCode::UnknownVirtualVehicle, "unknown virtual vehicle: " + id.str());
    }
    return it->second;
}

VirtualVehicle& Directory::add_vv(VirtualVehicle vv) {
    const VvId id = vv.id;
    auto [it, inserted] = vvs_.emplace(id, std::move(vv));
    if (!inserted) throw Error(ErrorCode::InvalidArgument, "duplicate virtual vehicle id " + id.str());
    return it->second;
}

GeoPosition Directory::host_position(const HostRef& host) const {
    if (const auto* v = std::get_if<VehicleId>(&host)) return vehicle(*v).position;
    return rsu(std::get<RsuId>(host)).position;
}

void Directory::attach(const VvId& id, const HostRef& host) {
    if (const auto* v = std::get_if<VehicleId>(&host)) {
        vehicle(*v).hosted_vvs.insert(id);
    } else {
        rsu(std::get<RsuId>(host)).hosted_vvs.insert(id);
    }
    vv(id).host = host;
}

void Directory::detach(const VvId& id, const HostRef& host) {
    if (const auto* v = std::get_if<VehicleId>(&host)) {
        vehicle(*v).hosted_vvs.erase(id);
    } else {
        rsu(std::get<RsuId>(host)).hosted_vvs.erase(id);
    }
}

}  // namespace vvaas
