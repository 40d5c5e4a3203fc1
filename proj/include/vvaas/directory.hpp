#pragma once

#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "vvaas/geo.hpp"
#include "vvaas/ids.hpp"
#include "vvaas/virtual_vehicle.hpp"

namespace vvaas {

enum class VehicleStatus { Active, Deactivated, Left };

std::string_view to_string(VehicleStatus s);

struct Resources {
    int cpu_units = 1;
    long storage_mb = 0;
};

struct VehicleState {
    VehicleId id;
    GeoPosition position;
    double speed_kmh = 0.0;
    double heading_deg = 0.0;
    Resources resources;
    VehicleStatus status = VehicleStatus::Active;
    double last_update = 0.0;
    std::set<VvId> hosted_vvs;
    // Provisional containers for migrations that have not committed yet.
    std::set<VvId> reserved_vvs;
    std::optional<RsuId> current_rsu;
    // Leave requested; drained of VVs before becoming Left.
    bool leaving = false;

    std::size_t workload() const { return hosted_vvs.size() + reserved_vvs.size(); }
    bool selectable() const { return status == VehicleStatus::Active && !leaving; }
    Velocity velocity() const { return velocity_of(speed_kmh, heading_deg); }
};

// What a vehicle announces when it joins.
struct VehicleRegistration {
    VehicleId id;
    GeoPosition position;
    double speed_kmh = 0.0;
    double heading_deg = 0.0;
    Resources resources;
};

struct RsuState {
    RsuId id;
    GeoPosition position;
    double coverage_radius = 0.0;
    double bandwidth_mbps = 0.0;
    std::set<VvId> hosted_vvs;
};

struct DirectoryConfig {
    double update_interval = 10.0;
    int miss_limit = 2;
    double zone_radius = 100.0;
};

// Registry of vehicles, RSUs and virtual vehicles kept by the cloud manager.
class Directory {
public:
    explicit Directory(DirectoryConfig config = {});

    const DirectoryConfig& config() const { return config_; }

    void add_rsu(RsuState rsu);

    // Throws DuplicateRegistration if the id is Active or Deactivated.
    const VehicleState& register_vehicle(const VehicleRegistration& info, double now);

    // Refreshes kinematics and the current RSU. Reactivates a Deactivated
    // vehicle; returns true in that case. Throws UnknownVehicle for unknown
    // or Left ids.
    bool update_vehicle(const VehicleId& id, GeoPosition position, double speed_kmh,
                        double heading_deg, double now);

    // Active vehicles silent for more than miss_limit update intervals become
    // Deactivated. Returns them in id order.
    std::vector<VehicleId> deactivate_stale(double now);

    void mark_left(const VehicleId& id);

    // Active, non-leaving vehicles strictly within radius of center, sorted by
    // (distance, id). With rsu_scope set, only vehicles currently attached to
    // that RSU are considered.
    std::vector<const VehicleState*> query_zone(const GeoPosition& center, double radius,
                                                const std::optional<VehicleId>& exclude = {},
                                                const std::optional<RsuId>& rsu_scope = {}) const;

    // Nearest RSU covering the position, ties by id. Throws NoCoverage.
    RsuId current_rsu(const GeoPosition& position) const;
    std::optional<RsuId> try_current_rsu(const GeoPosition& position) const;

    bool has_vehicle(const VehicleId& id) const { return vehicles_.contains(id); }
    const VehicleState& vehicle(const VehicleId& id) const;
    VehicleState& vehicle(const VehicleId& id);
    const RsuState& rsu(const RsuId& id) const;
    RsuState& rsu(const RsuId& id);

    const std::map<VehicleId, VehicleState>& vehicles() const { return vehicles_; }
    const std::map<RsuId, RsuState>& rsus() const { return rsus_; }

    bool has_vv(const VvId& id) const { return vvs_.contains(id); }
    VirtualVehicle& vv(const VvId& id);
    const VirtualVehicle& vv(const VvId& id) const;
    VirtualVehicle& add_vv(VirtualVehicle vv);
    const std::map<VvId, VirtualVehicle>& vvs() const { return vvs_; }

    GeoPosition host_position(const HostRef& host) const;

    // Primary-host bookkeeping; keep VV.host and the hosted sets in step.
    void attach(const VvId& vv, const HostRef& host);
    void detach(const VvId& vv, const HostRef& host);

private:
    DirectoryConfig config_;
    std::map<VehicleId, VehicleState> vehicles_;
    std::map<RsuId, RsuState> rsus_;
    std::map<VvId, VirtualVehicle> vvs_;
};

}  // namespace vvaas
