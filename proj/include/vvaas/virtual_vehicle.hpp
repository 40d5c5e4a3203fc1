#pragma once

#include <string_view>

#include "vvaas/geo.hpp"
#include "vvaas/ids.hpp"

namespace vvaas {

// What the consumer asks the virtual vehicle to do.
struct DrivingParams {
    GeoPosition source;
    GeoPosition destination;
    SpeedClass speed_class = SpeedClass::Medium;
    Heading8 heading = Heading8::N;
};

enum class Lifecycle { Requested, Creating, Active, Migrating, Completed, Failed };

std::string_view to_string(Lifecycle l);

inline bool is_terminal(Lifecycle l) {
    return l == Lifecycle::Completed || l == Lifecycle::Failed;
}

// Lifecycles in which the VV occupies exactly one primary host.
inline bool is_hosted(Lifecycle l) {
    return l == Lifecycle::Creating || l == Lifecycle::Active || l == Lifecycle::Migrating;
}

struct VvStats {
    int migrations_to_vehicle = 0;
    int migrations_to_rsu = 0;
    int failed_migrations = 0;
    double total_downtime = 0.0;
};

struct VirtualVehicle {
    VvId id;
    ConsumerId consumer;
    DrivingParams params;
    double image_mb = 256.0;
    double dirty_rate_mbps = 2.0;
    HostRef host;
    Lifecycle lifecycle = Lifecycle::Requested;
    VvStats stats;
    // Zone centre used while RSU-hosted: the last position of a vehicle host.
    GeoPosition anchor;
};

}  // namespace vvaas
