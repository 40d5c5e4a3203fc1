#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vvaas/directory.hpp"
#include "vvaas/geo.hpp"
#include "vvaas/ids.hpp"
#include "vvaas/migration.hpp"
#include "vvaas/mobility.hpp"
#include "vvaas/network.hpp"
#include "vvaas/virtual_vehicle.hpp"

namespace vvaas {

struct ProtocolConfig {
    double update_interval = 10.0;
    int miss_limit = 2;
    double zone_radius = 100.0;
    int max_precopy_rounds = 5;
    double stop_threshold_mb = 8.0;
    double creation_delay = 1.0;
    double activation_delay = 0.5;
    double horizon_cap = 3600.0;
    SelectionPolicy policy = SelectionPolicy::MinWorkload;
    double default_image_mb = 256.0;
    double default_dirty_rate_mbps = 2.0;

    void validate() const;
};

struct RsuSpec {
    GeoPosition position;
    double coverage_radius = 400.0;
    double bandwidth_mbps = 50.0;
};

struct LeaveSpec {
    double t = 0.0;
    VehicleId vehicle;
};

struct VehiclesSpec {
    std::size_t count = 0;                    // synthetic grid vehicles
    std::optional<std::filesystem::path> trace_path;
    std::vector<TraceRecord> trace;           // in-memory trace replay
    double tick = 1.0;                        // mobility step, seconds
    Resources resources{4, 1024};
    std::vector<LeaveSpec> leaves;
};

struct DrivingChange {
    double t = 0.0;
    std::optional<SpeedClass> speed_class;
    std::optional<Heading8> heading;
    std::optional<GeoPosition> destination;
};

struct ConsumerScript {
    ConsumerId id;
    double t = 0.0;
    DrivingParams params;
    double image_mb = 256.0;
    double dirty_rate_mbps = 2.0;
    double retry_interval = 10.0;
    int max_retries = 0;
    std::vector<DrivingChange> updates;
};

struct RunConfig {
    double end_time = 3600.0;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> max_events;
    // Test hook: corrupt the host bookkeeping at this time.
    std::optional<double> inject_invariant_violation_at;
};

struct Scenario {
    WorldBounds world{1000.0, 1000.0};
    GridParams grid;
    std::vector<RsuSpec> rsus;
    VehiclesSpec vehicles;
    NetworkModel network;
    ProtocolConfig protocol;
    std::vector<ConsumerScript> consumers;
    RunConfig run;

    // Number of distinct physical vehicles the run will contain.
    std::size_t vehicle_count() const;

    // Throws ConfigError naming the first offending field.
    void validate() const;
};

// Parses TOML text. Relative trace paths resolve against base_dir.
Scenario parse_scenario(std::string_view toml_text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace vvaas
