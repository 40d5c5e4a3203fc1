#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "vvaas/directory.hpp"
#include "vvaas/geo.hpp"
#include "vvaas/ids.hpp"
#include "vvaas/rng.hpp"
#include "vvaas/virtual_vehicle.hpp"

namespace vvaas {

// ---------------------------------------------------------------------------
// Migration decision and candidate selection
// ---------------------------------------------------------------------------

// True when the host's quantized heading or speed class no longer matches
// what the consumer asked for. Location never triggers against the current
// host: the VV's location is by definition the host's location.
bool needs_migration(const VirtualVehicle& vv, const VehicleState& host);

enum class SelectionPolicy { MinWorkload, Random, MaxRemainingTime };

std::string_view to_string(SelectionPolicy p);
std::optional<SelectionPolicy> parse_selection_policy(std::string_view s);

struct SelectionQuery {
    RsuId current_rsu;
    GeoPosition location;
    SpeedClass speed_class = SpeedClass::Medium;
    Heading8 heading = Heading8::N;
    double zone_radius = 100.0;
    SelectionPolicy policy = SelectionPolicy::MinWorkload;
    std::optional<VehicleId> exclude;
    // Motion of the zone centre; zero for an RSU-hosted VV.
    Velocity anchor_velocity;
    double horizon_cap = 3600.0;
};

struct Candidate {
    VehicleId id;
    double distance = 0.0;
    std::size_t workload = 0;
    double remaining_time = 0.0;
};

// Zone members (same RSU, strictly inside the radius) whose speed class and
// heading sector both match, in (distance, id) order, with their remaining
// time in zone filled in.
std::vector<Candidate> zone_matches(const Directory& dir, const SelectionQuery& q);

// Picks a new host per policy. MinWorkload breaks ties by distance then id;
// MaxRemainingTime breaks ties the same way after the time. The rng is only
// drawn for the Random policy.
std::optional<Candidate> select_candidate(const Directory& dir, const SelectionQuery& q, Rng& rng);

// Policy step alone, over matches already in (distance, id) order.
std::optional<Candidate> select_from(const std::vector<Candidate>& matches, SelectionPolicy policy, Rng& rng);

// Smallest t > 0 at which a member moving with constant relative velocity
// leaves the circle of the given radius. Returns horizon_cap for zero relative
// velocity or exits beyond the cap. Throws NotInZone when the member starts
// outside the circle.
double remaining_time_in_zone(GeoPosition rel_position, Velocity rel_velocity, double radius,
                              double horizon_cap);

double remaining_time_in_zone(const VehicleState& member, const VehicleState& host, double radius,
                              double horizon_cap);

// ---------------------------------------------------------------------------
// Pre-copy transfer model
// ---------------------------------------------------------------------------

struct TransferPlan {
    std::vector<double> round_durations;  // live pre-copy rounds, seconds
    double stop_and_copy_mb = 0.0;
    double downtime = 0.0;                // stop-and-copy duration, seconds

    double precopy_time() const;
};

// Round 1 sends the whole image; each later round resends what was dirtied
// during the previous one, until the dirtied amount drops to the threshold or
// max_rounds is reached. When dirty_rate >= bandwidth the image goes straight
// to stop-and-copy.
TransferPlan plan_transfer(double image_mb, double dirty_rate_mbps, double bandwidth_mbps,
                           int max_rounds, double stop_threshold_mb);

// ---------------------------------------------------------------------------
// Transaction state
// ---------------------------------------------------------------------------

enum class Phase { Reserve, PreCopy, StopAndCopy, AwaitAck, Committed, Activated, Aborted };

enum class AbortReason {
    None,
    CandidateLost,
    SourceLost,
    ReserveTimeout,
    AckTimeout,
    ReservationRejected,
};

enum class MigrationCause { Decision, Leave, Fallback, Retry, Emergency };

std::string_view to_string(Phase p);
std::string_view to_string(AbortReason r);
std::string_view to_string(MigrationCause c);

inline bool is_terminal(Phase p) { return p == Phase::Activated || p == Phase::Aborted; }

struct MigrationTransaction {
    TxnId id = 0;
    VvId vv;
    HostRef source;
    HostRef candidate;
    MigrationCause cause = MigrationCause::Decision;
    Phase phase = Phase::Reserve;
    AbortReason reason = AbortReason::None;
    int round = 0;             // current pre-copy round, 1-based
    double remaining_mb = 0.0; // data still to send in the current phase
    double started_at = 0.0;
    std::optional<double> frozen_at;  // stop-and-copy start
    double downtime = 0.0;
    TransferPlan plan;
    int attempts = 0;          // sends of the current request message
    // Set when the source host is gone; no pre-copy or source acknowledgment.
    bool emergency = false;
};

}  // namespace vvaas
