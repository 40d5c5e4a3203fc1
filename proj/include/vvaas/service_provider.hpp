#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vvaas/directory.hpp"
#include "vvaas/events.hpp"
#include "vvaas/metrics.hpp"
#include "vvaas/migration.hpp"
#include "vvaas/network.hpp"
#include "vvaas/rng.hpp"
#include "vvaas/scenario.hpp"

namespace vvaas {

// What the protocol needs from the simulation engine.
class Runtime {
public:
    virtual ~Runtime() = default;
    virtual double now() const = 0;
    virtual void schedule(double at, EventPayload payload) = 0;
    virtual void send(Message msg) = 0;
    virtual Rng& selection_rng() = 0;
    // Records are only built when this is true.
    virtual bool logging() const = 0;
    virtual void log(nlohmann::ordered_json record) = 0;
};

struct LeaveResponse {
    VehicleId vehicle;
    // One destination per hosted VV that had to move.
    std::vector<std::pair<VvId, HostRef>> destinations;
};

// Active, non-leaving vehicles within U of the requested source whose speed
// class and heading sector match, in (distance, id) order.
std::vector<VehicleId> eligible_hosts(const Directory& dir, const DrivingParams& params, double zone_radius);

// The cloud manager and service provider: registry updates, VV provisioning,
// migration decisions and the migration transaction protocol. Host-side
// message handling (reservation replies, source commit) is also simulated
// here, since hosts are passive in this model.
class ServiceProvider {
public:
    ServiceProvider(Directory& directory, ProtocolConfig protocol, NetworkModel network, Runtime& runtime,
                    MetricsRecorder& metrics);

    // --- provisioning -----------------------------------------------------
    // Throws NoHostAvailable when no vehicle qualifies.
    VvId request_virtual_vehicle(const ConsumerId& consumer, const DrivingParams& params, double image_mb,
                                 double dirty_rate_mbps);
    // Throws UnknownVirtualVehicle or InvalidLifecycle.
    void update_driving_params(const VvId& vv, const DrivingParams& params);
    // Completes an Active VV whose host is inside the Same band of its
    // destination.
    bool check_completion(const VvId& vv);

    // --- registry -----------------------------------------------------------
    void on_vehicle_report(const VehicleId& id, const Kinematics& k);
    std::vector<VehicleId> on_liveness_check();
    LeaveResponse handle_leave(const VehicleId& id);

    // --- migration ---------------------------------------------------------
    // Starts the transaction machine; the VV becomes Migrating.
    TxnId start_migration(const VvId& vv, const HostRef& candidate, MigrationCause cause,
                          bool emergency = false);
    // Moves the VV from its vehicle host to that host's current RSU.
    void fallback_to_rsu(const VvId& vv);

    // --- event handlers ----------------------------------------------------
    void on_message(const Message& msg);
    void on_creation_done(const VvId& vv);
    void on_transfer_round(TxnId txn, int round);
    void on_timeout(TxnId txn, Phase phase, int attempt);
    void on_activation(TxnId txn);
    void on_retry_timer(const VvId& vv);

    // Throws InvariantViolation describing the first broken rule: exactly one
    // primary host per live VV, at most one reservation, hosted sets agreeing
    // with VV host references.
    void check_invariants() const;

    const std::map<TxnId, MigrationTransaction>& transactions() const { return txns_; }
    std::optional<TxnId> active_transaction(const VvId& vv) const;
    bool busy() const { return !active_.empty(); }

    const ProtocolConfig& protocol() const { return protocol_; }

private:
    MigrationTransaction& txn(TxnId id);
    void decide_migration(const VvId& vv, MigrationCause cause);
    void emergency_to_rsu(const VvId& vv, const VehicleId& dead_host);
    void fail_vv(const VvId& vv, std::string_view reason);
    void host_lost(const VehicleId& id);
    void maybe_finish_leave(const HostRef& host);
    void schedule_retry(const VvId& vv);

    void send_reserve(MigrationTransaction& t);
    void send_received(MigrationTransaction& t);
    void begin_transfer(MigrationTransaction& t);
    void enter_stop_and_copy(MigrationTransaction& t);
    void enter_await_ack(MigrationTransaction& t);
    void commit(MigrationTransaction& t);
    void abort(MigrationTransaction& t, AbortReason reason);
    bool unlimited_retries(const MigrationTransaction& t) const;

    void handle_reserve_request(const Message& msg);
    void handle_reserve_reply(const Message& msg);
    void handle_migration_received(const Message& msg);

    SelectionQuery query_for(const VirtualVehicle& vv, const RsuId& rsu, const GeoPosition& at,
                             Velocity anchor_velocity, std::optional<VehicleId> exclude) const;
    std::optional<Candidate> choose(const SelectionQuery& q);

    void log_phase(const MigrationTransaction& t);
    void log_vv(const VirtualVehicle& vv, std::string_view what);

    Directory& dir_;
    ProtocolConfig protocol_;
    NetworkModel network_;
    Runtime& rt_;
    MetricsRecorder& metrics_;
    std::map<TxnId, MigrationTransaction> txns_;
    std::map<VvId, TxnId> active_;
    TxnId next_txn_ = 1;
    std::size_t next_vv_ = 1;
};

}  // namespace vvaas
