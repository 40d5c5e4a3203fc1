#pragma once

#include <cstdint>
#include <string_view>
#include <variant>

#include "vvaas/ids.hpp"
#include "vvaas/migration.hpp"
#include "vvaas/mobility.hpp"

namespace vvaas {

struct CloudManager {
    bool operator==(const CloudManager&) const = default;
};

// Addressable party on the network.
using Endpoint = std::variant<CloudManager, VehicleId, RsuId>;

Endpoint endpoint_of(const HostRef& host);
std::string endpoint_name(const Endpoint& e);

enum class MsgKind {
    VehicleReport,      // vehicle -> manager: periodic kinematics
    ReserveRequest,     // manager -> candidate
    ReserveReply,       // candidate -> manager
    MigrationReceived,  // candidate -> source; the source commits on receipt
};

std::string_view to_string(MsgKind k);

struct Message {
    MsgKind kind = MsgKind::VehicleReport;
    Endpoint from;
    Endpoint to;
    TxnId txn = 0;
    int attempt = 0;
    bool accepted = false;
    Kinematics report;
};

// Only links touching a vehicle can lose messages.
bool is_lossy(const Message& m);

namespace ev {
struct MobilityTick {};
struct VehicleUpdate { VehicleId vehicle; };  // a vehicle's report timer fired
struct LivenessCheck {};
struct VvRequest { std::size_t consumer = 0; int attempt = 0; };
struct DrivingUpdate { std::size_t consumer = 0; std::size_t index = 0; };
struct MsgDelivery { Message msg; };
struct TransferRoundDone { TxnId txn = 0; int round = 0; };
struct RetryTimer { VvId vv; };
struct ActivationDone { TxnId txn = 0; };
struct CreationDone { VvId vv; };
struct MsgTimeout { TxnId txn = 0; Phase phase = Phase::Reserve; int attempt = 0; };
struct TraceStep { std::size_t index = 0; };
struct VehicleLeave { VehicleId vehicle; };
struct InjectFault {};
}  // namespace ev

using EventPayload =
    std::variant<ev::MobilityTick, ev::VehicleUpdate, ev::LivenessCheck, ev::VvRequest, ev::DrivingUpdate,
                 ev::MsgDelivery, ev::TransferRoundDone, ev::RetryTimer, ev::ActivationDone,
                 ev::CreationDone, ev::MsgTimeout, ev::TraceStep, ev::VehicleLeave, ev::InjectFault>;

std::string_view event_kind(const EventPayload& p);

struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventPayload payload;
};

}  // namespace vvaas
