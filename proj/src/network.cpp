#include "vvaas/network.hpp"

#include <algorithm>

#include "vvaas/error.hpp"

namespace vvaas {

Endpoint endpoint_of(const HostRef& host) {
    if (const auto* v = std::get_if<VehicleId>(&host)) return *v;
    return std::get<RsuId>(host);
}

std::string endpoint_name(const Endpoint& e) {
    if (std::holds_alternative<CloudManager>(e)) return "spcm";
    if (const auto* v = std::get_if<VehicleId>(&e)) return v->str();
    return std::get<RsuId>(e).str();
}

std::string_view to_string(MsgKind k) {
    switch (k) {
        case MsgKind::VehicleReport: return "vehicle_report";
        case MsgKind::ReserveRequest: return "reserve_request";
        case MsgKind::ReserveReply: return "reserve_reply";
        case MsgKind::MigrationReceived: return "migration_received";
    }
    return "?";
}

bool is_lossy(const Message& m) {
    return std::holds_alternative<VehicleId>(m.from) || std::holds_alternative<VehicleId>(m.to);
}

void NetworkModel::validate() const {
    if (!(latency_lo >= 0.0) || !(latency_hi >= latency_lo)) {
        throw Error(ErrorCode::ConfigError, "network latency must satisfy 0 <= lo <= hi");
    }
    if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "network drop_probability must be in [0,1]");
    }
    if (!(vehicle_bandwidth_mbps > 0.0) || !(rsu_bandwidth_mbps > 0.0)) {
        throw Error(ErrorCode::ConfigError, "network bandwidths must be > 0");
    }
    if (retry_limit < 0) throw Error(ErrorCode::ConfigError, "network retry_limit must be >= 0");
}

double NetworkModel::bandwidth_between(const HostRef& a, const HostRef& b) const {
    const bool va = is_vehicle(a);
    const bool vb = is_vehicle(b);
    if (va && vb) return vehicle_bandwidth_mbps;
    if (va || vb) return std::min(vehicle_bandwidth_mbps, rsu_bandwidth_mbps);
    return rsu_bandwidth_mbps;
}

Network::Network(NetworkModel model, Rng& rng) : model_(model), rng_(rng) { model_.validate(); }

std::optional<double> Network::transmit(const Message& msg) {
    ++sent_;
    const double u = rng_.uniform01();
    const double latency =
        model_.latency_hi > model_.latency_lo ? rng_.uniform(model_.latency_lo, model_.latency_hi) : model_.latency_lo;
    if (is_lossy(msg) && u < model_.drop_probability) {
        ++dropped_;
        return std::nullopt;
    }
    return latency;
}

}  // namespace vvaas
