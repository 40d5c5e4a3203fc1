#pragma once

#include <cstdint>
#include <optional>

#include "vvaas/events.hpp"
#include "vvaas/rng.hpp"

namespace vvaas {

struct NetworkModel {
    double latency_lo = 0.01;  // seconds
    double latency_hi = 0.01;
    double drop_probability = 0.0;
    double vehicle_bandwidth_mbps = 12.5;
    double rsu_bandwidth_mbps = 50.0;
    int retry_limit = 3;

    void validate() const;

    // Request/response round trip at the worst latency, plus a microsecond so
    // a reply landing exactly at 2x latency is not treated as lost.
    double timeout() const { return 2.0 * latency_hi + 1e-6; }

    // Bottleneck link for a VM transfer between two hosts.
    double bandwidth_between(const HostRef& a, const HostRef& b) const;
};

// Applies loss and latency to messages. Each send makes exactly one drop draw
// and, for a latency range, one latency draw, in send order.
class Network {
public:
    Network(NetworkModel model, Rng& rng);

    const NetworkModel& model() const { return model_; }

    // Delivery delay, or nullopt when the message is dropped.
    std::optional<double> transmit(const Message& msg);

    std::uint64_t sent() const { return sent_; }
    std::uint64_t dropped() const { return dropped_; }

private:
    NetworkModel model_;
    Rng& rng_;
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
};

}  // namespace vvaas
