#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "vvaas/events.hpp"

namespace vvaas {

// Min-queue on (time, seq). seq is assigned at scheduling, so equal-time
// events come out in the order they were scheduled.
class EventQueue {
public:
    double now() const { return now_; }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    std::optional<double> next_time() const;

    // Throws SchedulingInPast when at < now().
    std::uint64_t schedule(double at, EventPayload payload);

    // Advances now() to the popped event's time.
    Event pop();

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_seq_ = 0;
    double now_ = 0.0;
};

}  // namespace vvaas
