#include "vvaas/event_queue.hpp"

#include <string>

#include "vvaas/error.hpp"

namespace vvaas {

std::optional<double> EventQueue::next_time() const {
    if (heap_.empty()) return std::nullopt;
    return heap_.top().time;
}

std::uint64_t EventQueue::schedule(double at, EventPayload payload) {
    if (!(at >= now_)) {
        throw Error(ErrorCode::SchedulingInPast,
                    "cannot schedule at t=" + std::to_string(at) + " before now=" + std::to_string(now_));
    }
    const std::uint64_t seq = next_seq_++;
    heap_.push(Event{at, seq, std::move(payload)});
    return seq;
}

namespace {
template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;
}  // namespace

std::string_view event_kind(const EventPayload& p) {
    return std::visit(Overloaded{
                          [](const ev::MobilityTick&) { return "mobility_tick"; },
                          [](const ev::VehicleUpdate&) { return "vehicle_update"; },
                          [](const ev::LivenessCheck&) { return "liveness_check"; },
                          [](const ev::VvRequest&) { return "vv_request"; },
                          [](const ev::DrivingUpdate&) { return "driving_update"; },
                          [](const ev::MsgDelivery&) { return "msg_delivery"; },
                          [](const ev::TransferRoundDone&) { return "transfer_round_done"; },
                          [](const ev::RetryTimer&) { return "retry_timer"; },
                          [](const ev::ActivationDone&) { return "activation_done"; },
                          [](const ev::CreationDone&) { return "creation_done"; },
                          [](const ev::MsgTimeout&) { return "msg_timeout"; },
                          [](const ev::TraceStep&) { return "trace_step"; },
                          [](const ev::VehicleLeave&) { return "vehicle_leave"; },
                          [](const ev::InjectFault&) { return "inject_fault"; },
                      },
                      p);
}

Event EventQueue::pop() {
    Event e = heap_.top();
    heap_.pop();
    now_ = e.time;
    return e;
}

}  // namespace vvaas
