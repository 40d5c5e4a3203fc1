#include <cmath>
#include <numeric>

#include "vvaas/error.hpp"
#include "vvaas/migration.hpp"

namespace vvaas {

double TransferPlan::precopy_time() const {
    return std::accumulate(round_durations.begin(), round_durations.end(), 0.0);
}

TransferPlan plan_transfer(double image_mb, double dirty_rate_mbps, double bandwidth_mbps,
                           int max_rounds, double stop_threshold_mb) {
    if (!(bandwidth_mbps > 0.0) || !std::isfinite(bandwidth_mbps)) {
        throw Error(ErrorCode::InvalidArgument, "bandwidth must be > 0");
    }
    if (!(image_mb >= 0.0) || !(dirty_rate_mbps >= 0.0) || !(stop_threshold_mb >= 0.0) ||
        !std::isfinite(image_mb) || !std::isfinite(dirty_rate_mbps)) {
        throw Error(ErrorCode::InvalidArgument, "image, dirty rate and threshold must be >= 0");
    }
    if (max_rounds < 1) throw Error(ErrorCode::InvalidArgument, "max_rounds must be >= 1");

    TransferPlan plan;
    if (dirty_rate_mbps >= bandwidth_mbps) {
        plan.stop_and_copy_mb = image_mb;
        plan.downtime = image_mb / bandwidth_mbps;
        return plan;
    }

    double to_send = image_mb;
    double dirtied = 0.0;
    do {
        const double duration = to_send / bandwidth_mbps;
        plan.round_durations.push_back(duration);
        dirtied = dirty_rate_mbps * duration;
        to_send = dirtied;
    } while (dirtied > stop_threshold_mb && static_cast<int>(plan.round_durations.size()) < max_rounds);

    plan.stop_and_copy_mb = dirtied;
    plan.downtime = dirtied / bandwidth_mbps;
    return plan;
}

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::Reserve: return "reserve";
        case Phase::PreCopy: return "precopy";
        case Phase::StopAndCopy: return "stop_and_copy";
        case Phase::AwaitAck: return "await_ack";
        case Phase::Committed: return "committed";
        case Phase::Activated: return "activated";
        case Phase::Aborted: return "aborted";
    }
    return "?";
}

std::string_view to_string(AbortReason r) {
    switch (r) {
        case AbortReason::None: return "none";
        case AbortReason::CandidateLost: return "candidate_lost";
        case AbortReason::SourceLost: return "source_lost";
        case AbortReason::ReserveTimeout: return "reserve_timeout";
        case AbortReason::AckTimeout: return "ack_timeout";
        case AbortReason::ReservationRejected: return "reservation_rejected";
    }
    return "?";
}

std::string_view to_string(MigrationCause c) {
    switch (c) {
        case MigrationCause::Decision: return "decision";
        case MigrationCause::Leave: return "leave";
        case MigrationCause::Fallback: return "fallback";
        case MigrationCause::Retry: return "retry";
        case MigrationCause::Emergency: return "emergency";
    }
    return "?";
}

}  // namespace vvaas
