#include <string>

#include "vvaas/error.hpp"
#include "vvaas/service_provider.hpp"

namespace vvaas {

MigrationTransaction& ServiceProvider::txn(TxnId id) {
    auto it = txns_.find(id);
    if (it == txns_.end()) throw Error(ErrorCode::InvalidArgument, "unknown transaction " + std::to_string(id));
    return it->second;
}

bool ServiceProvider::unlimited_retries(const MigrationTransaction& t) const { return is_rsu(t.candidate); }

SelectionQuery ServiceProvider::query_for(const VirtualVehicle& vv, const RsuId& rsu, const GeoPosition& at,
                                          Velocity anchor_velocity, std::optional<VehicleId> exclude) const {
    SelectionQuery q;
    q.current_rsu = rsu;
    q.location = at;
    q.speed_class = vv.params.speed_class;
    q.heading = vv.params.heading;
    q.zone_radius = protocol_.zone_radius;
    q.policy = protocol_.policy;
    q.exclude = std::move(exclude);
    q.anchor_velocity = anchor_velocity;
    q.horizon_cap = protocol_.horizon_cap;
    return q;
}

std::optional<Candidate> ServiceProvider::choose(const SelectionQuery& q) {
    const std::vector<Candidate> matches = zone_matches(dir_, q);
    for (const Candidate& c : matches) metrics_.sample_remaining_time(c.remaining_time);
    return select_from(matches, q.policy, rt_.selection_rng());
}

void ServiceProvider::decide_migration(const VvId& id, MigrationCause cause) {
    const VirtualVehicle& vv = dir_.vv(id);
    if (vv.lifecycle != Lifecycle::Active || active_.contains(id)) return;
    const auto* host_id = std::get_if<VehicleId>(&vv.host);
    if (!host_id) return;
    const VehicleState& host = dir_.vehicle(*host_id);

    const std::optional<RsuId> rsu = host.current_rsu ? host.current_rsu : dir_.try_current_rsu(host.position);
    if (!rsu) {
        if (rt_.logging()) {
            rt_.log({{"t", rt_.now()}, {"kind", "decision"}, {"vv", id.str()}, {"cause", to_string(cause)},
                     {"outcome", "no_coverage"}});
        }
        // A leaving host cannot keep the VV; an ordinary mismatch waits for
        // the next report.
        if (cause == MigrationCause::Leave) fail_vv(id, "no_coverage");
        return;
    }

    const std::optional<Candidate> pick =
        choose(query_for(vv, *rsu, host.position, host.velocity(), host.id));
    const HostRef target = pick ? HostRef(pick->id) : HostRef(*rsu);
    if (rt_.logging()) {
        rt_.log({{"t", rt_.now()}, {"kind", "decision"}, {"vv", id.str()}, {"cause", to_string(cause)},
                 {"outcome", pick ? "vehicle" : "rsu"}, {"target", host_name(target)}});
    }
    start_migration(id, target, cause);
}

TxnId ServiceProvider::start_migration(const VvId& id, const HostRef& candidate, MigrationCause cause,
                                       bool emergency) {
    VirtualVehicle& vv = dir_.vv(id);
    if (vv.lifecycle != Lifecycle::Active) {
        throw Error(ErrorCode::InvalidLifecycle,
                    "cannot migrate " + id.str() + " while " + std::string(to_string(vv.lifecycle)));
    }
    if (active_.contains(id)) throw Error(ErrorCode::InvalidLifecycle, id.str() + " is already migrating");
    if (candidate == vv.host) throw Error(ErrorCode::InvalidArgument, "candidate is the current host");

    MigrationTransaction t;
    t.id = next_txn_++;
    t.vv = id;
    t.source = vv.host;
    t.candidate = candidate;
    t.cause = cause;
    t.started_at = rt_.now();
    t.emergency = emergency;
    if (const auto* v = std::get_if<VehicleId>(&candidate)) dir_.vehicle(*v).reserved_vvs.insert(id);
    vv.lifecycle = Lifecycle::Migrating;
    active_[id] = t.id;
    MigrationTransaction& stored = txns_.emplace(t.id, std::move(t)).first->second;
    log_phase(stored);
    send_reserve(stored);
    return stored.id;
}

void ServiceProvider::send_reserve(MigrationTransaction& t) {
    ++t.attempts;
    Message m;
    m.kind = MsgKind::ReserveRequest;
    m.from = CloudManager{};
    m.to = endpoint_of(t.candidate);
    m.txn = t.id;
    m.attempt = t.attempts;
    rt_.send(m);
    rt_.schedule(rt_.now() + network_.timeout(), ev::MsgTimeout{t.id, Phase::Reserve, t.attempts});
}

void ServiceProvider::send_received(MigrationTransaction& t) {
    ++t.attempts;
    Message m;
    m.kind = MsgKind::MigrationReceived;
    m.from = endpoint_of(t.candidate);
    m.to = endpoint_of(t.source);
    m.txn = t.id;
    m.attempt = t.attempts;
    rt_.send(m);
    rt_.schedule(rt_.now() + network_.timeout(), ev::MsgTimeout{t.id, Phase::AwaitAck, t.attempts});
}

void ServiceProvider::on_message(const Message& msg) {
    switch (msg.kind) {
        case MsgKind::ReserveRequest: handle_reserve_request(msg); return;
        case MsgKind::ReserveReply: handle_reserve_reply(msg); return;
        case MsgKind::MigrationReceived: handle_migration_received(msg); return;
        case MsgKind::VehicleReport:
            if (const auto* v = std::get_if<VehicleId>(&msg.from)) on_vehicle_report(*v, msg.report);
            return;
    }
}

void ServiceProvider::handle_reserve_request(const Message& msg) {
    auto it = txns_.find(msg.txn);
    if (it == txns_.end()) return;
    const MigrationTransaction& t = it->second;
    bool accepted = is_rsu(t.candidate);
    if (const auto* v = std::get_if<VehicleId>(&t.candidate)) {
        const VehicleState& c = dir_.vehicle(*v);
        accepted = c.selectable() && c.reserved_vvs.contains(t.vv) &&
                   c.workload() <= static_cast<std::size_t>(std::max(c.resources.cpu_units, 0));
    }
    Message reply;
    reply.kind = MsgKind::ReserveReply;
    reply.from = msg.to;
    reply.to = CloudManager{};
    reply.txn = msg.txn;
    reply.attempt = msg.attempt;
    reply.accepted = accepted;
    rt_.send(reply);
}

void ServiceProvider::handle_reserve_reply(const Message& msg) {
    auto it = txns_.find(msg.txn);
    if (it == txns_.end() || it->second.phase != Phase::Reserve) return;
    MigrationTransaction& t = it->second;
    if (!msg.accepted) {
        abort(t, AbortReason::ReservationRejected);
        return;
    }
    begin_transfer(t);
}

void ServiceProvider::begin_transfer(MigrationTransaction& t) {
    const VirtualVehicle& vv = dir_.vv(t.vv);
    if (t.emergency) {
        // Nothing can be copied live from a dead host; the RSU restores the
        // whole image from the manager's copy.
        const double bw = network_.rsu_bandwidth_mbps;
        t.plan = TransferPlan{{}, vv.image_mb, vv.image_mb / bw};
    } else {
        t.plan = plan_transfer(vv.image_mb, vv.dirty_rate_mbps, network_.bandwidth_between(t.source, t.candidate),
                               protocol_.max_precopy_rounds, protocol_.stop_threshold_mb);
    }
    if (t.plan.round_durations.empty()) {
        enter_stop_and_copy(t);
        return;
    }
    t.phase = Phase::PreCopy;
    t.round = 1;
    t.remaining_mb = vv.image_mb;
    log_phase(t);
    rt_.schedule(rt_.now() + t.plan.round_durations[0], ev::TransferRoundDone{t.id, 1});
}

void ServiceProvider::enter_stop_and_copy(MigrationTransaction& t) {
    t.phase = Phase::StopAndCopy;
    t.round = static_cast<int>(t.plan.round_durations.size()) + 1;
    t.remaining_mb = t.plan.stop_and_copy_mb;
    t.frozen_at = rt_.now();
    log_phase(t);
    rt_.schedule(rt_.now() + t.plan.downtime, ev::TransferRoundDone{t.id, t.round});
}

void ServiceProvider::enter_await_ack(MigrationTransaction& t) {
    t.phase = Phase::AwaitAck;
    t.attempts = 0;
    t.remaining_mb = 0.0;
    log_phase(t);
    send_received(t);
}

void ServiceProvider::on_transfer_round(TxnId id, int round) {
    MigrationTransaction& t = txn(id);
    if (round != t.round) return;
    if (t.phase == Phase::PreCopy) {
        const int n = static_cast<int>(t.plan.round_durations.size());
        if (round < n) {
            t.remaining_mb = dir_.vv(t.vv).dirty_rate_mbps * t.plan.round_durations[round - 1];
            ++t.round;
            log_phase(t);
            rt_.schedule(rt_.now() + t.plan.round_durations[round], ev::TransferRoundDone{t.id, t.round});
        } else {
            enter_stop_and_copy(t);
        }
    } else if (t.phase == Phase::StopAndCopy) {
        if (t.emergency) {
            commit(t);
        } else {
            enter_await_ack(t);
        }
    }
}

void ServiceProvider::handle_migration_received(const Message& msg) {
    auto it = txns_.find(msg.txn);
    if (it == txns_.end() || it->second.phase != Phase::AwaitAck) return;
    commit(it->second);
}

void ServiceProvider::commit(MigrationTransaction& t) {
    VirtualVehicle& vv = dir_.vv(t.vv);
    t.phase = Phase::Committed;
    dir_.detach(t.vv, t.source);
    if (const auto* v = std::get_if<VehicleId>(&t.candidate)) {
        VehicleState& c = dir_.vehicle(*v);
        c.reserved_vvs.erase(t.vv);
        dir_.attach(t.vv, t.candidate);
        vv.anchor = c.position;
    } else {
        dir_.attach(t.vv, t.candidate);
    }
    log_phase(t);
    rt_.schedule(rt_.now() + protocol_.activation_delay, ev::ActivationDone{t.id});
    maybe_finish_leave(t.source);
}

void ServiceProvider::on_timeout(TxnId id, Phase phase, int attempt) {
    MigrationTransaction& t = txn(id);
    if (t.phase != phase || t.attempts != attempt) return;
    if (unlimited_retries(t) || t.attempts <= network_.retry_limit) {
        if (rt_.logging()) {
            rt_.log({{"t", rt_.now()}, {"kind", "retransmit"}, {"txn", t.id}, {"phase", to_string(phase)},
                     {"attempt", t.attempts + 1}});
        }
        if (phase == Phase::Reserve) {
            send_reserve(t);
        } else {
            send_received(t);
        }
        return;
    }
    abort(t, phase == Phase::Reserve ? AbortReason::ReserveTimeout : AbortReason::AckTimeout);
}

void ServiceProvider::on_activation(TxnId id) {
    MigrationTransaction& t = txn(id);
    if (t.phase != Phase::Committed) return;
    t.phase = Phase::Activated;
    t.downtime = t.frozen_at ? rt_.now() - *t.frozen_at : 0.0;
    VirtualVehicle& vv = dir_.vv(t.vv);
    vv.lifecycle = Lifecycle::Active;
    if (is_vehicle(t.candidate)) {
        ++vv.stats.migrations_to_vehicle;
    } else {
        ++vv.stats.migrations_to_rsu;
    }
    vv.stats.total_downtime += t.downtime;
    metrics_.record_outcome(t);
    active_.erase(t.vv);
    log_phase(t);

    const VvId vid = t.vv;
    if (const auto* rsu = std::get_if<RsuId>(&t.candidate)) {
        (void)rsu;
        if (!check_completion(vid)) schedule_retry(vid);
        return;
    }
    const VehicleId& host = std::get<VehicleId>(t.candidate);
    const VehicleState& h = dir_.vehicle(host);
    if (h.status != VehicleStatus::Active) {
        emergency_to_rsu(vid, host);
    } else if (check_completion(vid)) {
        return;
    } else if (h.leaving) {
        decide_migration(vid, MigrationCause::Leave);
    } else if (needs_migration(vv, h)) {
        decide_migration(vid, MigrationCause::Decision);
    }
}

void ServiceProvider::abort(MigrationTransaction& t, AbortReason reason) {
    if (t.phase >= Phase::Committed) return;
    if (t.frozen_at) t.downtime = rt_.now() - *t.frozen_at;
    if (const auto* v = std::get_if<VehicleId>(&t.candidate)) dir_.vehicle(*v).reserved_vvs.erase(t.vv);
    t.phase = Phase::Aborted;
    t.reason = reason;
    VirtualVehicle& vv = dir_.vv(t.vv);
    ++vv.stats.failed_migrations;
    vv.lifecycle = Lifecycle::Active;
    metrics_.record_outcome(t);
    active_.erase(t.vv);
    log_phase(t);
    maybe_finish_leave(t.candidate);

    const VvId vid = t.vv;
    if (const auto* src = std::get_if<VehicleId>(&t.source)) {
        if (dir_.vehicle(*src).status != VehicleStatus::Active) {
            emergency_to_rsu(vid, *src);
        } else {
            fallback_to_rsu(vid);
        }
        return;
    }
    if (rt_.logging()) {
        rt_.log({{"t", rt_.now()}, {"kind", "fallback"}, {"vv", vid.str()}, {"after_txn", t.id},
                 {"outcome", "already_on_rsu"}, {"target", host_name(t.source)}});
    }
    schedule_retry(vid);
}

void ServiceProvider::fallback_to_rsu(const VvId& id) {
    const VirtualVehicle& vv = dir_.vv(id);
    const auto* host = std::get_if<VehicleId>(&vv.host);
    if (!host) throw Error(ErrorCode::InvalidLifecycle, id.str() + " is not on a vehicle");
    const std::optional<RsuId> rsu = dir_.try_current_rsu(dir_.vehicle(*host).position);
    if (rt_.logging()) {
        rt_.log({{"t", rt_.now()}, {"kind", "fallback"}, {"vv", id.str()},
                 {"outcome", rsu ? "rsu" : "no_coverage"}, {"target", rsu ? rsu->str() : ""}});
    }
    if (!rsu) {
        fail_vv(id, "no_coverage");
        return;
    }
    start_migration(id, *rsu, MigrationCause::Fallback);
}

void ServiceProvider::emergency_to_rsu(const VvId& id, const VehicleId& dead_host) {
    const std::optional<RsuId> rsu = dir_.try_current_rsu(dir_.vehicle(dead_host).position);
    if (rt_.logging()) {
        rt_.log({{"t", rt_.now()}, {"kind", "fallback"}, {"vv", id.str()},
                 {"outcome", rsu ? "emergency" : "no_coverage"}, {"target", rsu ? rsu->str() : ""}});
    }
    if (!rsu) {
        fail_vv(id, "no_coverage");
        return;
    }
    start_migration(id, *rsu, MigrationCause::Emergency, true);
}

void ServiceProvider::schedule_retry(const VvId& id) {
    rt_.schedule(rt_.now() + protocol_.update_interval, ev::RetryTimer{id});
}

void ServiceProvider::on_retry_timer(const VvId& id) {
    const VirtualVehicle& vv = dir_.vv(id);
    if (vv.lifecycle != Lifecycle::Active || active_.contains(id)) return;
    const auto* rsu = std::get_if<RsuId>(&vv.host);
    if (!rsu) return;
    if (check_completion(id)) return;
    const std::optional<Candidate> pick = choose(query_for(vv, *rsu, vv.anchor, {}, std::nullopt));
    if (!pick) {
        schedule_retry(id);
        return;
    }
    if (rt_.logging()) {
        rt_.log({{"t", rt_.now()}, {"kind", "decision"}, {"vv", id.str()}, {"cause", "retry"},
                 {"outcome", "vehicle"}, {"target", pick->id.str()}});
    }
    start_migration(id, pick->id, MigrationCause::Retry);
}

void ServiceProvider::log_phase(const MigrationTransaction& t) {
    if (!rt_.logging()) return;
    nlohmann::ordered_json r{{"t", rt_.now()},
                             {"kind", "txn"},
                             {"txn", t.id},
                             {"vv", t.vv.str()},
                             {"source", host_name(t.source)},
                             {"candidate", host_name(t.candidate)},
                             {"cause", to_string(t.cause)},
                             {"phase", to_string(t.phase)},
                             {"round", t.round}};
    if (t.phase == Phase::Aborted) r["reason"] = to_string(t.reason);
    if (t.phase == Phase::Activated || (t.phase == Phase::Aborted && t.frozen_at)) r["downtime"] = t.downtime;
    rt_.log(std::move(r));
}

}  // namespace vvaas
