#include <cstdio>
#include <string>

#include "vvaas/error.hpp"
#include "vvaas/service_provider.hpp"

namespace vvaas {

namespace {
VvId make_vv_id(std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "vv%04zu", n);
    return VvId(buf);
}
}  // namespace

std::vector<VehicleId> eligible_hosts(const Directory& dir, const DrivingParams& params, double zone_radius) {
    std::vector<VehicleId> out;
    for (const VehicleState* v : dir.query_zone(params.source, zone_radius)) {
        if (classify_speed(v->speed_kmh) == params.speed_class &&
            quantize_heading(v->heading_deg) == params.heading) {
            out.push_back(v->id);
        }
    }
    return out;
}

ServiceProvider::ServiceProvider(Directory& directory, ProtocolConfig protocol, NetworkModel network,
                                 Runtime& runtime, MetricsRecorder& metrics)
    : dir_(directory), protocol_(protocol), network_(network), rt_(runtime), metrics_(metrics) {
    protocol_.validate();
    network_.validate();
}

VvId ServiceProvider::request_virtual_vehicle(const ConsumerId& consumer, const DrivingParams& params,
                                              double image_mb, double dirty_rate_mbps) {
    if (params.source == params.destination) {
        throw Error(ErrorCode::InvalidArgument, "source and destination must differ");
    }
    if (!(image_mb > 0.0) || !(dirty_rate_mbps >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "image size must be > 0 and dirty rate >= 0");
    }
    const std::vector<VehicleId> hosts = eligible_hosts(dir_, params, protocol_.zone_radius);
    if (hosts.empty()) {
        if (rt_.logging()) {
            rt_.log({{"t", rt_.now()}, {"kind", "request_rejected"}, {"consumer", consumer.str()}});
        }
        throw Error(ErrorCode::NoHostAvailable, "no vehicle matches the request of " + consumer.str());
    }
    const VehicleId& host = hosts[rt_.selection_rng().index(hosts.size())];

    VirtualVehicle vv;
    vv.id = make_vv_id(next_vv_++);
    vv.consumer = consumer;
    vv.params = params;
    vv.image_mb = image_mb;
    vv.dirty_rate_mbps = dirty_rate_mbps;
    vv.lifecycle = Lifecycle::Creating;
    vv.anchor = dir_.vehicle(host).position;
    const VvId id = dir_.add_vv(std::move(vv)).id;
    dir_.attach(id, host);
    log_vv(dir_.vv(id), "creating");
    rt_.schedule(rt_.now() + protocol_.creation_delay, ev::CreationDone{id});
    return id;
}

void ServiceProvider::on_creation_done(const VvId& id) {
    VirtualVehicle& vv = dir_.vv(id);
    if (vv.lifecycle != Lifecycle::Creating) return;
    vv.lifecycle = Lifecycle::Active;
    log_vv(vv, "active");
    if (check_completion(id)) return;
    const VehicleState& host = dir_.vehicle(std::get<VehicleId>(vv.host));
    if (host.leaving) decide_migration(id, MigrationCause::Leave);
}

void ServiceProvider::update_driving_params(const VvId& id, const DrivingParams& params) {
    if (!dir_.has_vv(id)) throw Error(ErrorCode::UnknownVirtualVehicle, "unknown virtual vehicle: " + id.str());
    VirtualVehicle& vv = dir_.vv(id);
    if (vv.lifecycle != Lifecycle::Active && vv.lifecycle != Lifecycle::Migrating) {
        throw Error(ErrorCode::InvalidLifecycle,
                    "virtual vehicle " + id.str() + " is " + std::string(to_string(vv.lifecycle)));
    }
    vv.params = params;
    log_vv(vv, "params_updated");
    // While Migrating the trigger is coalesced; the next report re-evaluates.
    if (vv.lifecycle != Lifecycle::Active || !is_vehicle(vv.host)) return;
    if (check_completion(id)) return;
    const VehicleState& host = dir_.vehicle(std::get<VehicleId>(vv.host));
    if (host.selectable() && needs_migration(vv, host)) decide_migration(id, MigrationCause::Decision);
}

bool ServiceProvider::check_completion(const VvId& id) {
    VirtualVehicle& vv = dir_.vv(id);
    if (vv.lifecycle != Lifecycle::Active) return false;
    const double d = distance(dir_.host_position(vv.host), vv.params.destination);
    if (classify_location(d) != LocationMatch::Same) return false;
    const HostRef host = vv.host;
    dir_.detach(id, host);
    vv.lifecycle = Lifecycle::Completed;
    log_vv(vv, "completed");
    maybe_finish_leave(host);
    return true;
}

void ServiceProvider::on_vehicle_report(const VehicleId& id, const Kinematics& k) {
    if (!dir_.has_vehicle(id) || dir_.vehicle(id).status == VehicleStatus::Left) return;
    const bool reactivated = dir_.update_vehicle(id, k.position, k.speed_kmh, k.heading_deg, rt_.now());
    if (reactivated && rt_.logging()) {
        rt_.log({{"t", rt_.now()}, {"kind", "reactivated"}, {"vehicle", id.str()}});
    }
    const VehicleState& host = dir_.vehicle(id);
    const std::vector<VvId> hosted(host.hosted_vvs.begin(), host.hosted_vvs.end());
    for (const VvId& vid : hosted) {
        VirtualVehicle& vv = dir_.vv(vid);
        if (vv.lifecycle != Lifecycle::Active) continue;
        vv.anchor = host.position;
        if (check_completion(vid)) continue;
        if (host.leaving) continue;
        if (needs_migration(vv, host)) decide_migration(vid, MigrationCause::Decision);
    }
}

std::vector<VehicleId> ServiceProvider::on_liveness_check() {
    const std::vector<VehicleId> stale = dir_.deactivate_stale(rt_.now());
    for (const VehicleId& id : stale) {
        if (rt_.logging()) rt_.log({{"t", rt_.now()}, {"kind", "deactivated"}, {"vehicle", id.str()}});
        host_lost(id);
    }
    return stale;
}

void ServiceProvider::host_lost(const VehicleId& id) {
    const HostRef lost = id;
    std::vector<TxnId> affected;
    for (const auto& [vv, tid] : active_) {
        const MigrationTransaction& t = txns_.at(tid);
        if (t.phase >= Phase::Committed) continue;
        if (t.candidate == lost || (t.source == lost && !t.emergency)) affected.push_back(tid);
    }
    for (TxnId tid : affected) {
        MigrationTransaction& t = txn(tid);
        abort(t, t.candidate == lost ? AbortReason::CandidateLost : AbortReason::SourceLost);
    }

    const VehicleState& v = dir_.vehicle(id);
    const std::vector<VvId> hosted(v.hosted_vvs.begin(), v.hosted_vvs.end());
    for (const VvId& vid : hosted) {
        const Lifecycle l = dir_.vv(vid).lifecycle;
        if (l == Lifecycle::Active) {
            emergency_to_rsu(vid, id);
        } else if (l == Lifecycle::Creating) {
            fail_vv(vid, "host_lost_during_creation");
        }
    }
}

LeaveResponse ServiceProvider::handle_leave(const VehicleId& id) {
    if (!dir_.has_vehicle(id) || !dir_.vehicle(id).selectable()) {
        throw Error(ErrorCode::UnknownVehicle, "leave from unknown or inactive vehicle: " + id.str());
    }
    dir_.vehicle(id).leaving = true;
    if (rt_.logging()) rt_.log({{"t", rt_.now()}, {"kind", "leave_request"}, {"vehicle", id.str()}});

    const HostRef self = id;
    std::vector<TxnId> incoming;
    for (const auto& [vv, tid] : active_) {
        const MigrationTransaction& t = txns_.at(tid);
        if (t.phase < Phase::Committed && t.candidate == self) incoming.push_back(tid);
    }
    for (TxnId tid : incoming) abort(txn(tid), AbortReason::CandidateLost);

    LeaveResponse resp{id, {}};
    const VehicleState& v = dir_.vehicle(id);
    const std::vector<VvId> hosted(v.hosted_vvs.begin(), v.hosted_vvs.end());
    for (const VvId& vid : hosted) {
        if (dir_.vv(vid).lifecycle != Lifecycle::Active) continue;
        decide_migration(vid, MigrationCause::Leave);
        if (auto tid = active_transaction(vid)) resp.destinations.emplace_back(vid, txns_.at(*tid).candidate);
    }
    maybe_finish_leave(self);
    return resp;
}

void ServiceProvider::maybe_finish_leave(const HostRef& host) {
    const auto* id = std::get_if<VehicleId>(&host);
    if (!id) return;
    const VehicleState& v = dir_.vehicle(*id);
    if (!v.leaving || !v.hosted_vvs.empty() || !v.reserved_vvs.empty()) return;
    dir_.mark_left(*id);
    if (rt_.logging()) rt_.log({{"t", rt_.now()}, {"kind", "left"}, {"vehicle", id->str()}});
}

void ServiceProvider::fail_vv(const VvId& id, std::string_view reason) {
    VirtualVehicle& vv = dir_.vv(id);
    const HostRef host = vv.host;
    dir_.detach(id, host);
    vv.lifecycle = Lifecycle::Failed;
    if (rt_.logging()) {
        rt_.log({{"t", rt_.now()}, {"kind", "vv"}, {"vv", id.str()}, {"consumer", vv.consumer.str()},
                 {"host", host_name(host)}, {"state", "failed"}, {"reason", reason}});
    }
    maybe_finish_leave(host);
}

std::optional<TxnId> ServiceProvider::active_transaction(const VvId& vv) const {
    auto it = active_.find(vv);
    if (it == active_.end()) return std::nullopt;
    return it->second;
}

void ServiceProvider::log_vv(const VirtualVehicle& vv, std::string_view what) {
    if (!rt_.logging()) return;
    rt_.log({{"t", rt_.now()},
             {"kind", "vv"},
             {"vv", vv.id.str()},
             {"consumer", vv.consumer.str()},
             {"host", host_name(vv.host)},
             {"state", what}});
}

void ServiceProvider::check_invariants() const {
    auto violation = [](const std::string& what) { throw Error(ErrorCode::InvariantViolation, what); };
    std::map<VvId, int> primaries;
    std::map<VvId, int> reservations;

    for (const auto& [vid, v] : dir_.vehicles()) {
        if (v.status == VehicleStatus::Left && (!v.hosted_vvs.empty() || !v.reserved_vvs.empty())) {
            violation("vehicle " + vid.str() + " left while still holding virtual vehicles");
        }
        if (v.status != VehicleStatus::Active && !v.reserved_vvs.empty()) {
            violation("inactive vehicle " + vid.str() + " holds a reservation");
        }
        for (const VvId& x : v.hosted_vvs) {
            if (!dir_.has_vv(x)) violation("vehicle " + vid.str() + " hosts unknown virtual vehicle " + x.str());
            const VirtualVehicle& vv = dir_.vv(x);
            if (!is_hosted(vv.lifecycle)) violation(x.str() + " is " + std::string(to_string(vv.lifecycle)) +
                                                    " but still hosted by " + vid.str());
            if (vv.host != HostRef(vid)) violation(x.str() + " hosted by " + vid.str() + " but refers to " +
                                                   host_name(vv.host));
            if (v.status != VehicleStatus::Active && vv.lifecycle != Lifecycle::Migrating) {
                violation(x.str() + " stranded on inactive vehicle " + vid.str());
            }
            ++primaries[x];
        }
        for (const VvId& x : v.reserved_vvs) {
            auto it = active_.find(x);
            if (it == active_.end()) violation("reservation for " + x.str() + " without a transaction");
            const MigrationTransaction& t = txns_.at(it->second);
            if (t.candidate != HostRef(vid) || t.phase >= Phase::Committed) {
                violation("stale reservation for " + x.str() + " on " + vid.str());
            }
            ++reservations[x];
        }
    }
    for (const auto& [rid, r] : dir_.rsus()) {
        for (const VvId& x : r.hosted_vvs) {
            if (!dir_.has_vv(x)) violation("RSU " + rid.str() + " hosts unknown virtual vehicle " + x.str());
            const VirtualVehicle& vv = dir_.vv(x);
            if (!is_hosted(vv.lifecycle) || vv.host != HostRef(rid)) {
                violation(x.str() + " inconsistently hosted by RSU " + rid.str());
            }
            ++primaries[x];
        }
    }
    for (const auto& [id, vv] : dir_.vvs()) {
        const int p = primaries.contains(id) ? primaries.at(id) : 0;
        if (is_hosted(vv.lifecycle)) {
            if (p != 1) violation(id.str() + " has " + std::to_string(p) + " primary hosts");
        } else if (p != 0) {
            violation(id.str() + " is " + std::string(to_string(vv.lifecycle)) + " but still hosted");
        }
        if (reservations.contains(id) && reservations.at(id) > 1) violation(id.str() + " reserved twice");
        const bool in_txn = active_.contains(id);
        if ((vv.lifecycle == Lifecycle::Migrating) != in_txn) {
            violation(id.str() + " lifecycle " + std::string(to_string(vv.lifecycle)) +
                      (in_txn ? " with" : " without") + " an open transaction");
        }
    }
}

}  // namespace vvaas
