#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

#include "vvaas/engine.hpp"
#include "vvaas/error.hpp"

namespace vvaas {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

VehicleId synthetic_id(std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "v%04zu", n);
    return VehicleId(buf);
}

RsuId rsu_id(std::size_t n) { return RsuId("rsu" + std::to_string(n)); }

DirectoryConfig directory_config(const ProtocolConfig& p) {
    return DirectoryConfig{p.update_interval, p.miss_limit, p.zone_radius};
}

}  // namespace

Simulation::Simulation(const Scenario& scenario, std::uint64_t seed, RunOptions options)
    : sc_(scenario),
      seed_(seed),
      options_(options),
      mobility_rng_(seed, Stream::Mobility),
      network_rng_(seed, Stream::Network),
      selection_rng_(seed, Stream::Selection),
      net_(scenario.network, network_rng_),
      dir_(directory_config(scenario.protocol)),
      mobility_(scenario.grid) {
    sc_.validate();
    sp_ = std::make_unique<ServiceProvider>(dir_, sc_.protocol, sc_.network, *this, metrics_);
}

Simulation::~Simulation() = default;

void Simulation::schedule(double at, EventPayload payload) { queue_.schedule(at, std::move(payload)); }

void Simulation::send(Message msg) {
    const std::optional<double> delay = net_.transmit(msg);
    if (!delay) {
        if (logging()) {
            log({{"t", now()},
                 {"kind", "drop"},
                 {"msg", to_string(msg.kind)},
                 {"from", endpoint_name(msg.from)},
                 {"to", endpoint_name(msg.to)},
                 {"txn", msg.txn},
                 {"attempt", msg.attempt}});
        }
        return;
    }
    queue_.schedule(now() + *delay, ev::MsgDelivery{std::move(msg)});
}

void Simulation::log(nlohmann::ordered_json record) { log_.append(std::move(record)); }

Simulation::Truth& Simulation::truth(const VehicleId& id) { return truth_[truth_index_.at(id)]; }

void Simulation::record_trajectory(const Truth& t) {
    if (!options_.record_trajectories) return;
    trajectories_.push_back({now(), t.id, t.k.position, t.k.speed_kmh, t.k.heading_deg});
}

void Simulation::initialize() {
    for (std::size_t i = 0; i < sc_.rsus.size(); ++i) {
        const RsuSpec& r = sc_.rsus[i];
        dir_.add_rsu(RsuState{rsu_id(i), r.position, r.coverage_radius, r.bandwidth_mbps, {}});
    }

    const double interval = sc_.protocol.update_interval;
    const std::size_t n = sc_.vehicles.count;
    for (std::size_t i = 0; i < n; ++i) {
        Truth t{synthetic_id(i + 1), mobility_.spawn(mobility_rng_), true, sc_.run.end_time};
        dir_.register_vehicle({t.id, t.k.position, t.k.speed_kmh, t.k.heading_deg, sc_.vehicles.resources}, 0.0);
        truth_index_[t.id] = truth_.size();
        truth_.push_back(t);
        // Staggered so reports do not all land on the same instant.
        schedule(interval * static_cast<double>(i) / static_cast<double>(n), ev::VehicleUpdate{t.id});
    }
    if (n > 0) schedule(sc_.vehicles.tick, ev::MobilityTick{});

    const std::vector<TraceRecord>& trace = sc_.vehicles.trace;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const TraceRecord& r = trace[i];
        auto [it, inserted] = truth_index_.try_emplace(r.vehicle, truth_.size());
        if (inserted) truth_.push_back(Truth{r.vehicle, {}, false, r.t});
        Truth& t = truth_[it->second];
        t.reports_until = std::max(t.reports_until, r.t);
        schedule(r.t, ev::TraceStep{i});
    }

    schedule(interval, ev::LivenessCheck{});

    consumer_vv_.assign(sc_.consumers.size(), std::nullopt);
    consumer_params_.clear();
    for (std::size_t c = 0; c < sc_.consumers.size(); ++c) {
        const ConsumerScript& s = sc_.consumers[c];
        consumer_params_.push_back(s.params);
        schedule(s.t, ev::VvRequest{c, 0});
        ++pending_consumer_events_;
        for (std::size_t u = 0; u < s.updates.size(); ++u) {
            schedule(s.updates[u].t, ev::DrivingUpdate{c, u});
            ++pending_consumer_events_;
        }
    }
    for (const LeaveSpec& l : sc_.vehicles.leaves) schedule(l.t, ev::VehicleLeave{l.vehicle});
    if (sc_.run.inject_invariant_violation_at) {
        // Held like a consumer event so that quiescence cannot skip it.
        ++pending_consumer_events_;
        schedule(*sc_.run.inject_invariant_violation_at, ev::InjectFault{});
    }
}

SimulationReport Simulation::run() {
    initialize();
    const std::uint64_t max_events = sc_.run.max_events.value_or(UINT64_MAX);
    while (!queue_.empty() && processed_ < max_events) {
        if (*queue_.next_time() > sc_.run.end_time) break;
        if (quiescent()) break;
        const Event e = queue_.pop();
        ++processed_;
        log_event(e);
        dispatch(e);
        try {
            sp_->check_invariants();
        } catch (const Error& err) {
            throw Error(ErrorCode::InvariantViolation,
                        "after event #" + std::to_string(e.seq) + " (" + std::string(event_kind(e.payload)) +
                            " at t=" + std::to_string(e.time) + "): " + err.what());
        }
    }
    return finalize(metrics_, tally_vvs(dir_), seed_, sc_.vehicle_count());
}

bool Simulation::quiescent() const {
    // Mobility, reports and liveness checks recur forever; only protocol
    // work counts.
    if (pending_consumer_events_ > 0 || sp_->busy()) return false;
    return std::all_of(dir_.vvs().begin(), dir_.vvs().end(),
                       [](const auto& kv) { return is_terminal(kv.second.lifecycle); });
}

void Simulation::log_event(const Event& e) {
    if (!logging()) return;
    nlohmann::ordered_json r{{"t", e.time}, {"kind", "event"}, {"seq", e.seq}, {"event", event_kind(e.payload)}};
    std::visit(Overloaded{
                   [&](const ev::VehicleUpdate& x) { r["vehicle"] = x.vehicle.str(); },
                   [&](const ev::VvRequest& x) {
                       r["consumer"] = sc_.consumers[x.consumer].id.str();
                       r["attempt"] = x.attempt;
                   },
                   [&](const ev::DrivingUpdate& x) {
                       r["consumer"] = sc_.consumers[x.consumer].id.str();
                       r["update"] = x.index;
                   },
                   [&](const ev::MsgDelivery& x) {
                       r["msg"] = to_string(x.msg.kind);
                       r["from"] = endpoint_name(x.msg.from);
                       r["to"] = endpoint_name(x.msg.to);
                       if (x.msg.txn != 0) r["txn"] = x.msg.txn;
                   },
                   [&](const ev::TransferRoundDone& x) {
                       r["txn"] = x.txn;
                       r["round"] = x.round;
                   },
                   [&](const ev::RetryTimer& x) { r["vv"] = x.vv.str(); },
                   [&](const ev::ActivationDone& x) { r["txn"] = x.txn; },
                   [&](const ev::CreationDone& x) { r["vv"] = x.vv.str(); },
                   [&](const ev::MsgTimeout& x) {
                       r["txn"] = x.txn;
                       r["phase"] = to_string(x.phase);
                       r["attempt"] = x.attempt;
                   },
                   [&](const ev::TraceStep& x) { r["vehicle"] = sc_.vehicles.trace[x.index].vehicle.str(); },
                   [&](const ev::VehicleLeave& x) { r["vehicle"] = x.vehicle.str(); },
                   [](const auto&) {},
               },
               e.payload);
    log_.append(std::move(r));
}

void Simulation::dispatch(const Event& e) {
    std::visit(Overloaded{
                   [&](const ev::MobilityTick&) { on_mobility_tick(); },
                   [&](const ev::VehicleUpdate& x) { on_vehicle_update(x.vehicle); },
                   [&](const ev::LivenessCheck&) {
                       sp_->on_liveness_check();
                       schedule(now() + sc_.protocol.update_interval, ev::LivenessCheck{});
                   },
                   [&](const ev::VvRequest& x) { on_vv_request(x.consumer, x.attempt); },
                   [&](const ev::DrivingUpdate& x) { on_driving_update(x.consumer, x.index); },
                   [&](const ev::MsgDelivery& x) { sp_->on_message(x.msg); },
                   [&](const ev::TransferRoundDone& x) { sp_->on_transfer_round(x.txn, x.round); },
                   [&](const ev::RetryTimer& x) { sp_->on_retry_timer(x.vv); },
                   [&](const ev::ActivationDone& x) { sp_->on_activation(x.txn); },
                   [&](const ev::CreationDone& x) { sp_->on_creation_done(x.vv); },
                   [&](const ev::MsgTimeout& x) { sp_->on_timeout(x.txn, x.phase, x.attempt); },
                   [&](const ev::TraceStep& x) { on_trace_step(x.index); },
                   [&](const ev::VehicleLeave& x) { on_vehicle_leave(x.vehicle); },
                   [&](const ev::InjectFault&) { on_inject_fault(); },
               },
               e.payload);
}

void Simulation::on_mobility_tick() {
    // Left vehicles keep moving so the mobility stream's draw order does not
    // depend on protocol outcomes.
    for (Truth& t : truth_) {
        t.k = mobility_.step(t.k, sc_.vehicles.tick, mobility_rng_);
        record_trajectory(t);
    }
    schedule(now() + sc_.vehicles.tick, ev::MobilityTick{});
}

void Simulation::on_vehicle_update(const VehicleId& id) {
    const Truth& t = truth(id);
    if (dir_.vehicle(id).status == VehicleStatus::Left || now() > t.reports_until) return;
    Message m;
    m.kind = MsgKind::VehicleReport;
    m.from = id;
    m.to = CloudManager{};
    m.report = t.k;
    send(std::move(m));
    schedule(now() + sc_.protocol.update_interval, ev::VehicleUpdate{id});
}

void Simulation::on_trace_step(std::size_t index) {
    const TraceRecord& r = sc_.vehicles.trace[index];
    Truth& t = truth(r.vehicle);
    t.k = Kinematics{r.position, r.speed_kmh, r.heading_deg};
    record_trajectory(t);
    if (!t.registered) {
        t.registered = true;
        dir_.register_vehicle({r.vehicle, r.position, r.speed_kmh, r.heading_deg, sc_.vehicles.resources}, now());
        schedule(now(), ev::VehicleUpdate{r.vehicle});
    }
}

void Simulation::on_vv_request(std::size_t consumer, int attempt) {
    --pending_consumer_events_;
    const ConsumerScript& s = sc_.consumers[consumer];
    try {
        consumer_vv_[consumer] =
            sp_->request_virtual_vehicle(s.id, consumer_params_[consumer], s.image_mb, s.dirty_rate_mbps);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoHostAvailable) throw;
        if (attempt < s.max_retries) {
            schedule(now() + s.retry_interval, ev::VvRequest{consumer, attempt + 1});
            ++pending_consumer_events_;
        } else if (logging()) {
            log({{"t", now()}, {"kind", "request_abandoned"}, {"consumer", s.id.str()}});
        }
    }
}

void Simulation::on_driving_update(std::size_t consumer, std::size_t index) {
    --pending_consumer_events_;
    const DrivingChange& u = sc_.consumers[consumer].updates[index];
    DrivingParams& p = consumer_params_[consumer];
    if (u.speed_class) p.speed_class = *u.speed_class;
    if (u.heading) p.heading = *u.heading;
    if (u.destination) p.destination = *u.destination;
    const std::optional<VvId>& vv = consumer_vv_[consumer];
    // Before creation the change just shapes the pending request.
    if (!vv) return;
    try {
        sp_->update_driving_params(*vv, p);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidLifecycle) throw;
        if (logging()) {
            log({{"t", now()}, {"kind", "update_ignored"}, {"vv", vv->str()}, {"reason", e.what()}});
        }
    }
}

void Simulation::on_vehicle_leave(const VehicleId& id) {
    try {
        sp_->handle_leave(id);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::UnknownVehicle) throw;
        if (logging()) log({{"t", now()}, {"kind", "leave_ignored"}, {"vehicle", id.str()}});
    }
}

void Simulation::on_inject_fault() {
    --pending_consumer_events_;
    if (dir_.vehicles().empty()) return;
    VehicleId first = dir_.vehicles().begin()->first;
    dir_.vehicle(first).hosted_vvs.insert(VvId("vv_injected"));
}

SimulationReport run_scenario(const Scenario& scenario, std::uint64_t seed, EventLog* log) {
    Simulation sim(scenario, seed, RunOptions{log != nullptr, false});
    SimulationReport report = sim.run();
    if (log) *log = sim.event_log();
    return report;
}

std::vector<SimulationReport> sweep(const Scenario& base, const std::vector<std::size_t>& counts,
                                    const std::vector<std::uint64_t>& seeds, unsigned threads) {
    std::vector<Scenario> variants;
    for (std::size_t c : counts) {
        if (c == 0) throw Error(ErrorCode::InvalidArgument, "vehicle counts must be positive");
        Scenario s = base;
        s.vehicles.count = c;
        s.vehicles.trace.clear();
        s.vehicles.trace_path.reset();
        s.validate();
        variants.push_back(std::move(s));
    }
    const std::size_t total = variants.size() * seeds.size();
    std::vector<SimulationReport> reports(total);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i; !failed && (i = next++) < total;) {
            try {
                reports[i] = run_scenario(variants[i / seeds.size()], seeds[i % seeds.size()]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
        return std::tie(a.n_vehicles, a.seed) < std::tie(b.n_vehicles, b.seed);
    });
    return reports;
}

}  // namespace vvaas
