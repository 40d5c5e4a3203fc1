#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "vvaas/directory.hpp"
#include "vvaas/event_queue.hpp"
#include "vvaas/metrics.hpp"
#include "vvaas/mobility.hpp"
#include "vvaas/network.hpp"
#include "vvaas/rng.hpp"
#include "vvaas/scenario.hpp"
#include "vvaas/service_provider.hpp"

namespace vvaas {

struct RunOptions {
    bool log_events = false;
    // Keep the ground-truth position of every vehicle after each mobility
    // tick and trace step.
    bool record_trajectories = false;
};

// One deterministic run of a scenario. Single-threaded; construct, call
// run() once, then inspect.
class Simulation final : public Runtime {
public:
    Simulation(const Scenario& scenario, std::uint64_t seed, RunOptions options = {});
    ~Simulation() override;

    // Throws InvariantViolation naming the event after which the check failed.
    SimulationReport run();

    const Directory& directory() const { return dir_; }
    const ServiceProvider& provider() const { return *sp_; }
    const EventLog& event_log() const { return log_; }
    const std::vector<TraceRecord>& trajectories() const { return trajectories_; }
    std::uint64_t events_processed() const { return processed_; }
    const Network& network() const { return net_; }

    // Runtime
    double now() const override { return queue_.now(); }
    void schedule(double at, EventPayload payload) override;
    void send(Message msg) override;
    Rng& selection_rng() override { return selection_rng_; }
    bool logging() const override { return options_.log_events; }
    void log(nlohmann::ordered_json record) override;

private:
    struct Truth {
        VehicleId id;
        Kinematics k;
        bool registered = false;
        // Trace vehicles stop reporting after their last row.
        double reports_until = 0.0;
    };

    void initialize();
    void dispatch(const Event& e);
    void on_mobility_tick();
    void on_vehicle_update(const VehicleId& id);
    void on_vv_request(std::size_t consumer, int attempt);
    void on_driving_update(std::size_t consumer, std::size_t index);
    void on_trace_step(std::size_t index);
    void on_vehicle_leave(const VehicleId& id);
    void on_inject_fault();
    void log_event(const Event& e);
    bool quiescent() const;
    void record_trajectory(const Truth& t);
    Truth& truth(const VehicleId& id);

    Scenario sc_;
    std::uint64_t seed_;
    RunOptions options_;
    Rng mobility_rng_;
    Rng network_rng_;
    Rng selection_rng_;
    EventQueue queue_;
    Network net_;
    Directory dir_;
    MetricsRecorder metrics_;
    EventLog log_;
    std::unique_ptr<ServiceProvider> sp_;
    GridMobility mobility_;

    std::vector<Truth> truth_;
    std::map<VehicleId, std::size_t> truth_index_;
    std::vector<std::optional<VvId>> consumer_vv_;
    std::vector<DrivingParams> consumer_params_;
    std::size_t pending_consumer_events_ = 0;
    std::vector<TraceRecord> trajectories_;
    std::uint64_t processed_ = 0;
};

// run() with a fresh Simulation. When log is given, events are recorded into it.
SimulationReport run_scenario(const Scenario& scenario, std::uint64_t seed, EventLog* log = nullptr);

// Every (count, seed) pair with the scenario's synthetic vehicle count
// replaced by count. Runs execute on up to `threads` workers (0 = hardware
// concurrency); results are sorted by (n_vehicles, seed). The first failure
// is rethrown after all workers stop.
std::vector<SimulationReport> sweep(const Scenario& base, const std::vector<std::size_t>& counts,
                                    const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

}  // namespace vvaas
