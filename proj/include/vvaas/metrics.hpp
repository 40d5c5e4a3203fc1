#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "vvaas/directory.hpp"
#include "vvaas/migration.hpp"

namespace vvaas {

struct SimulationReport {
    std::uint64_t seed = 0;
    std::size_t n_vehicles = 0;
    std::size_t migrations_total = 0;
    std::size_t to_vehicle = 0;
    std::size_t to_rsu = 0;
    std::size_t failed = 0;
    double pct_to_vehicle = 0.0;
    double pct_to_rsu = 0.0;
    double mean_downtime = 0.0;
    std::size_t vv_completed = 0;
    std::size_t vv_failed = 0;
    std::size_t vv_censored = 0;
    double mean_remaining_time_sampled = 0.0;
    // No successful migration happened, so the percentages are undefined.
    bool no_data = true;
};

// Outcome counters, one record per terminal transaction.
class MetricsRecorder {
public:
    // Activated onto a vehicle, Activated onto an RSU, or Aborted. Throws
    // InvalidArgument for a transaction that is still in flight.
    void record_outcome(const MigrationTransaction& txn);
    void sample_remaining_time(double seconds);

    std::size_t to_vehicle() const { return to_vehicle_; }
    std::size_t to_rsu() const { return to_rsu_; }
    std::size_t failed() const { return failed_; }
    double total_downtime() const { return downtime_sum_; }
    std::size_t remaining_samples() const { return remaining_count_; }
    double remaining_sum() const { return remaining_sum_; }

private:
    std::size_t to_vehicle_ = 0;
    std::size_t to_rsu_ = 0;
    std::size_t failed_ = 0;
    double downtime_sum_ = 0.0;
    std::size_t remaining_count_ = 0;
    double remaining_sum_ = 0.0;
};

// VV outcome tallies taken from the directory at the end of a run.
struct VvTally {
    std::size_t completed = 0;
    std::size_t failed = 0;
    std::size_t censored = 0;
};

VvTally tally_vvs(const Directory& dir);

SimulationReport finalize(const MetricsRecorder& m, const VvTally& vvs, std::uint64_t seed,
                          std::size_t n_vehicles);

inline constexpr std::string_view kReportHeader =
    "seed,n_vehicles,migrations_total,to_vehicle,to_rsu,failed,pct_to_vehicle,mean_downtime_s,"
    "vv_completed,vv_failed,vv_censored";

// Rows sorted by (n_vehicles, seed); floats with three decimals.
void emit_csv(std::ostream& out, std::vector<SimulationReport> reports);

// Per-density summary of a sweep. Means are over runs with data.
struct DensitySummary {
    std::size_t n_vehicles = 0;
    std::size_t runs = 0;
    std::size_t runs_with_data = 0;
    double mean_pct_to_vehicle = 0.0;
    double mean_pct_to_rsu = 0.0;
};

std::vector<DensitySummary> summarize_by_density(const std::vector<SimulationReport>& reports);

inline constexpr std::string_view kSummaryHeader =
    "n_vehicles,runs,runs_with_data,mean_pct_to_vehicle,mean_pct_to_rsu";

void emit_summary_csv(std::ostream& out, const std::vector<DensitySummary>& rows);

// Writes to a temporary sibling, then renames over path. Throws IoError
// naming the path.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// JSON-lines audit log of processed events and protocol transitions.
class EventLog {
public:
    using Record = nlohmann::ordered_json;

    void append(Record record);

    const std::vector<Record>& records() const { return records_; }
    std::string to_jsonl() const;
    std::size_t size() const { return records_.size(); }

private:
    std::vector<Record> records_;
};

}  // namespace vvaas
