#include "vvaas/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>
#include <tuple>

#include "vvaas/error.hpp"

namespace vvaas {

void MetricsRecorder::record_outcome(const MigrationTransaction& txn) {
    switch (txn.phase) {
        case Phase::Activated:
            if (is_vehicle(txn.candidate)) {
                ++to_vehicle_;
            } else {
                ++to_rsu_;
            }
            downtime_sum_ += txn.downtime;
            return;
        case Phase::Aborted:
            ++failed_;
            return;
        default:
            throw Error(ErrorCode::InvalidArgument,
                        "transaction " + std::to_string(txn.id) + " is not terminal (" +
                            std::string(to_string(txn.phase)) + ")");
    }
}

void MetricsRecorder::sample_remaining_time(double seconds) {
    ++remaining_count_;
    remaining_sum_ += seconds;
}

VvTally tally_vvs(const Directory& dir) {
    VvTally t;
    for (const auto& [id, vv] : dir.vvs()) {
        if (vv.lifecycle == Lifecycle::Completed) {
            ++t.completed;
        } else if (vv.lifecycle == Lifecycle::Failed) {
            ++t.failed;
        } else {
            ++t.censored;
        }
    }
    return t;
}

SimulationReport finalize(const MetricsRecorder& m, const VvTally& vvs, std::uint64_t seed,
                          std::size_t n_vehicles) {
    SimulationReport r;
    r.seed = seed;
    r.n_vehicles = n_vehicles;
    r.to_vehicle = m.to_vehicle();
    r.to_rsu = m.to_rsu();
    r.failed = m.failed();
    r.migrations_total = r.to_vehicle + r.to_rsu + r.failed;
    const std::size_t successes = r.to_vehicle + r.to_rsu;
    r.no_data = successes == 0;
    if (!r.no_data) {
        r.pct_to_vehicle = 100.0 * static_cast<double>(r.to_vehicle) / static_cast<double>(successes);
        r.pct_to_rsu = 100.0 * static_cast<double>(r.to_rsu) / static_cast<double>(successes);
        r.mean_downtime = m.total_downtime() / static_cast<double>(successes);
    }
    if (m.remaining_samples() > 0) {
        r.mean_remaining_time_sampled = m.remaining_sum() / static_cast<double>(m.remaining_samples());
    }
    r.vv_completed = vvs.completed;
    r.vv_failed = vvs.failed;
    r.vv_censored = vvs.censored;
    return r;
}

namespace {
std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}
}  // namespace

void emit_csv(std::ostream& out, std::vector<SimulationReport> reports) {
    std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
        return std::tie(a.n_vehicles, a.seed) < std::tie(b.n_vehicles, b.seed);
    });
    std::string buf(kReportHeader);
    buf += '\n';
    for (const auto& r : reports) {
        buf += std::to_string(r.seed) + ',' + std::to_string(r.n_vehicles) + ',' +
               std::to_string(r.migrations_total) + ',' + std::to_string(r.to_vehicle) + ',' +
               std::to_string(r.to_rsu) + ',' + std::to_string(r.failed) + ',' + fixed3(r.pct_to_vehicle) +
               ',' + fixed3(r.mean_downtime) + ',' + std::to_string(r.vv_completed) + ',' +
               std::to_string(r.vv_failed) + ',' + std::to_string(r.vv_censored) + '\n';
    }
    out << buf;
}

std::vector<DensitySummary> summarize_by_density(const std::vector<SimulationReport>& reports) {
    std::map<std::size_t, DensitySummary> by;
    for (const auto& r : reports) {
        DensitySummary& s = by[r.n_vehicles];
        s.n_vehicles = r.n_vehicles;
        ++s.runs;
        if (r.no_data) continue;
        ++s.runs_with_data;
        s.mean_pct_to_vehicle += r.pct_to_vehicle;
        s.mean_pct_to_rsu += r.pct_to_rsu;
    }
    std::vector<DensitySummary> out;
    for (auto& [n, s] : by) {
        if (s.runs_with_data > 0) {
            s.mean_pct_to_vehicle /= static_cast<double>(s.runs_with_data);
            s.mean_pct_to_rsu /= static_cast<double>(s.runs_with_data);
        }
        out.push_back(s);
    }
    return out;
}

void emit_summary_csv(std::ostream& out, const std::vector<DensitySummary>& rows) {
    std::string buf(kSummaryHeader);
    buf += '\n';
    for (const auto& s : rows) {
        buf += std::to_string(s.n_vehicles) + ',' + std::to_string(s.runs) + ',' +
               std::to_string(s.runs_with_data) + ',' + fixed3(s.mean_pct_to_vehicle) + ',' +
               fixed3(s.mean_pct_to_rsu) + '\n';
    }
    out << buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
        out << contents;
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw Error(ErrorCode::IoError, "write failed for " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "cannot move into place " + path.string());
    }
}

void EventLog::append(Record record) { records_.push_back(std::move(record)); }

std::string EventLog::to_jsonl() const {
    std::string out;
    for (const auto& r : records_) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

}  // namespace vvaas
