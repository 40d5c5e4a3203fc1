// vvsim: run scenarios, sweep vehicle densities, validate trace files.
//
// Exit codes: 0 success, 1 usage/config/parse/I-O error, 2 invariant violation.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vvaas/engine.hpp"
#include "vvaas/error.hpp"
#include "vvaas/metrics.hpp"
#include "vvaas/mobility.hpp"
#include "vvaas/scenario.hpp"

namespace fs = std::filesystem;
using namespace vvaas;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInvariant = 2;

int fail(const std::string& msg, int code = kUsage) {
    std::cerr << "vvsim: error: " << msg << "\n";
    return code;
}

int exit_code_for(const Error& e) { return e.code() == ErrorCode::InvariantViolation ? kInvariant : kUsage; }

std::vector<std::size_t> parse_vehicle_counts(const std::string& spec) {
    const std::string prefix = "vehicles=";
    if (spec.rfind(prefix, 0) != 0) {
        throw Error(ErrorCode::InvalidArgument, "--param must look like vehicles=4,8,16,32, got '" + spec + "'");
    }
    std::vector<std::size_t> out;
    std::stringstream list(spec.substr(prefix.size()));
    for (std::string item; std::getline(list, item, ',');) {
        std::size_t v = 0;
        const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || p != item.data() + item.size() || v == 0) {
            throw Error(ErrorCode::InvalidArgument, "vehicle count '" + item + "' is not a positive integer");
        }
        out.push_back(v);
    }
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "--param lists no vehicle counts");
    return out;
}

int cmd_run(const fs::path& scenario_path, std::optional<std::uint64_t> seed_flag, const fs::path& out) {
    try {
        const Scenario sc = load_scenario(scenario_path);
        const std::optional<std::uint64_t> seed = seed_flag ? seed_flag : sc.run.seed;
        if (!seed) return fail(scenario_path.string() + ": [run].seed is not set and no --seed was given");

        Simulation sim(sc, *seed, RunOptions{true, false});
        const SimulationReport report = sim.run();

        std::ostringstream csv;
        emit_csv(csv, {report});
        fs::create_directories(out);
        write_file_atomic(out / "report.csv", csv.str());
        write_file_atomic(out / "events.jsonl", sim.event_log().to_jsonl());
        std::cout << "migrations " << report.migrations_total << " (vehicle " << report.to_vehicle << ", rsu "
                  << report.to_rsu << ", failed " << report.failed << "), events " << sim.events_processed()
                  << "\n";
        return kOk;
    } catch (const Error& e) {
        return fail(e.what(), exit_code_for(e));
    } catch (const fs::filesystem_error& e) {
        return fail(e.what());
    }
}

int cmd_sweep(const fs::path& scenario_path, const std::string& param, std::uint64_t n_seeds,
              std::uint64_t base_seed, unsigned threads, const fs::path& out) {
    if (n_seeds == 0) return fail("--seeds must be >= 1");
    try {
        const std::vector<std::size_t> counts = parse_vehicle_counts(param);
        const Scenario sc = load_scenario(scenario_path);
        std::vector<std::uint64_t> seeds;
        for (std::uint64_t i = 0; i < n_seeds; ++i) seeds.push_back(base_seed + i);

        const std::vector<SimulationReport> reports = sweep(sc, counts, seeds, threads);
        const std::vector<DensitySummary> summary = summarize_by_density(reports);

        std::ostringstream csv;
        emit_csv(csv, reports);
        std::ostringstream sum;
        emit_summary_csv(sum, summary);
        fs::create_directories(out);
        write_file_atomic(out / "sweep.csv", csv.str());
        write_file_atomic(out / "sweep_summary.csv", sum.str());
        std::cout << sum.str();
        return kOk;
    } catch (const Error& e) {
        return fail(e.what(), exit_code_for(e));
    } catch (const fs::filesystem_error& e) {
        return fail(e.what());
    }
}

int cmd_validate_trace(const fs::path& path) {
    try {
        const TraceSummary s = summarize(load_trace(path));
        std::cout << s.rows << (s.rows == 1 ? " row, " : " rows, ") << s.vehicles
                  << (s.vehicles == 1 ? " vehicle" : " vehicles");
        if (s.rows > 0) std::cout << ", t " << s.t_first << ".." << s.t_last << " s";
        std::cout << "\n";
        return kOk;
    } catch (const Error& e) {
        return fail(path.string() + ": " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual-vehicle migration simulator"};
    app.require_subcommand(1);

    fs::path scenario;
    fs::path out;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("--scenario", scenario, "Scenario TOML file")->required();
    run->add_option("--seed", seed, "Run seed; overrides [run].seed");
    run->add_option("--out", out, "Output directory")->required();

    std::string param;
    std::uint64_t n_seeds = 0;
    std::uint64_t base_seed = 0;
    unsigned threads = 0;
    auto* sw = app.add_subcommand("sweep", "Sweep vehicle counts over seeds base..base+N-1");
    sw->add_option("--scenario", scenario, "Base scenario TOML file")->required();
    sw->add_option("--param", param, "vehicles=4,8,16,32")->required();
    sw->add_option("--seeds", n_seeds, "Seeds per vehicle count")->required();
    sw->add_option("--base-seed", base_seed, "First seed (default 0)");
    sw->add_option("--threads", threads, "Worker threads (default: available parallelism)");
    sw->add_option("--out", out, "Output directory")->required();

    fs::path trace;
    auto* vt = app.add_subcommand("validate-trace", "Check a trace CSV and print a summary");
    vt->add_option("path", trace, "Trace file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (*run) return cmd_run(scenario, seed, out);
    if (*sw) return cmd_sweep(scenario, param, n_seeds, base_seed, threads, out);
    return cmd_validate_trace(trace);
}
