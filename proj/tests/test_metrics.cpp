#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "vvaas/error.hpp"
#include "vvaas/metrics.hpp"

using namespace vvaas;

namespace {

MigrationTransaction finished(Phase phase, HostRef candidate, double downtime = 0.0) {
    MigrationTransaction t;
    t.phase = phase;
    t.candidate = std::move(candidate);
    t.downtime = downtime;
    return t;
}

SimulationReport from_counts(int to_vehicle, int to_rsu, int failed) {
    MetricsRecorder m;
    for (int i = 0; i < to_vehicle; ++i) m.record_outcome(finished(Phase::Activated, VehicleId("v"), 1.0));
    for (int i = 0; i < to_rsu; ++i) m.record_outcome(finished(Phase::Activated, RsuId("r"), 3.0));
    for (int i = 0; i < failed; ++i) m.record_outcome(finished(Phase::Aborted, VehicleId("v")));
    return finalize(m, {}, 0, 0);
}

}  // namespace

TEST_CASE("each terminal transaction lands in exactly one bucket") {
    MetricsRecorder m;
    m.record_outcome(finished(Phase::Activated, VehicleId("v")));
    m.record_outcome(finished(Phase::Activated, RsuId("r")));
    m.record_outcome(finished(Phase::Aborted, VehicleId("v")));
    CHECK(m.to_vehicle() == 1);
    CHECK(m.to_rsu() == 1);
    CHECK(m.failed() == 1);
    CHECK_THROWS_AS(m.record_outcome(finished(Phase::PreCopy, VehicleId("v"))), Error);
    CHECK_THROWS_AS(m.record_outcome(finished(Phase::Committed, VehicleId("v"))), Error);
}

TEST_CASE("percentages exclude failed migrations from the denominator") {
    const SimulationReport r = from_counts(7, 3, 5);
    CHECK(r.migrations_total == 15);
    CHECK(r.pct_to_vehicle == doctest::Approx(70.0));
    CHECK(r.pct_to_rsu == doctest::Approx(30.0));
    CHECK(r.mean_downtime == doctest::Approx((7 * 1.0 + 3 * 3.0) / 10.0));
    CHECK_FALSE(r.no_data);
}

TEST_CASE("no successful migration is flagged as no data") {
    const SimulationReport r = from_counts(0, 0, 2);
    CHECK(r.no_data);
    CHECK(r.pct_to_vehicle == 0.0);
    CHECK(r.pct_to_rsu == 0.0);
}

TEST_CASE("csv: three decimals, sorted rows, LF endings") {
    SimulationReport a = from_counts(1, 2, 0);
    a.seed = 4;
    a.n_vehicles = 8;
    SimulationReport b = from_counts(1, 0, 0);
    b.seed = 9;
    b.n_vehicles = 4;
    SimulationReport c = b;
    c.seed = 2;
    std::ostringstream out;
    emit_csv(out, {a, b, c});
    const std::string text = out.str();
    CHECK(text ==
          "seed,n_vehicles,migrations_total,to_vehicle,to_rsu,failed,pct_to_vehicle,mean_downtime_s,"
          "vv_completed,vv_failed,vv_censored\n"
          "2,4,1,1,0,0,100.000,1.000,0,0,0\n"
          "9,4,1,1,0,0,100.000,1.000,0,0,0\n"
          "4,8,3,1,2,0,33.333,2.333,0,0,0\n");
}

TEST_CASE("density summary averages over runs with data") {
    SimulationReport a = from_counts(1, 1, 0);
    a.n_vehicles = 4;
    SimulationReport b = from_counts(0, 0, 0);
    b.n_vehicles = 4;
    SimulationReport c = from_counts(3, 1, 0);
    c.n_vehicles = 8;
    const auto rows = summarize_by_density({a, b, c});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].runs == 2);
    CHECK(rows[0].runs_with_data == 1);
    CHECK(rows[0].mean_pct_to_vehicle == doctest::Approx(50.0));
    CHECK(rows[1].mean_pct_to_vehicle == doctest::Approx(75.0));
}

TEST_CASE("atomic write replaces the file and reports bad paths") {
    const auto dir = std::filesystem::temp_directory_path() / "vvaas_metrics_test";
    std::filesystem::create_directories(dir);
    const auto file = dir / "out.csv";
    write_file_atomic(file, "one\n");
    write_file_atomic(file, "two\n");
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    CHECK(line == "two");
    CHECK_FALSE(std::filesystem::exists(dir / "out.csv.tmp"));
    try {
        write_file_atomic("/nonexistent-dir/x/report.csv", "x");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
        CHECK(std::string(e.what()).find("/nonexistent-dir/x/report.csv") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("report counts match a replay of the event log") {
    Scenario sc = testing::base_scenario();
    sc.vehicles.count = 30;
    sc.network.drop_probability = 0.15;
    sc.run.end_time = 1800.0;
    sc.consumers.push_back(testing::consumer("c1", 5.0, {500.0, 500.0}, SpeedClass::Medium, Heading8::E));
    sc.consumers.push_back(testing::consumer("c2", 5.0, {200.0, 800.0}, SpeedClass::Fast, Heading8::S));
    sc.consumers.push_back(testing::consumer("c3", 5.0, {700.0, 300.0}, SpeedClass::Slow, Heading8::W));
    for (auto& c : sc.consumers) c.max_retries = 100;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        EventLog log;
        const SimulationReport r = run_scenario(sc, seed, &log);
        std::size_t to_vehicle = 0, to_rsu = 0, failed = 0;
        for (const auto& rec : log.records()) {
            if (rec["kind"] != "txn") continue;
            const std::string cand = rec["candidate"];
            if (rec["phase"] == "activated") (cand.rfind("rsu", 0) == 0 ? to_rsu : to_vehicle)++;
            if (rec["phase"] == "aborted") ++failed;
        }
        CHECK(r.to_vehicle == to_vehicle);
        CHECK(r.to_rsu == to_rsu);
        CHECK(r.failed == failed);
        CHECK(r.migrations_total == to_vehicle + to_rsu + failed);
        if (!r.no_data) {
            CHECK(r.pct_to_vehicle + r.pct_to_rsu == doctest::Approx(100.0).epsilon(1e-12));
            CHECK(r.pct_to_vehicle == doctest::Approx(100.0 * to_vehicle / (to_vehicle + to_rsu)).epsilon(1e-12));
        }
    }
}
