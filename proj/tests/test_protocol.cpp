#include "doctest.h"
#include "harness.hpp"
#include "vvaas/error.hpp"

using namespace vvaas;
using vvaas::testing::Harness;

namespace {

const DrivingParams kEastMedium{{100.0, 500.0}, {900.0, 900.0}, SpeedClass::Medium, Heading8::E};

// Host h at the request source, a second eastbound vehicle c 150 m behind the
// source's zone edge, one RSU covering everything.
struct Fixture {
    Harness h;
    VvId vv;

    explicit Fixture(NetworkModel net = {}, ProtocolConfig proto = {}) : h(proto, net) {
        h.add_rsu("rsu0", {500.0, 500.0});
        h.add_vehicle("h", {100.0, 500.0}, 36.0, 90.0);
        h.add_vehicle("c", {250.0, 500.0}, 36.0, 90.0);
        vv = h.sp->request_virtual_vehicle(ConsumerId("alice"), kEastMedium, 25.0, 2.0);
        h.advance_to(1.0);
    }

    // h turns north next to c, which triggers a migration at t = 10.
    void turn_host_north() {
        h.advance_to(10.0);
        h.report("c", {250.0, 500.0}, 36.0, 90.0);
        h.report("h", {200.0, 500.0}, 36.0, 0.0);
    }

    const MigrationTransaction& only_txn() {
        REQUIRE(h.sp->transactions().size() >= 1);
        return h.sp->transactions().begin()->second;
    }
};

}  // namespace

TEST_CASE("a request is hosted by a matching vehicle near the source") {
    Fixture f;
    const VirtualVehicle& vv = f.h.dir().vv(f.vv);
    CHECK(vv.host == HostRef(VehicleId("h")));
    CHECK(vv.lifecycle == Lifecycle::Active);
    CHECK(vv.consumer == ConsumerId("alice"));
}

TEST_CASE("a VV is Creating until the creation delay has passed") {
    Harness h;
    h.add_rsu("rsu0", {500.0, 500.0});
    h.add_vehicle("h", {100.0, 500.0}, 36.0, 90.0);
    const VvId id = h.sp->request_virtual_vehicle(ConsumerId("a"), kEastMedium, 25.0, 2.0);
    CHECK(h.dir().vv(id).lifecycle == Lifecycle::Creating);
    h.advance_to(0.99);
    CHECK(h.dir().vv(id).lifecycle == Lifecycle::Creating);
    h.advance_to(1.0);
    CHECK(h.dir().vv(id).lifecycle == Lifecycle::Active);
}

TEST_CASE("requests without an eligible host are rejected") {
    Harness h;
    h.add_rsu("rsu0", {500.0, 500.0});
    h.add_vehicle("slow", {100.0, 500.0}, 10.0, 90.0);
    h.add_vehicle("west", {110.0, 500.0}, 36.0, 270.0);
    h.add_vehicle("far", {300.0, 500.0}, 36.0, 90.0);
    try {
        h.sp->request_virtual_vehicle(ConsumerId("a"), kEastMedium, 25.0, 2.0);
        FAIL("expected NoHostAvailable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoHostAvailable);
    }
    CHECK(h.dir().vvs().empty());
}

TEST_CASE("malformed requests are rejected") {
    Harness h;
    h.add_vehicle("h", {100.0, 500.0}, 36.0, 90.0);
    DrivingParams same = kEastMedium;
    same.destination = same.source;
    CHECK_THROWS_AS(h.sp->request_virtual_vehicle(ConsumerId("a"), same, 25.0, 2.0), Error);
    CHECK_THROWS_AS(h.sp->request_virtual_vehicle(ConsumerId("a"), kEastMedium, 0.0, 2.0), Error);
}

TEST_CASE("heading change migrates the VV to a matching neighbour") {
    Fixture f;
    f.turn_host_north();
    const MigrationTransaction& t = f.only_txn();
    CHECK(t.candidate == HostRef(VehicleId("c")));
    CHECK(t.cause == MigrationCause::Decision);
    CHECK(f.h.dir().vv(f.vv).lifecycle == Lifecycle::Migrating);
    CHECK(f.h.dir().vehicle(VehicleId("c")).reserved_vvs.contains(f.vv));

    f.h.advance_to(20.0);
    CHECK(t.phase == Phase::Activated);
    CHECK(f.h.phases(t.id) == std::vector<std::string>{"reserve", "precopy", "stop_and_copy", "await_ack",
                                                       "committed", "activated"});
    const VirtualVehicle& vv = f.h.dir().vv(f.vv);
    CHECK(vv.host == HostRef(VehicleId("c")));
    CHECK(vv.lifecycle == Lifecycle::Active);
    CHECK(f.h.dir().vehicle(VehicleId("h")).hosted_vvs.empty());
    CHECK(f.h.dir().vehicle(VehicleId("c")).reserved_vvs.empty());
    CHECK(f.h.metrics.to_vehicle() == 1);

    // 25 MB image: one 2 s round leaves 4 MB, copied frozen in 0.32 s; then
    // one 10 ms acknowledgment hop and the 0.5 s activation.
    CHECK(t.downtime == doctest::Approx(0.32 + 0.01 + 0.5));
}

TEST_CASE("with nobody matching nearby the VV goes to the RSU") {
    Fixture f;
    f.h.advance_to(10.0);
    f.h.report("c", {250.0, 500.0}, 36.0, 270.0);  // c turned west: no match
    f.h.report("h", {200.0, 500.0}, 36.0, 0.0);
    f.h.advance_to(20.0);
    const MigrationTransaction& t = f.only_txn();
    CHECK(t.candidate == HostRef(RsuId("rsu0")));
    CHECK(t.phase == Phase::Activated);
    CHECK(f.h.metrics.to_rsu() == 1);
    CHECK(f.h.dir().rsu(RsuId("rsu0")).hosted_vvs.contains(f.vv));
}

TEST_CASE("lost reservation requests are retried, then the VV falls back to the RSU") {
    NetworkModel net;
    Fixture f(net);
    f.h.drop = [](const Message& m) {
        return m.kind == MsgKind::ReserveRequest && std::holds_alternative<VehicleId>(m.to);
    };
    f.turn_host_north();
    // Stop before the RSU retry timer (one update interval after activation).
    f.h.advance_to(20.0);

    const auto& txns = f.h.sp->transactions();
    REQUIRE(txns.size() == 2);
    const MigrationTransaction& first = txns.at(1);
    CHECK(first.phase == Phase::Aborted);
    CHECK(first.reason == AbortReason::ReserveTimeout);
    CHECK(first.attempts == net.retry_limit + 1);
    const MigrationTransaction& fallback = txns.at(2);
    CHECK(fallback.cause == MigrationCause::Fallback);
    CHECK(fallback.candidate == HostRef(RsuId("rsu0")));
    CHECK(fallback.phase == Phase::Activated);
    CHECK(f.h.metrics.failed() == 1);
    CHECK(f.h.metrics.to_rsu() == 1);
    CHECK(f.h.dir().vehicle(VehicleId("c")).reserved_vvs.empty());
}

TEST_CASE("reserve timeout fires after the last of four sends") {
    Fixture f;
    f.h.drop = [](const Message& m) { return m.kind == MsgKind::ReserveRequest; };
    f.turn_host_north();
    const TxnId id = f.only_txn().id;
    const double timeout = NetworkModel{}.timeout();
    f.h.advance_to(10.0 + 4 * timeout - 1e-9);
    CHECK(f.h.sp->transactions().at(id).phase == Phase::Reserve);
    f.h.advance_to(10.0 + 4 * timeout + 1e-9);
    CHECK(f.h.sp->transactions().at(id).phase == Phase::Aborted);
    CHECK(f.h.sent[MsgKind::ReserveRequest] >= 4);
}

TEST_CASE("missing source acknowledgment aborts with AckTimeout") {
    Fixture f;
    f.h.drop = [](const Message& m) {
        return m.kind == MsgKind::MigrationReceived && std::holds_alternative<VehicleId>(m.from);
    };
    f.turn_host_north();
    f.h.advance_to(40.0);
    const MigrationTransaction& first = f.h.sp->transactions().at(1);
    CHECK(first.phase == Phase::Aborted);
    CHECK(first.reason == AbortReason::AckTimeout);
    // The VV never left h during the failed attempt.
    const MigrationTransaction& fallback = f.h.sp->transactions().at(2);
    CHECK(fallback.source == HostRef(VehicleId("h")));
    CHECK(fallback.phase == Phase::Activated);
    CHECK(f.h.dir().vv(f.vv).host == HostRef(RsuId("rsu0")));
}

TEST_CASE("a transfer to an RSU keeps retrying the acknowledgment") {
    Fixture f;
    int dropped = 0;
    f.h.drop = [&](const Message& m) {
        if (m.kind == MsgKind::MigrationReceived && dropped < 10) {
            ++dropped;
            return true;
        }
        return false;
    };
    f.h.advance_to(10.0);
    f.h.report("c", {250.0, 500.0}, 36.0, 270.0);
    f.h.report("h", {200.0, 500.0}, 36.0, 0.0);
    f.h.advance_to(40.0);
    const MigrationTransaction& t = f.only_txn();
    CHECK(is_rsu(t.candidate));
    CHECK(t.phase == Phase::Activated);
    CHECK(t.attempts == 11);
}

TEST_CASE("a full candidate rejects the reservation") {
    Harness h;
    h.add_rsu("rsu0", {500.0, 500.0});
    h.add_vehicle("h", {100.0, 500.0}, 36.0, 90.0);
    h.add_vehicle("c", {250.0, 500.0}, 36.0, 90.0, 1);
    h.dir().vehicle(VehicleId("c")).hosted_vvs.insert(VvId("occupant"));
    VirtualVehicle occupant;
    occupant.id = VvId("occupant");
    occupant.lifecycle = Lifecycle::Active;
    occupant.params = kEastMedium;
    h.dir().add_vv(occupant);
    h.dir().vv(VvId("occupant")).host = VehicleId("c");

    const VvId id = h.sp->request_virtual_vehicle(ConsumerId("a"), kEastMedium, 25.0, 2.0);
    h.advance_to(10.0);
    h.report("h", {200.0, 500.0}, 36.0, 0.0);
    h.advance_to(40.0);
    CHECK(h.sp->transactions().at(1).reason == AbortReason::ReservationRejected);
    CHECK(h.dir().vv(id).host == HostRef(RsuId("rsu0")));
}

TEST_CASE("a host that goes silent after receiving a VV hands it to the RSU") {
    Fixture f;
    f.turn_host_north();
    f.h.advance_to(11.0);  // pre-copy in flight
    f.h.report("h", {200.0, 510.0}, 36.0, 0.0);
    f.h.advance_to(31.0);
    f.h.report("h", {200.0, 700.0}, 36.0, 0.0);
    f.h.sp->on_liveness_check();  // c last heard at 10: 21 s > 20 s
    f.h.sp->check_invariants();
    f.h.advance_to(40.0);
    CHECK(f.h.sp->transactions().at(1).phase == Phase::Activated);
    CHECK(f.h.dir().vehicle(VehicleId("c")).status == VehicleStatus::Deactivated);
    const MigrationTransaction& rescue = f.h.sp->transactions().rbegin()->second;
    CHECK(rescue.cause == MigrationCause::Emergency);
    CHECK(rescue.emergency);
    CHECK(rescue.phase == Phase::Activated);
    CHECK(f.h.dir().vv(f.vv).host == HostRef(RsuId("rsu0")));
}

TEST_CASE("candidate lost during pre-copy: abort, release, fall back") {
    Fixture f;
    f.h.dir().vv(f.vv).image_mb = 500.0;  // 40 s first round
    f.turn_host_north();
    f.h.advance_to(20.0);
    f.h.report("h", {200.0, 600.0}, 36.0, 0.0);
    f.h.advance_to(30.5);
    f.h.report("h", {200.0, 700.0}, 36.0, 0.0);
    f.h.sp->on_liveness_check();
    f.h.sp->check_invariants();
    const MigrationTransaction& first = f.h.sp->transactions().at(1);
    CHECK(first.phase == Phase::Aborted);
    CHECK(first.reason == AbortReason::CandidateLost);
    CHECK(f.h.dir().vehicle(VehicleId("c")).reserved_vvs.empty());
    CHECK(f.h.sp->transactions().at(2).cause == MigrationCause::Fallback);
    CHECK(f.h.dir().vv(f.vv).lifecycle == Lifecycle::Migrating);
}

TEST_CASE("source lost during pre-copy triggers an emergency restore on the RSU") {
    Fixture f;
    f.h.dir().vv(f.vv).image_mb = 500.0;
    f.turn_host_north();
    f.h.advance_to(20.0);
    f.h.report("c", {300.0, 500.0}, 36.0, 90.0);
    f.h.advance_to(30.5);
    f.h.report("c", {400.0, 500.0}, 36.0, 90.0);
    const auto lost = f.h.sp->on_liveness_check();
    REQUIRE(lost == std::vector<VehicleId>{VehicleId("h")});
    f.h.sp->check_invariants();
    CHECK(f.h.sp->transactions().at(1).reason == AbortReason::SourceLost);
    const MigrationTransaction& rescue = f.h.sp->transactions().at(2);
    CHECK(rescue.emergency);
    f.h.advance_to(60.0);
    CHECK(rescue.phase == Phase::Activated);
    CHECK(rescue.plan.round_durations.empty());
    CHECK(rescue.plan.stop_and_copy_mb == 500.0);
    CHECK(rescue.downtime == doctest::Approx(500.0 / 50.0 + 0.5));
    CHECK(f.h.dir().vv(f.vv).host == HostRef(RsuId("rsu0")));
}

TEST_CASE("a VV still being created on a lost host fails") {
    Harness h;
    h.add_rsu("rsu0", {500.0, 500.0});
    h.add_vehicle("h", {100.0, 500.0}, 36.0, 90.0);
    const VvId id = h.sp->request_virtual_vehicle(ConsumerId("a"), kEastMedium, 25.0, 2.0);
    h.advance_to(0.5);
    h.dir().vehicle(VehicleId("h")).last_update = -100.0;
    h.sp->on_liveness_check();
    h.sp->check_invariants();
    CHECK(h.dir().vv(id).lifecycle == Lifecycle::Failed);
    h.advance_to(2.0);
    CHECK(h.dir().vv(id).lifecycle == Lifecycle::Failed);
}

TEST_CASE("leave drains the host, then marks it Left") {
    Fixture f;
    f.h.advance_to(10.0);
    f.h.report("c", {190.0, 510.0}, 36.0, 90.0);
    const LeaveResponse r = f.h.sp->handle_leave(VehicleId("h"));
    REQUIRE(r.destinations.size() == 1);
    CHECK(r.destinations[0].second == HostRef(VehicleId("c")));
    CHECK(f.h.dir().vehicle(VehicleId("h")).leaving);
    CHECK(f.h.dir().vehicle(VehicleId("h")).status == VehicleStatus::Active);
    f.h.advance_to(20.0);
    CHECK(f.h.dir().vehicle(VehicleId("h")).status == VehicleStatus::Left);
    CHECK(f.h.dir().vv(f.vv).host == HostRef(VehicleId("c")));
    CHECK(f.h.sp->transactions().at(1).cause == MigrationCause::Leave);
}

TEST_CASE("leaving vehicles are not chosen as hosts") {
    Fixture f;
    f.h.advance_to(10.0);
    f.h.report("c", {200.0, 510.0}, 36.0, 90.0);
    f.h.dir().vehicle(VehicleId("c")).leaving = true;
    f.h.report("h", {200.0, 500.0}, 36.0, 0.0);
    CHECK(is_rsu(f.only_txn().candidate));
}

TEST_CASE("leave without VVs is immediate; unknown vehicles are rejected") {
    Fixture f;
    const LeaveResponse r = f.h.sp->handle_leave(VehicleId("c"));
    CHECK(r.destinations.empty());
    CHECK(f.h.dir().vehicle(VehicleId("c")).status == VehicleStatus::Left);
    CHECK_THROWS_AS(f.h.sp->handle_leave(VehicleId("c")), Error);
    CHECK_THROWS_AS(f.h.sp->handle_leave(VehicleId("nobody")), Error);
}

TEST_CASE("driving parameter updates") {
    Fixture f;
    SUBCASE("unknown VV") {
        try {
            f.h.sp->update_driving_params(VvId("nope"), kEastMedium);
            FAIL("expected UnknownVirtualVehicle");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnknownVirtualVehicle);
        }
    }
    SUBCASE("a new heading triggers migration") {
        DrivingParams north = kEastMedium;
        north.heading = Heading8::N;
        f.h.sp->update_driving_params(f.vv, north);
        CHECK(f.h.sp->active_transaction(f.vv).has_value());
    }
    SUBCASE("terminal VVs reject updates") {
        f.h.report("h", {896.0, 897.0}, 36.0, 90.0);
        REQUIRE(f.h.dir().vv(f.vv).lifecycle == Lifecycle::Completed);
        try {
            f.h.sp->update_driving_params(f.vv, kEastMedium);
            FAIL("expected InvalidLifecycle");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidLifecycle);
        }
    }
}

TEST_CASE("reaching the destination completes the VV") {
    Fixture f;
    f.h.report("h", {880.0, 900.0}, 36.0, 90.0);
    CHECK(f.h.dir().vv(f.vv).lifecycle == Lifecycle::Active);
    f.h.report("h", {893.0, 900.0}, 36.0, 90.0);
    CHECK(f.h.dir().vv(f.vv).lifecycle == Lifecycle::Completed);
    CHECK(f.h.dir().vehicle(VehicleId("h")).hosted_vvs.empty());
}

TEST_CASE("an RSU-hosted VV moves back onto a vehicle that passes its anchor") {
    Fixture f;
    f.h.advance_to(10.0);
    f.h.report("c", {250.0, 500.0}, 36.0, 270.0);
    f.h.report("h", {200.0, 500.0}, 36.0, 0.0);
    f.h.advance_to(15.0);
    REQUIRE(f.h.dir().vv(f.vv).host == HostRef(RsuId("rsu0")));
    f.h.report("c", {230.0, 500.0}, 36.0, 90.0);
    f.h.advance_to(40.0);
    CHECK(f.h.dir().vv(f.vv).host == HostRef(VehicleId("c")));
    CHECK(f.h.sp->transactions().rbegin()->second.cause == MigrationCause::Retry);
    CHECK(f.h.metrics.to_rsu() == 1);
    CHECK(f.h.metrics.to_vehicle() == 1);
}

TEST_CASE("invariant check catches host bookkeeping corruption") {
    Fixture f;
    f.h.sp->check_invariants();
    SUBCASE("VV listed on a second host") {
        f.h.dir().vehicle(VehicleId("c")).hosted_vvs.insert(f.vv);
        CHECK_THROWS_AS(f.h.sp->check_invariants(), Error);
    }
    SUBCASE("unknown VV in a hosted set") {
        f.h.dir().vehicle(VehicleId("c")).hosted_vvs.insert(VvId("ghost"));
        CHECK_THROWS_AS(f.h.sp->check_invariants(), Error);
    }
    SUBCASE("reservation without a transaction") {
        f.h.dir().vehicle(VehicleId("c")).reserved_vvs.insert(f.vv);
        CHECK_THROWS_AS(f.h.sp->check_invariants(), Error);
    }
}
