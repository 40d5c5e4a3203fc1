#include "vvaas/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "toml.hpp"
#include "vvaas/error.hpp"

namespace vvaas {

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::ConfigError, field + ": " + why);
}

// A TOML table plus its dotted path; remembers which keys were read so that
// typos surface as errors instead of silently falling back to defaults.
class Section {
public:
    Section(const toml::table* table, std::string path) : table_(table), path_(std::move(path)) {}

    bool present() const { return table_ != nullptr; }
    const std::string& path() const { return path_; }
    std::string field(std::string_view key) const { return "[" + path_ + "]." + std::string(key); }

    const toml::node* node(std::string_view key) {
        seen_.insert(std::string(key));
        return table_ ? table_->get(key) : nullptr;
    }

    std::optional<double> number(std::string_view key) {
        const toml::node* n = node(key);
        if (!n) return std::nullopt;
        if (auto d = n->value_exact<double>()) return *d;
        if (auto i = n->value_exact<std::int64_t>()) return static_cast<double>(*i);
        config_error(field(key), "expected a number");
    }

    double number_or(std::string_view key, double fallback) { return number(key).value_or(fallback); }

    std::optional<std::int64_t> integer(std::string_view key) {
        const toml::node* n = node(key);
        if (!n) return std::nullopt;
        if (auto i = n->value_exact<std::int64_t>()) return *i;
        config_error(field(key), "expected an integer");
    }

    std::optional<std::string> string(std::string_view key) {
        const toml::node* n = node(key);
        if (!n) return std::nullopt;
        if (auto s = n->value_exact<std::string>()) return *s;
        config_error(field(key), "expected a string");
    }

    const toml::array* array(std::string_view key) {
        const toml::node* n = node(key);
        if (!n) return nullptr;
        if (const auto* a = n->as_array()) return a;
        config_error(field(key), "expected an array");
    }

    void reject_unknown_keys() const {
        if (!table_) return;
        for (const auto& [k, v] : *table_) {
            if (!seen_.contains(std::string(k.str()))) config_error(field(k.str()), "unknown key");
        }
    }

private:
    const toml::table* table_;
    std::string path_;
    std::set<std::string> seen_;
};

double as_number(const toml::node& n, const std::string& field) {
    if (auto d = n.value_exact<double>()) return *d;
    if (auto i = n.value_exact<std::int64_t>()) return static_cast<double>(*i);
    config_error(field, "expected a number");
}

GeoPosition as_position(const toml::node& n, const std::string& field) {
    const auto* a = n.as_array();
    if (!a || a->size() != 2) config_error(field, "expected [x, y]");
    return {as_number(*a->get(0), field), as_number(*a->get(1), field)};
}

std::uint64_t as_seed(std::int64_t v, const std::string& field) {
    if (v < 0) config_error(field, "seed must be >= 0");
    return static_cast<std::uint64_t>(v);
}

SpeedClass speed_class_field(Section& s, std::string_view key) {
    auto text = s.string(key);
    if (!text) config_error(s.field(key), "missing");
    auto c = parse_speed_class(*text);
    if (!c) config_error(s.field(key), "expected slow, medium or fast");
    return *c;
}

Heading8 heading_field(Section& s, std::string_view key) {
    auto text = s.string(key);
    if (!text) config_error(s.field(key), "missing");
    auto h = parse_heading(*text);
    if (!h) config_error(s.field(key), "expected one of N, NE, E, SE, S, SW, W, NW");
    return *h;
}

GeoPosition position_field(Section& s, std::string_view key) {
    const toml::node* n = s.node(key);
    if (!n) config_error(s.field(key), "missing");
    return as_position(*n, s.field(key));
}

const toml::table* subtable(const toml::table& root, std::string_view key) {
    const toml::node* n = root.get(key);
    if (!n) return nullptr;
    const auto* t = n->as_table();
    if (!t) config_error("[" + std::string(key) + "]", "expected a table");
    return t;
}

void parse_world(Section s, Scenario& sc) {
    sc.world.width = s.number_or("width_m", sc.world.width);
    sc.world.height = s.number_or("height_m", sc.world.height);
    sc.grid.block_length = s.number_or("block_length_m", sc.grid.block_length);
    sc.grid.world = sc.world;
    s.reject_unknown_keys();
}

void parse_rsus(Section s, Scenario& sc) {
    const double radius = s.number_or("coverage_radius_m", 400.0);
    const double bw = s.number_or("bandwidth_mbps", 50.0);
    if (const toml::array* positions = s.array("positions")) {
        for (std::size_t i = 0; i < positions->size(); ++i) {
            sc.rsus.push_back({as_position(*positions->get(i), s.field("positions")), radius, bw});
        }
    }
    s.reject_unknown_keys();
}

void parse_vehicles(Section s, Scenario& sc, const std::filesystem::path& base_dir) {
    if (auto n = s.integer("count")) {
        if (*n < 0) config_error(s.field("count"), "must be >= 0");
        sc.vehicles.count = static_cast<std::size_t>(*n);
    }
    if (auto trace = s.string("trace")) {
        std::filesystem::path p(*trace);
        sc.vehicles.trace_path = p.is_relative() ? base_dir / p : p;
    }
    sc.vehicles.tick = s.number_or("tick_s", sc.vehicles.tick);
    if (auto n = s.integer("cpu_units")) sc.vehicles.resources.cpu_units = static_cast<int>(*n);
    if (auto n = s.integer("storage_mb")) sc.vehicles.resources.storage_mb = static_cast<long>(*n);
    sc.grid.turn_probability = s.number_or("turn_probability", sc.grid.turn_probability);
    if (const toml::array* m = s.array("speed_transition")) {
        if (m->size() != 3) config_error(s.field("speed_transition"), "expected a 3x3 matrix");
        for (std::size_t i = 0; i < 3; ++i) {
            const auto* row = m->get(i)->as_array();
            if (!row || row->size() != 3) config_error(s.field("speed_transition"), "expected a 3x3 matrix");
            for (std::size_t j = 0; j < 3; ++j) {
                sc.grid.speed_transition[i][j] = as_number(*row->get(j), s.field("speed_transition"));
            }
        }
    }
    if (const toml::array* speeds = s.array("class_speeds_kmh")) {
        if (speeds->size() != 3) config_error(s.field("class_speeds_kmh"), "expected 3 values");
        for (std::size_t i = 0; i < 3; ++i) {
            sc.grid.class_speeds_kmh[i] = as_number(*speeds->get(i), s.field("class_speeds_kmh"));
        }
    }
    if (const toml::array* leaves = s.array("leaves")) {
        for (std::size_t i = 0; i < leaves->size(); ++i) {
            const auto* t = leaves->get(i)->as_table();
            if (!t) config_error(s.field("leaves"), "expected inline tables");
            Section l(t, s.path() + ".leaves");
            auto at = l.number("t_s");
            auto who = l.string("vehicle");
            if (!at || !who) config_error(s.field("leaves"), "each entry needs t_s and vehicle");
            sc.vehicles.leaves.push_back({*at, VehicleId(*who)});
            l.reject_unknown_keys();
        }
    }
    s.reject_unknown_keys();
}

void parse_network(Section s, Scenario& sc) {
    NetworkModel& n = sc.network;
    if (auto lat = s.number("latency_s")) n.latency_lo = n.latency_hi = *lat;
    if (const toml::array* range = s.array("latency_range_s")) {
        if (range->size() != 2) config_error(s.field("latency_range_s"), "expected [lo, hi]");
        n.latency_lo = as_number(*range->get(0), s.field("latency_range_s"));
        n.latency_hi = as_number(*range->get(1), s.field("latency_range_s"));
    }
    n.drop_probability = s.number_or("drop_probability", n.drop_probability);
    n.vehicle_bandwidth_mbps = s.number_or("vehicle_bandwidth_mbps", n.vehicle_bandwidth_mbps);
    n.rsu_bandwidth_mbps = s.number_or("rsu_bandwidth_mbps", n.rsu_bandwidth_mbps);
    if (auto r = s.integer("retry_limit")) n.retry_limit = static_cast<int>(*r);
    s.reject_unknown_keys();
}

void parse_protocol(Section s, Scenario& sc) {
    ProtocolConfig& p = sc.protocol;
    p.update_interval = s.number_or("update_interval_s", p.update_interval);
    if (auto m = s.integer("miss_limit")) p.miss_limit = static_cast<int>(*m);
    p.zone_radius = s.number_or("zone_radius_u_m", p.zone_radius);
    if (auto r = s.integer("max_precopy_rounds")) p.max_precopy_rounds = static_cast<int>(*r);
    p.stop_threshold_mb = s.number_or("stop_threshold_mb", p.stop_threshold_mb);
    p.creation_delay = s.number_or("creation_delay_s", p.creation_delay);
    p.activation_delay = s.number_or("activation_delay_s", p.activation_delay);
    p.horizon_cap = s.number_or("horizon_cap_s", p.horizon_cap);
    if (auto policy = s.string("policy")) {
        auto parsed = parse_selection_policy(*policy);
        if (!parsed) config_error(s.field("policy"), "expected min_workload, random or max_remaining_time");
        p.policy = *parsed;
    }
    p.default_image_mb = s.number_or("image_mb", p.default_image_mb);
    p.default_dirty_rate_mbps = s.number_or("dirty_rate_mbps", p.default_dirty_rate_mbps);
    s.reject_unknown_keys();
}

DrivingChange parse_change(const toml::node& n, const std::string& field) {
    const auto* t = n.as_table();
    if (!t) config_error(field, "expected inline tables");
    Section s(t, field);
    DrivingChange c;
    auto at = s.number("t_s");
    if (!at) config_error(field, "each update needs t_s");
    c.t = *at;
    if (s.node("speed_class")) c.speed_class = speed_class_field(s, "speed_class");
    if (s.node("heading")) c.heading = heading_field(s, "heading");
    if (s.node("destination")) c.destination = position_field(s, "destination");
    s.reject_unknown_keys();
    return c;
}

void parse_consumers(const toml::table* table, Scenario& sc) {
    Section s(table, "consumers");
    const double retry_interval = s.number_or("retry_interval_s", 10.0);
    const auto max_retries = s.integer("max_retries").value_or(0);
    const toml::array* requests = s.array("request");
    s.reject_unknown_keys();
    if (!requests) return;
    for (std::size_t i = 0; i < requests->size(); ++i) {
        const auto* t = requests->get(i)->as_table();
        if (!t) config_error("[[consumers.request]]", "expected a table");
        Section r(t, "consumers.request." + std::to_string(i));
        ConsumerScript c;
        c.id = ConsumerId(r.string("id").value_or("c" + std::to_string(i + 1)));
        c.t = r.number_or("t_s", 0.0);
        c.params.source = position_field(r, "source");
        c.params.destination = position_field(r, "destination");
        c.params.speed_class = speed_class_field(r, "speed_class");
        c.params.heading = heading_field(r, "heading");
        c.image_mb = r.number_or("image_mb", sc.protocol.default_image_mb);
        c.dirty_rate_mbps = r.number_or("dirty_rate_mbps", sc.protocol.default_dirty_rate_mbps);
        c.retry_interval = r.number_or("retry_interval_s", retry_interval);
        c.max_retries = static_cast<int>(r.integer("max_retries").value_or(max_retries));
        if (const toml::array* ups = r.array("updates")) {
            for (std::size_t k = 0; k < ups->size(); ++k) {
                c.updates.push_back(parse_change(*ups->get(k), r.field("updates")));
            }
        }
        r.reject_unknown_keys();
        sc.consumers.push_back(std::move(c));
    }
}

void parse_run(Section s, Scenario& sc) {
    sc.run.end_time = s.number_or("end_time_s", sc.run.end_time);
    if (auto seed = s.integer("seed")) sc.run.seed = as_seed(*seed, s.field("seed"));
    if (auto m = s.integer("max_events")) {
        if (*m <= 0) config_error(s.field("max_events"), "must be > 0");
        sc.run.max_events = static_cast<std::uint64_t>(*m);
    }
    sc.run.inject_invariant_violation_at = s.number("inject_invariant_violation_at_s");
    s.reject_unknown_keys();
}

}  // namespace

void ProtocolConfig::validate() const {
    if (!(update_interval > 0.0)) config_error("[protocol].update_interval_s", "must be > 0");
    if (miss_limit < 0) config_error("[protocol].miss_limit", "must be >= 0");
    if (!(zone_radius > 0.0)) config_error("[protocol].zone_radius_u_m", "must be > 0");
    if (max_precopy_rounds < 1) config_error("[protocol].max_precopy_rounds", "must be >= 1");
    if (!(stop_threshold_mb >= 0.0)) config_error("[protocol].stop_threshold_mb", "must be >= 0");
    if (!(creation_delay >= 0.0)) config_error("[protocol].creation_delay_s", "must be >= 0");
    if (!(activation_delay >= 0.0)) config_error("[protocol].activation_delay_s", "must be >= 0");
    if (!(horizon_cap > 0.0)) config_error("[protocol].horizon_cap_s", "must be > 0");
    if (!(default_image_mb > 0.0)) config_error("[protocol].image_mb", "must be > 0");
    if (!(default_dirty_rate_mbps >= 0.0)) config_error("[protocol].dirty_rate_mbps", "must be >= 0");
}

std::size_t Scenario::vehicle_count() const {
    if (vehicles.count > 0) return vehicles.count;
    std::set<VehicleId> ids;
    for (const auto& r : vehicles.trace) ids.insert(r.vehicle);
    return ids.size();
}

void Scenario::validate() const {
    grid.validate();
    network.validate();
    protocol.validate();
    if (vehicles.count > 0 && !vehicles.trace.empty()) {
        config_error("[vehicles]", "use either count or trace, not both");
    }
    if (!(vehicles.tick > 0.0)) config_error("[vehicles].tick_s", "must be > 0");
    if (vehicles.resources.cpu_units < 1) config_error("[vehicles].cpu_units", "must be >= 1");
    if (vehicles.resources.storage_mb < 0) config_error("[vehicles].storage_mb", "must be >= 0");
    for (const auto& r : rsus) {
        if (!world.contains(r.position)) config_error("[rsus].positions", "RSU outside the world bounds");
        if (!(r.coverage_radius > 0.0)) config_error("[rsus].coverage_radius_m", "must be > 0");
        if (!(r.bandwidth_mbps > 0.0)) config_error("[rsus].bandwidth_mbps", "must be > 0");
    }
    for (const auto& rec : vehicles.trace) {
        if (!world.contains(rec.position)) {
            config_error("[vehicles].trace", "position of " + rec.vehicle.str() + " outside the world bounds");
        }
    }
    for (const auto& c : consumers) {
        const std::string f = "[[consumers.request]] " + c.id.str();
        if (c.params.source == c.params.destination) config_error(f, "source equals destination");
        if (!world.contains(c.params.source) || !world.contains(c.params.destination)) {
            config_error(f, "source/destination outside the world bounds");
        }
        if (!(c.image_mb > 0.0)) config_error(f + ".image_mb", "must be > 0");
        if (!(c.dirty_rate_mbps >= 0.0)) config_error(f + ".dirty_rate_mbps", "must be >= 0");
        if (!(c.retry_interval > 0.0)) config_error(f + ".retry_interval_s", "must be > 0");
        if (c.max_retries < 0) config_error(f + ".max_retries", "must be >= 0");
        if (c.t < 0.0) config_error(f + ".t_s", "must be >= 0");
    }
    if (!(run.end_time > 0.0)) config_error("[run].end_time_s", "must be > 0");
}

Scenario parse_scenario(std::string_view toml_text, const std::filesystem::path& base_dir) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "TOML syntax error at line " << e.source().begin.line << ": " << e.description();
        throw Error(ErrorCode::ConfigError, msg.str());
    }

    static const std::set<std::string> known = {"world", "rsus", "vehicles", "network",
                                                "protocol", "consumers", "run"};
    for (const auto& [k, v] : root) {
        if (!known.contains(std::string(k.str()))) config_error("[" + std::string(k.str()) + "]", "unknown section");
    }

    Scenario sc;
    parse_world(Section(subtable(root, "world"), "world"), sc);
    parse_rsus(Section(subtable(root, "rsus"), "rsus"), sc);
    parse_vehicles(Section(subtable(root, "vehicles"), "vehicles"), sc, base_dir);
    parse_network(Section(subtable(root, "network"), "network"), sc);
    parse_protocol(Section(subtable(root, "protocol"), "protocol"), sc);
    parse_consumers(subtable(root, "consumers"), sc);
    parse_run(Section(subtable(root, "run"), "run"), sc);

    if (sc.vehicles.trace_path) sc.vehicles.trace = load_trace(*sc.vehicles.trace_path);
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open scenario file: " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), path.parent_path());
}

}  // namespace vvaas
