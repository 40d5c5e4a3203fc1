#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <tuple>

#include "vvaas/error.hpp"
#include "vvaas/mobility.hpp"

namespace vvaas {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& why) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + why);
}

double parse_number(std::string_view field, std::size_t line, std::string_view name) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        fail(line, std::string(name) + " is not a number: '" + std::string(field) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

void append_number(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

}  // namespace

std::vector<TraceRecord> parse_trace(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) fail(1, "missing header");
    if (line != kTraceHeader) {
        fail(1, "expected header '" + std::string(kTraceHeader) + "'");
    }

    std::vector<TraceRecord> records;
    std::map<VehicleId, double> last_t;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fields = split(line, ',');
        if (fields.size() != 6) {
            fail(lineno, "expected 6 fields, got " + std::to_string(fields.size()));
        }
        TraceRecord r;
        r.t = parse_number(fields[0], lineno, "t_s");
        if (fields[1].empty()) fail(lineno, "vehicle_id is empty");
        r.vehicle = VehicleId(std::string(fields[1]));
        r.position = {parse_number(fields[2], lineno, "x_m"), parse_number(fields[3], lineno, "y_m")};
        r.speed_kmh = parse_number(fields[4], lineno, "speed_kmh");
        r.heading_deg = parse_number(fields[5], lineno, "heading_deg");

        if (r.t < 0.0) fail(lineno, "t_s must be >= 0");
        if (r.speed_kmh < 0.0) fail(lineno, "speed_kmh must be >= 0");
        if (r.heading_deg < 0.0 || r.heading_deg >= 360.0) fail(lineno, "heading_deg must be in [0,360)");
        auto [it, fresh] = last_t.emplace(r.vehicle, r.t);
        if (!fresh) {
            if (r.t < it->second) fail(lineno, "time decreases for vehicle " + r.vehicle.str());
            it->second = r.t;
        }
        records.push_back(std::move(r));
    }
    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.t, a.vehicle) < std::tie(b.t, b.vehicle);
    });
    return records;
}

std::vector<TraceRecord> load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open trace file: " + path.string());
    try {
        return parse_trace(in);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
    std::string buf(kTraceHeader);
    buf += '\n';
    for (const auto& r : records) {
        append_number(buf, r.t);
        buf += ',';
        buf += r.vehicle.str();
        buf += ',';
        append_number(buf, r.position.x);
        buf += ',';
        append_number(buf, r.position.y);
        buf += ',';
        append_number(buf, r.speed_kmh);
        buf += ',';
        append_number(buf, r.heading_deg);
        buf += '\n';
    }
    out << buf;
}

TraceSummary summarize(const std::vector<TraceRecord>& records) {
    TraceSummary s;
    s.rows = records.size();
    std::set<VehicleId> ids;
    for (const auto& r : records) ids.insert(r.vehicle);
    s.vehicles = ids.size();
    if (!records.empty()) {
        s.t_first = records.front().t;
        s.t_last = records.back().t;
    }
    return s;
}

}  // namespace vvaas
