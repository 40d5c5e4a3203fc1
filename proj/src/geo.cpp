#include "vvaas/geo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include <spdlog/spdlog.h>

#include "vvaas/error.hpp"

namespace vvaas {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DuplicateRegistration: return "DuplicateRegistration";
        case ErrorCode::UnknownVehicle: return "UnknownVehicle";
        case ErrorCode::UnknownVirtualVehicle: return "UnknownVirtualVehicle";
        case ErrorCode::NoCoverage: return "NoCoverage";
        case ErrorCode::NoHostAvailable: return "NoHostAvailable";
        case ErrorCode::InvalidLifecycle: return "InvalidLifecycle";
        case ErrorCode::NotInZone: return "NotInZone";
        case ErrorCode::SchedulingInPast: return "SchedulingInPast";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
    }
    return "Unknown";
}

double distance(const GeoPosition& a, const GeoPosition& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

Heading8 quantize_heading(double deg) {
    if (!std::isfinite(deg) || deg < 0.0 || deg >= 360.0) {
        throw Error(ErrorCode::InvalidArgument,
                    "heading out of range [0,360): " + std::to_string(deg));
    }
    const double shifted = std::fmod(deg + 22.5, 360.0);
    const auto sector = static_cast<int>(std::floor(shifted / 45.0));
    return kAllHeadings[static_cast<std::size_t>(std::clamp(sector, 0, 7))];
}

SpeedClass classify_speed(double kmh) {
    if (!std::isfinite(kmh) || kmh < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "speed must be >= 0 km/h: " + std::to_string(kmh));
    }
    if (kmh < bands::kMediumFromKmh) return SpeedClass::Slow;
    if (kmh < bands::kFastFromKmh) return SpeedClass::Medium;
    if (kmh > bands::kFastNominalMaxKmh) {
        spdlog::warn("speed {} km/h above the fast band maximum; classified as Fast", kmh);
    }
    return SpeedClass::Fast;
}

LocationMatch classify_location(double meters) {
    if (!std::isfinite(meters) || meters < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "distance must be >= 0 m: " + std::to_string(meters));
    }
    if (meters < bands::kSameBelowM) return LocationMatch::Same;
    if (meters <= bands::kNearUpToM) return LocationMatch::Near;
    return LocationMatch::Far;
}

double normalize_degrees(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    // fmod of a tiny negative value can round up to exactly 360
    return r >= 360.0 ? 0.0 : r;
}

double kmh_to_ms(double kmh) { return kmh / 3.6; }

Velocity velocity_of(double speed_kmh, double heading_deg) {
    const double v = kmh_to_ms(speed_kmh);
    const double rad = heading_deg * std::numbers::pi / 180.0;
    return {v * std::sin(rad), v * std::cos(rad)};
}

std::string_view to_string(Heading8 h) {
    static constexpr std::array<std::string_view, 8> names = {"N", "NE", "E", "SE",
                                                              "S", "SW", "W", "NW"};
    return names[static_cast<std::size_t>(h)];
}

std::string_view to_string(SpeedClass c) {
    switch (c) {
        case SpeedClass::Slow: return "slow";
        case SpeedClass::Medium: return "medium";
        case SpeedClass::Fast: return "fast";
    }
    return "?";
}

std::string_view to_string(LocationMatch m) {
    switch (m) {
        case LocationMatch::Same: return "same";
        case LocationMatch::Near: return "near";
        case LocationMatch::Far: return "far";
    }
    return "?";
}

namespace {
std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}
}  // namespace

std::optional<Heading8> parse_heading(std::string_view s) {
    const std::string l = lower(s);
    for (Heading8 h : kAllHeadings) {
        if (lower(to_string(h)) == l) return h;
    }
    return std::nullopt;
}

std::optional<SpeedClass> parse_speed_class(std::string_view s) {
    const std::string l = lower(s);
    for (SpeedClass c : kAllSpeedClasses) {
        if (to_string(c) == l) return c;
    }
    return std::nullopt;
}

}  // namespace vvaas
