#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace vvaas {

// Planar coordinates in meters: x grows east, y grows north.
struct GeoPosition {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const GeoPosition&) const = default;
};

struct Velocity {
    double vx = 0.0;  // m/s east
    double vy = 0.0;  // m/s north
};

struct WorldBounds {
    double width = 0.0;
    double height = 0.0;

    bool contains(const GeoPosition& p) const {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }
};

// Compass sectors, clockwise from north, each 45 degrees wide.
enum class Heading8 { N, NE, E, SE, S, SW, W, NW };

enum class SpeedClass { Slow, Medium, Fast };

enum class LocationMatch { Same, Near, Far };

inline constexpr std::array<Heading8, 8> kAllHeadings = {
    Heading8::N, Heading8::NE, Heading8::E, Heading8::SE,
    Heading8::S, Heading8::SW, Heading8::W, Heading8::NW};

inline constexpr std::array<SpeedClass, 3> kAllSpeedClasses = {
    SpeedClass::Slow, SpeedClass::Medium, SpeedClass::Fast};

namespace bands {
inline constexpr double kMediumFromKmh = 20.0;
inline constexpr double kFastFromKmh = 50.0;
inline constexpr double kFastNominalMaxKmh = 120.0;
inline constexpr double kSameBelowM = 8.0;
inline constexpr double kNearUpToM = 30.0;
}  // namespace bands

double distance(const GeoPosition& a, const GeoPosition& b);

// Throws Error{InvalidArgument} unless deg is finite and in [0, 360).
Heading8 quantize_heading(double deg);

// Throws on negative or non-finite speed. Speeds above the nominal fast
// band maximum still classify as Fast; a warning is logged.
SpeedClass classify_speed(double kmh);

LocationMatch classify_location(double meters);

// Wraps any finite angle into [0, 360).
double normalize_degrees(double deg);

double kmh_to_ms(double kmh);

// Velocity vector for a speed along a compass bearing.
Velocity velocity_of(double speed_kmh, double heading_deg);

std::string_view to_string(Heading8 h);
std::string_view to_string(SpeedClass c);
std::string_view to_string(LocationMatch m);

// Case-insensitive; accepts "N".."NW" and "slow"/"medium"/"fast".
std::optional<Heading8> parse_heading(std::string_view s);
std::optional<SpeedClass> parse_speed_class(std::string_view s);

}  // namespace vvaas
