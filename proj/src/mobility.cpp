#include <cmath>
#include <string>

#include "vvaas/error.hpp"
#include "vvaas/mobility.hpp"

namespace vvaas {

namespace {

constexpr double kGridEps = 1e-6;

struct Axis {
    double dx;
    double dy;
};

Axis axis_of(double heading) {
    switch (static_cast<int>(std::lround(heading)) % 360) {
        case 0: return {0.0, 1.0};
        case 90: return {1.0, 0.0};
        case 180: return {0.0, -1.0};
        default: return {-1.0, 0.0};
    }
}

double snap_heading(double heading) {
    return std::fmod(std::round(normalize_degrees(heading) / 90.0) * 90.0, 360.0);
}

// Next grid line strictly ahead of coordinate c when moving in direction dir.
double next_line(double c, double dir, double block) {
    const double k = c / block;
    return dir > 0.0 ? (std::floor(k + kGridEps) + 1.0) * block : (std::ceil(k - kGridEps) - 1.0) * block;
}

bool on_line(double c, double block) {
    const double k = c / block;
    return std::abs(k - std::round(k)) < kGridEps;
}

}  // namespace

void GridParams::validate() const {
    if (!(world.width > 0.0) || !(world.height > 0.0)) {
        throw Error(ErrorCode::ConfigError, "world bounds must be positive");
    }
    if (!(block_length > 0.0)) throw Error(ErrorCode::ConfigError, "block_length must be > 0");
    if (block_length > world.width || block_length > world.height) {
        throw Error(ErrorCode::ConfigError, "block_length must not exceed the world size");
    }
    if (!(turn_probability >= 0.0 && turn_probability <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "turn_probability must be in [0,1]");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0.0;
        for (double p : speed_transition[i]) {
            if (!(p >= 0.0)) throw Error(ErrorCode::ConfigError, "speed_transition entries must be >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw Error(ErrorCode::ConfigError,
                        "speed_transition row " + std::to_string(i) + " must sum to 1");
        }
        if (classify_speed(class_speeds_kmh[i]) != kAllSpeedClasses[i]) {
            throw Error(ErrorCode::ConfigError, "class_speeds_kmh[" + std::to_string(i) +
                                                    "] lies outside its speed class band");
        }
    }
}

GridMobility::GridMobility(GridParams params) : params_(params) { params_.validate(); }

Kinematics GridMobility::spawn(Rng& rng) const {
    const auto cols = static_cast<std::size_t>(std::floor(params_.world.width / params_.block_length + kGridEps)) + 1;
    const auto rows = static_cast<std::size_t>(std::floor(params_.world.height / params_.block_length + kGridEps)) + 1;
    Kinematics k;
    k.position = {static_cast<double>(rng.index(cols)) * params_.block_length,
                  static_cast<double>(rng.index(rows)) * params_.block_length};
    k.heading_deg = static_cast<double>(rng.index(4)) * 90.0;
    k.speed_kmh = params_.class_speeds_kmh[rng.index(3)];
    if (leads_outside(k.position, k.heading_deg)) k.heading_deg = snap_heading(k.heading_deg + 180.0);
    return k;
}

SpeedClass GridMobility::next_class(SpeedClass current, Rng& rng) const {
    const auto& row = params_.speed_transition[static_cast<std::size_t>(current)];
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        acc += row[j];
        if (u < acc) return kAllSpeedClasses[j];
    }
    // rounding left u above the cumulative sum; take the last class with mass
    for (std::size_t j = 3; j-- > 0;) {
        if (row[j] > 0.0) return kAllSpeedClasses[j];
    }
    return current;
}

bool GridMobility::leads_outside(const GeoPosition& at, double heading) const {
    const Axis a = axis_of(heading);
    if (a.dx != 0.0) {
        const double nx = next_line(at.x, a.dx, params_.block_length);
        return nx < -kGridEps || nx > params_.world.width + kGridEps;
    }
    const double ny = next_line(at.y, a.dy, params_.block_length);
    return ny < -kGridEps || ny > params_.world.height + kGridEps;
}

double GridMobility::choose_heading(double heading, const GeoPosition& at, Rng& rng) const {
    const double u = rng.uniform01();
    const double half = params_.turn_probability / 2.0;
    double next = heading;
    if (u < half) {
        next = heading - 90.0;
    } else if (u < params_.turn_probability) {
        next = heading + 90.0;
    }
    next = snap_heading(next);
    if (leads_outside(at, next)) next = snap_heading(next + 180.0);
    return next;
}

Kinematics GridMobility::step(const Kinematics& state, double dt, Rng& rng) const {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "mobility step dt must be > 0");

    Kinematics out = state;
    const SpeedClass cls = next_class(classify_speed(state.speed_kmh), rng);
    out.speed_kmh = params_.class_speeds_kmh[static_cast<std::size_t>(cls)];
    out.heading_deg = snap_heading(state.heading_deg);
    if (leads_outside(out.position, out.heading_deg)) out.heading_deg = snap_heading(out.heading_deg + 180.0);

    double travel = kmh_to_ms(out.speed_kmh) * dt;
    const double b = params_.block_length;
    while (travel > 0.0) {
        const Axis a = axis_of(out.heading_deg);
        double& coord = a.dx != 0.0 ? out.position.x : out.position.y;
        const double dir = a.dx != 0.0 ? a.dx : a.dy;
        const double target = next_line(coord, dir, b);
        const double gap = std::abs(target - coord);
        if (travel < gap) {
            coord += dir * travel;
            break;
        }
        coord = target;
        travel -= gap;
        // Perpendicular coordinate is on a road line, so this is an intersection.
        const double other = a.dx != 0.0 ? out.position.y : out.position.x;
        if (on_line(other, b)) {
            out.heading_deg = choose_heading(out.heading_deg, out.position, rng);
        } else if (leads_outside(out.position, out.heading_deg)) {
            out.heading_deg = snap_heading(out.heading_deg + 180.0);
        }
    }
    return out;
}

}  // namespace vvaas
