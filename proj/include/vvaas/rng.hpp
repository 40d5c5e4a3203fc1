#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace vvaas {

// Independent random streams derived from one run seed.
enum class Stream : std::uint32_t { Mobility = 1, Network = 2, Selection = 3 };

// mt19937_64 with distributions written out explicitly, so draws are
// identical across standard library implementations.
class Rng {
public:
    Rng(std::uint64_t seed, Stream stream);

    std::uint64_t next() { return engine_(); }
    // Uniform on [0, 1) with 53 bits of precision.
    double uniform01();
    double uniform(double lo, double hi);
    // Uniform on [0, n); n must be > 0.
    std::size_t index(std::size_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace vvaas
