#include "vvaas/rng.hpp"

#include <limits>

#include "vvaas/error.hpp"

namespace vvaas {

Rng::Rng(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    engine_.seed(seq);
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "Rng::index on empty range");
    const std::uint64_t range = n;
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - (max % range);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

}  // namespace vvaas
