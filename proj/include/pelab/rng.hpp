#pragma once

#include <cstdint>

namespace pelab {

/// Counter-based generator: draw k of stream s is splitmix64(seed, s, k); no hidden state
/// beyond the counter, so any draw can be reproduced in isolation.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    std::uint64_t at(std::uint64_t counter) const;
    std::uint64_t next_u64() { return at(counter_++); }
    // Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace pelab
