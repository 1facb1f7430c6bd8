#pragma once

#include <cmath>
#include <cstdint>

namespace bls {

namespace detail {
inline uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based random stream. A stream is identified by a key derived from
// (master seed, module tag, cell index, replica index); successive outputs
// are a hash of key and counter, so independent streams can be created in
// any order and on any thread without coordination.
class RngStream {
  public:
    RngStream() : key_(0) {}
    explicit RngStream(uint64_t key) : key_(key) {}

    static uint64_t derive_key(uint64_t seed, uint64_t tag, uint64_t cell = 0,
                               uint64_t replica = 0) {
        uint64_t k = detail::mix64(seed);
        k = detail::mix64(k ^ (tag * 0xD1342543DE82EF95ULL));
        k = detail::mix64(k ^ (cell * 0x9E6C63D0876A32C5ULL));
        k = detail::mix64(k ^ (replica * 0xC2B2AE3D27D4EB4FULL));
        return k;
    }

    static RngStream from(uint64_t seed, uint64_t tag, uint64_t cell = 0,
                          uint64_t replica = 0) {
        return RngStream(derive_key(seed, tag, cell, replica));
    }

    RngStream substream(uint64_t idx) const {
        return RngStream(derive_key(key_, 0x5EEDD00DULL, idx));
    }

    uint64_t next_u64() { return detail::mix64(key_ ^ detail::mix64(counter_++)); }

    // uniform on (0,1); never returns 0 or 1
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_int(uint64_t n) {
        // rejection-free 128-bit multiply trick; bias < 2^-64, irrelevant here
        return static_cast<uint64_t>(
            (static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

    double normal() {
        // Box-Muller, one value per call (the pair is not cached)
        double u1 = uniform(), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    long poisson(double mean);

    uint64_t key() const { return key_; }
    uint64_t counter() const { return counter_; }

  private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace bls
