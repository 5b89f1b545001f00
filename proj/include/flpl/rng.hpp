#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace flpl {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

// Deterministic random stream. The engine (mt19937_64) is bit-exact across
// platforms; the distributions below are hand-rolled because the standard
// library ones are implementation-defined. Streams for independent actors
// (clients, attackers, data generation) are derived from the master seed and
// integer tags, so results do not depend on scheduling or thread count.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    static RngStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
        std::uint64_t s = master;
        (void)detail::splitmix64(s);
        for (std::uint64_t tag : tags) {
            s ^= tag + 0x9E3779B97F4A7C15ull + (s << 6) + (s >> 2);
            (void)detail::splitmix64(s);
        }
        return RngStream(detail::splitmix64(s));
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; pairs are cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased and
    // deterministic for a fixed draw sequence.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Tags used when deriving per-actor streams, kept in one place so callers
// cannot collide by accident.
namespace stream_tag {
inline constexpr std::uint64_t kClient = 0x10;
inline constexpr std::uint64_t kAttacker = 0x20;
inline constexpr std::uint64_t kSyntheticData = 0x30;
inline constexpr std::uint64_t kPartition = 0x40;
inline constexpr std::uint64_t kHoldout = 0x50;
inline constexpr std::uint64_t kEval = 0x60;
} // namespace stream_tag

} // namespace flpl
