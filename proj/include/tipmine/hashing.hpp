#pragma once

// Hashing and seeded randomness shared across modules. Everything here is
// hand-specified so streams are identical across standard libraries.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace tipmine {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// 53-bit uniform draws in [0,1)
class Uniform01 {
public:
    explicit Uniform01(std::uint64_t seed)
        : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

    double next() {
        return static_cast<double>(splitmix64_next(state_) >> 11) * 0x1.0p-53;
    }

    std::uint64_t next_u64() { return splitmix64_next(state_); }

private:
    std::uint64_t state_;
};

// seeded Fisher-Yates
template <typename T>
inline void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
    std::uint64_t state = seed ? seed : 0x9E3779B97F4A7C15ULL;
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[splitmix64_next(state) % i]);
}

}  // namespace tipmine
