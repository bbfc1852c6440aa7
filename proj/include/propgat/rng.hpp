#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace propgat {

// splitmix64 finalizer; used as the mixing step when deriving stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_key(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Purpose tags keep streams for different uses of the same (config, fold,
// epoch) coordinate independent.
enum class StreamUse : std::uint64_t {
    split = 1,
    fold = 2,
    init = 3,
    oversample = 4,
    noise = 5,
    shuffle = 6,
    synth = 7,
    test = 99,
};

// Deterministic random stream addressed by (master seed, key words).
//
// The engine is std::mt19937_64 (sequence fixed by the standard) and all
// distributions are implemented here rather than taken from <random>, whose
// distributions are implementation-defined. Results are therefore identical
// across platforms and standard libraries. Streams with distinct keys are
// statistically independent; adding or removing keys elsewhere never
// perturbs an existing stream.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(derive(seed, {})) {}

    RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> key)
        : engine_(derive(seed, key)) {}

    static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
        std::uint64_t h = mix64(seed ^ 0xd1b54a32d192ed03ULL);
        for (std::uint64_t w : key) h = mix64(h ^ w);
        return h;
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // Uniform on (-1, 1); the NEFTune epsilon distribution.
    double uniform_pm1() { return 2.0 * u01() - 1.0; }

    // Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller. Always consumes exactly two draws so
    // the stream position stays predictable.
    double normal() {
        double u1 = 1.0 - u01();  // (0, 1]
        double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double exponential(double mean) { return -mean * std::log(1.0 - u01()); }

    bool bernoulli(double p) { return u01() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace propgat
