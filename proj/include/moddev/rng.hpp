#ifndef MODDEV_RNG_HPP
#define MODDEV_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace moddev {

/// 64-bit mix (splitmix64 finalizer). Used to derive independent
/// per-replication streams from a (seed, index) pair.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ (b * 0xd1342543de82ef95ULL + 1));
}

/// Random stream with explicitly specified output mappings so that the
/// byte-level sample stream is identical across platforms and runs.
/// Each worker or replication owns its own instance; instances are never
/// shared between threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Stream for replication `index` of a run keyed by `seed`. Derivation
    /// is counter-based, so any subset of replications can be generated in
    /// any order (or on any thread) with identical results.
    static Rng for_replication(std::uint64_t seed, std::uint64_t index) {
        return Rng(mix64(seed, index));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Marsaglia's polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace moddev

#endif
