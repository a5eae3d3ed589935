#pragma once

#include <cstdint>
#include <random>

namespace simlab {

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class SeedStream : std::uint64_t {
    network_init = 1,
    disturbance = 2,
    ideal_network = 3,
    perturbation = 4,
};

inline std::uint64_t derive_seed(std::uint64_t run_seed, SeedStream stream) {
    return mix_seed(run_seed ^ mix_seed(static_cast<std::uint64_t>(stream)));
}

/// Uniform draws with a fixed 53-bit mapping so results do not depend on the
/// standard library's distribution implementation.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace simlab
