#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "otadpd/types.hpp"

namespace otadpd {

// 64-bit FNV-1a; stable across platforms, used for stream names and run hashes.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL);

// Seeded generator. Named child streams let each stage be reproduced on its own.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream derived from this generator's seed and a name.
    Rng stream(std::string_view name) const;
    std::uint64_t seed() const { return seed_; }

    double normal();
    double uniform();  // [0, 1)
    double uniform(double lo, double hi);
    int integer(int lo, int hi);  // inclusive bounds
    // Circular complex Gaussian with total variance `var` (var/2 per dimension).
    cplx cgauss(double var);

    std::mt19937_64& engine() { return eng_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
    std::normal_distribution<double> nd_{0.0, 1.0};
};

}  // namespace otadpd
