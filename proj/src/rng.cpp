#include "otadpd/rng.hpp"

#include <cmath>

namespace otadpd {

std::uint64_t fnv1a64(std::string_view s, std::uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {
std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), eng_(splitmix(seed)) {}

Rng Rng::stream(std::string_view name) const { return Rng(splitmix(seed_ ^ fnv1a64(name))); }

double Rng::normal() { return nd_(eng_); }

// 53 random bits; avoids implementation-defined generate_canonical details.
double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::integer(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    // rejection sampling keeps it unbiased and independent of libstdc++ internals
    const std::uint64_t lim = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r;
    do {
        r = eng_();
    } while (r >= lim);
    return lo + static_cast<int>(r % span);
}

cplx Rng::cgauss(double var) {
    const double s = std::sqrt(var / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

}  // namespace otadpd
