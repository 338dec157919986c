#include "redlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace redlab {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

double Rng::uniform() {
    // (bits + 0.5) / 2^53 never hits 0 or 1.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double Rng::gamma_half() {
    const double z = normal();
    return 0.5 * z * z;
}

void Rng::dirichlet_half(std::span<double> out) {
    double total = 0.0;
    for (auto& v : out) {
        // A zero gamma draw is possible only through underflow; redraw.
        do {
            v = gamma_half();
        } while (v <= 0.0);
        total += v;
    }
    for (auto& v : out) v /= total;
}

std::size_t Rng::categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = i;
        acc += probs[i];
        if (u < acc) return i;
    }
    return last_positive;
}

}  // namespace redlab
