#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace redlab {

/// SplitMix64 finalizer. Used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Sub-seed for worker/sample `index` under `master`. Parallel and serial
/// runs that use the same (master, index) pairs see identical streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Portable random source: mt19937_64 plus hand-rolled transforms so that
/// draws do not depend on the standard library's distribution objects.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in the open interval (0, 1), 53-bit resolution.
    double uniform();

    /// Standard normal (Box-Muller, cached second variate).
    double normal();

    /// Gamma(1/2, 1) variate, i.e. Z^2 / 2.
    double gamma_half();

    /// Fills `out` with a Dirichlet(1/2, ..., 1/2) draw.
    void dirichlet_half(std::span<double> out);

    /// Categorical draw from probabilities summing to one.
    std::size_t categorical(std::span<const double> probs);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace redlab
