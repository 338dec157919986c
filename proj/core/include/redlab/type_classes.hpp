#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "redlab/family.hpp"
#include "redlab/grid.hpp"

namespace redlab {

inline constexpr std::size_t kDefaultMaxClasses = 1'000'000;

/// A set of sequences sharing sufficient statistics. Every length model in
/// this library depends on x^n only through these statistics.
///
/// Memoryless: stats = symbol counts (k entries).
/// Markov: stats = [first symbol, N_00, N_01, ..., N_{k-1,k-1}] with N_ij the
/// number of i -> j transitions.
struct TypeClass {
    std::vector<std::uint32_t> stats;
    double log_count = 0.0;  // natural log of the number of member sequences
};

class TypeClassSet {
public:
    /// Throws IntractableError when the class count would exceed `max_classes`.
    static TypeClassSet enumerate(const ParamFamily& family, std::int64_t n,
                                  std::size_t max_classes = kDefaultMaxClasses);

    /// Number of classes, or an upper estimate when it is not cheap to count
    /// exactly (Markov families).
    static double class_count_estimate(const ParamFamily& family, std::int64_t n);

    const ParamFamily& family() const noexcept { return family_; }
    std::int64_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return classes_.size(); }
    const TypeClass& operator[](std::size_t i) const { return classes_[i]; }
    const std::vector<TypeClass>& classes() const noexcept { return classes_; }

private:
    TypeClassSet(ParamFamily family, std::int64_t n, std::vector<TypeClass> classes)
        : family_(family), n_(n), classes_(std::move(classes)) {}

    ParamFamily family_;
    std::int64_t n_;
    std::vector<TypeClass> classes_;
};

std::vector<std::uint32_t> sufficient_stats(const ParamFamily& family, std::span<const Symbol> x);

/// log2 mu(x^n) of any member of the class, given a parameter's log table.
/// Zero counts contribute nothing even where the log probability is -inf.
double class_log2_prob(const ParamFamily& family, const LogTable& table, std::span<const std::uint32_t> stats);
double class_log2_prob(const ParamVector& theta, std::span<const std::uint32_t> stats);

}  // namespace redlab
