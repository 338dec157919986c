#include "redlab/type_classes.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "redlab/error.hpp"

namespace redlab {

namespace {

double log_binomial(double n, double r) { return std::lgamma(n + 1) - std::lgamma(r + 1) - std::lgamma(n - r + 1); }

void enumerate_compositions(int k, std::uint32_t n, std::vector<std::uint32_t>& counts, int pos,
                            std::uint32_t left, double log_nfact, std::vector<TypeClass>& out) {
    if (pos == k - 1) {
        counts[static_cast<std::size_t>(pos)] = left;
        double lc = log_nfact;
        for (auto c : counts) lc -= std::lgamma(static_cast<double>(c) + 1.0);
        out.push_back({counts, lc});
        return;
    }
    for (std::uint32_t c = 0; c <= left; ++c) {
        counts[static_cast<std::size_t>(pos)] = c;
        enumerate_compositions(k, n, counts, pos + 1, left - c, log_nfact, out);
    }
}

std::vector<TypeClass> enumerate_memoryless(int k, std::int64_t n) {
    std::vector<TypeClass> out;
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(k), 0);
    const auto nn = static_cast<std::uint32_t>(n);
    enumerate_compositions(k, nn, counts, 0, nn, std::lgamma(static_cast<double>(n) + 1.0), out);
    return out;
}

// Dynamic programming over (first, last, transition counts); the last symbol
// is implied by the first symbol and the counts, so dropping it at the end
// merges nothing incorrectly.
std::vector<TypeClass> enumerate_markov(int k, std::int64_t n, std::size_t max_classes) {
    using Key = std::vector<std::uint32_t>;  // [first, last, N_00, ..., N_{k-1,k-1}]
    const auto ku = static_cast<std::size_t>(k);
    std::map<Key, double> states;
    for (int s = 0; s < k; ++s) {
        Key key(2 + ku * ku, 0);
        key[0] = static_cast<std::uint32_t>(s);
        key[1] = static_cast<std::uint32_t>(s);
        states.emplace(std::move(key), 1.0);
    }
    const std::size_t state_cap = max_classes * ku;
    for (std::int64_t t = 1; t < n; ++t) {
        std::map<Key, double> next;
        for (const auto& [key, count] : states) {
            const auto last = key[1];
            for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(k); ++s) {
                Key nk = key;
                nk[1] = s;
                ++nk[2 + last * ku + s];
                next[std::move(nk)] += count;
            }
        }
        if (next.size() > state_cap)
            throw IntractableError("Markov type-class enumeration exceeds budget of " + std::to_string(max_classes) +
                                   " classes at length " + std::to_string(t + 1));
        states = std::move(next);
    }
    std::vector<TypeClass> out;
    out.reserve(states.size());
    for (const auto& [key, count] : states) {
        std::vector<std::uint32_t> stats;
        stats.reserve(1 + ku * ku);
        stats.push_back(key[0]);
        stats.insert(stats.end(), key.begin() + 2, key.end());
        out.push_back({std::move(stats), std::log(count)});
    }
    if (out.size() > max_classes)
        throw IntractableError("Markov type-class count " + std::to_string(out.size()) + " exceeds budget");
    return out;
}

}  // namespace

double TypeClassSet::class_count_estimate(const ParamFamily& family, std::int64_t n) {
    const double k = family.alphabet_size();
    const double nn = static_cast<double>(n);
    if (family.kind() == SourceKind::Memoryless) return std::exp(log_binomial(nn + k - 1, k - 1));
    // k first symbols times compositions of n-1 transitions into k^2 cells.
    return k * std::exp(log_binomial(nn - 1 + k * k - 1, k * k - 1));
}

TypeClassSet TypeClassSet::enumerate(const ParamFamily& family, std::int64_t n, std::size_t max_classes) {
    if (n < 1) throw ConfigError("sequence length must be >= 1");
    if (n > std::int64_t{1} << 30) throw IntractableError("sequence length too large for type-class enumeration");
    const int k = family.alphabet_size();
    if (family.kind() == SourceKind::Memoryless) {
        const double estimate = class_count_estimate(family, n);
        if (estimate > static_cast<double>(max_classes) * 1.0000001)
            throw IntractableError("type-class count " + std::to_string(estimate) + " for " + family.to_string() +
                                   " at n = " + std::to_string(n) + " exceeds budget of " +
                                   std::to_string(max_classes));
        return TypeClassSet(family, n, enumerate_memoryless(k, n));
    }
    return TypeClassSet(family, n, enumerate_markov(k, n, max_classes));
}

std::vector<std::uint32_t> sufficient_stats(const ParamFamily& family, std::span<const Symbol> x) {
    const auto k = static_cast<std::size_t>(family.alphabet_size());
    if (family.kind() == SourceKind::Memoryless) {
        std::vector<std::uint32_t> counts(k, 0);
        for (auto s : x) ++counts[s];
        return counts;
    }
    std::vector<std::uint32_t> stats(1 + k * k, 0);
    if (x.empty()) return stats;
    stats[0] = x[0];
    for (std::size_t t = 1; t < x.size(); ++t) ++stats[1 + x[t - 1] * k + x[t]];
    return stats;
}

double class_log2_prob(const ParamFamily& family, const LogTable& table, std::span<const std::uint32_t> stats) {
    double acc = 0.0;
    if (family.kind() == SourceKind::Memoryless) {
        for (std::size_t j = 0; j < stats.size(); ++j)
            if (stats[j] != 0) acc += static_cast<double>(stats[j]) * table.probs[j];
        return acc;
    }
    acc = table.initial[stats[0]];
    for (std::size_t j = 1; j < stats.size(); ++j)
        if (stats[j] != 0) acc += static_cast<double>(stats[j]) * table.probs[j - 1];
    return acc;
}

double class_log2_prob(const ParamVector& theta, std::span<const std::uint32_t> stats) {
    return class_log2_prob(theta.family(), LogTable(theta), stats);
}

}  // namespace redlab
