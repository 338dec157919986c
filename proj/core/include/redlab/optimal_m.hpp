#pragma once

#include <optional>
#include <vector>

#include "redlab/codecs.hpp"
#include "redlab/eval.hpp"
#include "redlab/family.hpp"

namespace redlab {

enum class MCriterion {
    MinimaxOverGrid,  // minimize the maximum redundancy over a theta set
    ExpectedAt,       // minimize the expected redundancy at one theta
};

struct OptimalMOptions {
    int m_min = 1;
    int m_max = 8;  // at most 20
    /// theta set for MinimaxOverGrid; defaults to default_theta_set(family).
    std::optional<std::vector<ParamVector>> theta_set;
    /// Required for ExpectedAt.
    std::optional<ParamVector> theta;
    EvalOptions eval;
};

struct OptimalM {
    int m = 0;
    double achieved = 0.0;               // bits at m
    std::vector<double> per_m;           // value for m_min .. m_max
};

/// Searches m in [m_min, m_max] using exact type-class evaluation; ties go
/// to the smaller m. Throws ConfigError when no m is feasible.
OptimalM optimal_m(const ParamFamily& family, std::int64_t n, MCriterion criterion, ModelKind kind,
                   const OptimalMOptions& opts = {});

/// Interior evaluation set for minimax searches: for Bernoulli sources the
/// 99 points 0.01, ..., 0.99; otherwise the points of a 6-bit estimate grid.
std::vector<ParamVector> default_theta_set(const ParamFamily& family);

/// Uniform interior Bernoulli grid with the given spacing and margin.
std::vector<ParamVector> bernoulli_theta_grid(double spacing = 0.01, double margin = 0.01);

}  // namespace redlab
