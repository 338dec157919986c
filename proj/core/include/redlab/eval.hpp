#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "redlab/codecs.hpp"
#include "redlab/family.hpp"
#include "redlab/type_classes.hpp"

namespace redlab {

enum class EstimateMode { Exact, MonteCarlo };

std::string to_string(EstimateMode mode);

/// Expected redundancy R_n(l, theta) = E l(X^n) - H_n(theta), bits.
struct RedundancyEstimate {
    double value = 0.0;
    EstimateMode mode = EstimateMode::Exact;
    double se = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

struct EvalOptions {
    /// Largest type-class count evaluated exactly.
    std::size_t max_classes = kDefaultMaxClasses;
    bool allow_monte_carlo = true;
    std::uint64_t mc_samples = 10000;
    std::uint64_t seed = 1;
};

/// Exact expected lengths of one model over many parameters: the model's
/// per-class lengths are computed once and reused.
class ExactEvaluator {
public:
    ExactEvaluator(const LengthModel& model, std::shared_ptr<const TypeClassSet> classes);

    /// E_theta l(X^n), bits.
    double expected_length(const ParamVector& theta) const;
    /// expected_length(theta) - H_n(theta).
    double redundancy(const ParamVector& theta) const;

    const TypeClassSet& classes() const noexcept { return *classes_; }

private:
    std::shared_ptr<const TypeClassSet> classes_;
    std::vector<double> lengths_;
    std::int64_t n_;
};

/// Exact over type classes when their count fits the budget, otherwise
/// Monte Carlo over sequences drawn from theta (if permitted).
RedundancyEstimate expected_redundancy(const ParamVector& theta, const LengthModel& model,
                                       const EvalOptions& opts = {});

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
/// must write only its own output slot.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

struct WilsonInterval {
    double lower = 0.0;
    double upper = 0.0;
    double halfwidth = 0.0;
};

/// Wilson score interval for `successes` out of `trials` at normal quantile z.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

struct EmpiricalPoint {
    double r0 = 0.0;
    double fraction = 0.0;
    double ci_halfwidth = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
};

/// Fraction of Jeffreys-sampled sources whose expected redundancy is at
/// least R0, as a function of R0.
struct EmpiricalCurve {
    std::string family;
    std::int64_t n = 0;
    ModelKind kind = ModelKind::CondTwoStage;
    int m = 0;  // grid bits for two-stage kinds
    std::uint64_t theta_samples = 0;
    std::uint64_t seed = 0;
    std::vector<double> redundancies;  // one per sampled theta, in sample order
    std::vector<EmpiricalPoint> points;

    /// Exceedance fraction and Wilson interval at an arbitrary level.
    EmpiricalPoint at(double r0) const;
};

struct EmpiricalOptions {
    unsigned threads = 1;
    /// Fixed grid bits for two-stage kinds; when empty, the minimax-optimal m
    /// over [1, m_max] is used.
    std::optional<int> m;
    int m_max = 8;
    EvalOptions eval;
};

/// Samples theta_j from Jeffreys' prior (sub-seed j of `seed`), evaluates
/// the code's expected redundancy at each, and tabulates exceedance
/// fractions over r0_grid. Requires theta_samples >= 100.
EmpiricalCurve empirical_curve(const ParamFamily& family, std::int64_t n, ModelKind kind,
                               std::uint64_t theta_samples, std::uint64_t seed, std::span<const double> r0_grid,
                               const EmpiricalOptions& opts = {});

}  // namespace redlab
