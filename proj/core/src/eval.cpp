#include "redlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "redlab/error.hpp"
#include "redlab/optimal_m.hpp"
#include "redlab/rng.hpp"

namespace redlab {

std::string to_string(EstimateMode mode) { return mode == EstimateMode::Exact ? "exact" : "monte_carlo"; }

ExactEvaluator::ExactEvaluator(const LengthModel& model, std::shared_ptr<const TypeClassSet> classes)
    : classes_(std::move(classes)), n_(model.n()) {
    if (!classes_) throw ConfigError("exact evaluator needs type classes");
    if (classes_->n() != model.n() || !(classes_->family() == model.family()))
        throw ConfigError("type classes do not match the model's family and length");
    lengths_.reserve(classes_->size());
    for (const auto& cls : classes_->classes()) lengths_.push_back(model.class_length(cls.stats));
}

double ExactEvaluator::expected_length(const ParamVector& theta) const {
    const LogTable table(theta);
    double acc = 0.0;
    for (std::size_t i = 0; i < lengths_.size(); ++i) {
        const auto& cls = (*classes_)[i];
        const double log_mass = cls.log_count + class_log2_prob(theta.family(), table, cls.stats) * std::numbers::ln2;
        const double mass = std::exp(log_mass);
        if (mass == 0.0) continue;
        acc += mass * lengths_[i];
    }
    return acc;
}

double ExactEvaluator::redundancy(const ParamVector& theta) const {
    return expected_length(theta) - entropy_n(theta, n_);
}

namespace {

RedundancyEstimate monte_carlo_redundancy(const ParamVector& theta, const LengthModel& model, const EvalOptions& opts) {
    if (opts.mc_samples < 2) throw ConfigError("Monte Carlo needs at least 2 samples");
    Rng rng(opts.seed);
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t s = 0; s < opts.mc_samples; ++s) {
        const auto x = sample_sequence(theta, model.n(), rng);
        // Pointwise redundancy l(x) - log2(1/mu_theta(x)); its mean is R_n.
        const double v = model.length(x) + seq_log_prob(theta, x);
        sum += v;
        sum_sq += v * v;
    }
    const double ns = static_cast<double>(opts.mc_samples);
    const double mean = sum / ns;
    const double var = std::max(0.0, sum_sq / ns - mean * mean) * ns / (ns - 1.0);
    // A zero-variance sample still carries sampling uncertainty; report a
    // strictly positive SE.
    const double se = std::max(std::sqrt(var / ns), 1e-300);
    return {mean, EstimateMode::MonteCarlo, se, opts.mc_samples, opts.seed};
}

}  // namespace

RedundancyEstimate expected_redundancy(const ParamVector& theta, const LengthModel& model, const EvalOptions& opts) {
    if (!(theta.family() == model.family())) throw ConfigError("parameter and model families differ");

    std::shared_ptr<const TypeClassSet> classes;
    if (model.kind() == ModelKind::CondTwoStage && model.partition().classes() != nullptr) {
        classes = std::shared_ptr<const TypeClassSet>(std::shared_ptr<const TypeClassSet>{}, model.partition().classes());
        // Aliasing pointer: the partition outlives this call.
    } else if (TypeClassSet::class_count_estimate(model.family(), model.n()) <= 4.0 * static_cast<double>(opts.max_classes)) {
        try {
            classes = std::make_shared<const TypeClassSet>(TypeClassSet::enumerate(model.family(), model.n(), opts.max_classes));
        } catch (const IntractableError&) {
            classes.reset();
        }
    }
    if (classes && classes->size() <= opts.max_classes) {
        ExactEvaluator evaluator(model, classes);
        return {evaluator.redundancy(theta), EstimateMode::Exact, 0.0, classes->size(), 0};
    }
    if (!opts.allow_monte_carlo)
        throw IntractableError("exact evaluation exceeds the type-class budget and Monte Carlo is disabled");
    return monte_carlo_redundancy(theta, model, opts);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    threads = std::max(1u, threads);
    if (threads == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(threads, count));
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers) body(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) throw ConfigError("Wilson interval needs at least one trial");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0), half};
}

namespace {

// Redundancies within this of R0 count as reaching it, so that exact zeros
// computed as -1e-16 still satisfy R >= 0.
constexpr double kLevelTolerance = 1e-9;

}  // namespace

EmpiricalPoint EmpiricalCurve::at(double r0) const {
    const auto hits = static_cast<std::uint64_t>(
        std::count_if(redundancies.begin(), redundancies.end(), [r0](double r) { return r >= r0 - kLevelTolerance; }));
    const auto total = static_cast<std::uint64_t>(redundancies.size());
    const auto ci = wilson_interval(hits, total);
    return {r0, static_cast<double>(hits) / static_cast<double>(total), ci.halfwidth, ci.lower, ci.upper};
}

EmpiricalCurve empirical_curve(const ParamFamily& family, std::int64_t n, ModelKind kind,
                               std::uint64_t theta_samples, std::uint64_t seed, std::span<const double> r0_grid,
                               const EmpiricalOptions& opts) {
    if (theta_samples < 100) throw ConfigError("empirical curves need at least 100 parameter samples");
    if (kind == ModelKind::IdealTheta) throw ConfigError("the ideal code is not universal; pick a universal model");

    EmpiricalCurve curve;
    curve.family = family.to_string();
    curve.n = n;
    curve.kind = kind;
    curve.theta_samples = theta_samples;
    curve.seed = seed;

    std::optional<LengthModel> model;
    if (kind == ModelKind::JeffreysMixture) {
        model.emplace(LengthModel::mixture(family, n));
    } else {
        if (opts.m) {
            curve.m = *opts.m;
        } else {
            OptimalMOptions mo;
            mo.m_max = opts.m_max;
            mo.eval = opts.eval;
            curve.m = optimal_m(family, n, MCriterion::MinimaxOverGrid, kind, mo).m;
        }
        auto grid = std::make_shared<const EstimateGrid>(EstimateGrid::build(family, curve.m));
        if (kind == ModelKind::TwoStage) {
            model.emplace(LengthModel::two_stage(grid, n));
        } else {
            model.emplace(LengthModel::cond_two_stage(
                std::make_shared<const Partition>(Partition::build(grid, n, opts.eval.max_classes))));
        }
    }

    std::optional<ExactEvaluator> exact;
    try {
        exact.emplace(*model,
                      std::make_shared<const TypeClassSet>(TypeClassSet::enumerate(family, n, opts.eval.max_classes)));
    } catch (const IntractableError&) {
        if (!opts.eval.allow_monte_carlo) throw;
    }

    const JeffreysSampler sampler(family);
    curve.redundancies.assign(static_cast<std::size_t>(theta_samples), 0.0);
    parallel_for(static_cast<std::size_t>(theta_samples), opts.threads, [&](std::size_t j) {
        Rng rng(derive_seed(seed, j));
        const auto theta = sampler.draw(rng);
        if (exact) {
            curve.redundancies[j] = exact->redundancy(theta);
        } else {
            EvalOptions eo = opts.eval;
            eo.seed = derive_seed(seed ^ 0xa5a5a5a5a5a5a5a5ULL, j);
            curve.redundancies[j] = expected_redundancy(theta, *model, eo).value;
        }
    });

    for (double r0 : r0_grid) curve.points.push_back(curve.at(r0));
    return curve;
}

}  // namespace redlab
