#include "redlab/optimal_m.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "redlab/error.hpp"
#include "redlab/grid.hpp"

namespace redlab {

std::vector<ParamVector> bernoulli_theta_grid(double spacing, double margin) {
    if (!(spacing > 0.0) || !(margin > 0.0) || margin >= 0.5) throw ConfigError("invalid Bernoulli grid");
    std::vector<ParamVector> out;
    const auto steps = static_cast<int>(std::floor((1.0 - 2.0 * margin) / spacing + 1e-9));
    for (int i = 0; i <= steps; ++i) out.push_back(ParamVector::bernoulli(margin + spacing * i));
    return out;
}

std::vector<ParamVector> default_theta_set(const ParamFamily& family) {
    if (family.kind() == SourceKind::Memoryless && family.alphabet_size() == 2) return bernoulli_theta_grid();
    return EstimateGrid::build(family, 6).points();
}

OptimalM optimal_m(const ParamFamily& family, std::int64_t n, MCriterion criterion, ModelKind kind,
                   const OptimalMOptions& opts) {
    if (kind != ModelKind::TwoStage && kind != ModelKind::CondTwoStage)
        throw ConfigError("optimal m applies to two-stage codes only");
    if (opts.m_min < 0 || opts.m_max > 20 || opts.m_min > opts.m_max) throw ConfigError("m range must lie in [0, 20]");
    if (criterion == MCriterion::ExpectedAt && !opts.theta) throw ConfigError("ExpectedAt needs a parameter");

    std::vector<ParamVector> thetas;
    if (criterion == MCriterion::ExpectedAt) {
        thetas.push_back(*opts.theta);
    } else {
        thetas = opts.theta_set ? *opts.theta_set : default_theta_set(family);
        if (thetas.empty()) throw ConfigError("empty parameter set");
    }
    for (const auto& t : thetas)
        if (!(t.family() == family)) throw ConfigError("parameter family differs from the search family");

    const auto classes =
        std::make_shared<const TypeClassSet>(TypeClassSet::enumerate(family, n, opts.eval.max_classes));

    OptimalM best;
    best.achieved = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int m = opts.m_min; m <= opts.m_max; ++m) {
        double value = std::numeric_limits<double>::quiet_NaN();
        try {
            auto grid = std::make_shared<const EstimateGrid>(EstimateGrid::build(family, m));
            std::optional<LengthModel> model;
            if (kind == ModelKind::TwoStage) {
                model.emplace(LengthModel::two_stage(grid, n));
            } else {
                model.emplace(LengthModel::cond_two_stage(
                    std::make_shared<const Partition>(Partition::build(grid, n, opts.eval.max_classes))));
            }
            const ExactEvaluator evaluator(*model, classes);
            value = -std::numeric_limits<double>::infinity();
            for (const auto& t : thetas) value = std::max(value, evaluator.redundancy(t));
        } catch (const IntractableError&) {
            value = std::numeric_limits<double>::quiet_NaN();
        }
        best.per_m.push_back(value);
        if (std::isnan(value)) continue;
        any = true;
        if (value < best.achieved) {
            best.achieved = value;
            best.m = m;
        }
    }
    if (!any) throw ConfigError("no grid size in the requested range is feasible");
    return best;
}

}  // namespace redlab
