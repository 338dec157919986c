#include "redlab/codecs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "redlab/error.hpp"
#include "redlab/rng.hpp"

namespace redlab {

namespace {

constexpr double kTieRelTolerance = 1e-12;

bool strictly_better(double candidate, double best) {
    if (best == -std::numeric_limits<double>::infinity()) return candidate > best;
    return candidate > best + kTieRelTolerance * std::max(1.0, std::abs(best));
}

void check_length(std::span<const Symbol> x, std::int64_t n) {
    if (static_cast<std::int64_t>(x.size()) != n)
        throw ConfigError("sequence length " + std::to_string(x.size()) + " does not match model length " +
                          std::to_string(n));
}

double log2_gamma(double x) { return std::lgamma(x) * std::numbers::log2e; }

// log2 of the add-1/2 block probability of one count vector.
double kt_block_log2(std::span<const std::uint32_t> counts) {
    const double k = static_cast<double>(counts.size());
    double total = 0.0;
    double acc = log2_gamma(0.5 * k) - k * log2_gamma(0.5);
    for (auto c : counts) {
        acc += log2_gamma(static_cast<double>(c) + 0.5);
        total += c;
    }
    return acc - log2_gamma(total + 0.5 * k);
}

}  // namespace

MlEstimate ml_index(const EstimateGrid& grid, std::span<const std::uint32_t> stats) {
    MlEstimate best{0, -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ll = class_log2_prob(grid.family(), grid.log_table(i), stats);
        if (i == 0 || strictly_better(ll, best.log2_likelihood)) best = {i, ll};
    }
    return best;
}

MlEstimate ml_estimate(std::span<const Symbol> x, const EstimateGrid& grid) {
    return ml_index(grid, sufficient_stats(grid.family(), x));
}

MlEstimate ml_estimate(const SequenceSample& x, const EstimateGrid& grid) {
    if (!(x.family == grid.family())) throw ConfigError("sequence and grid families differ");
    return ml_estimate(x.symbols, grid);
}

double ideal_length(const ParamVector& theta, std::span<const Symbol> x) { return -seq_log_prob(theta, x); }

double two_stage_length(std::span<const Symbol> x, const EstimateGrid& grid) {
    const auto est = ml_estimate(x, grid);
    return static_cast<double>(grid.bits()) - est.log2_likelihood;
}

Partition Partition::build(std::shared_ptr<const EstimateGrid> grid, std::int64_t n, std::size_t max_classes) {
    if (!grid) throw ConfigError("partition needs a grid");
    Partition p;
    p.grid_ = std::move(grid);
    p.n_ = n;
    p.exact_ = true;
    p.classes_.emplace(TypeClassSet::enumerate(p.grid_->family(), n, max_classes));
    p.masses_.assign(p.grid_->size(), 0.0);
    p.cell_of_.reserve(p.classes_->size());
    for (const auto& cls : p.classes_->classes()) {
        const auto est = ml_index(*p.grid_, cls.stats);
        p.cell_of_.push_back(est.index);
        p.masses_[est.index] += std::exp(cls.log_count + est.log2_likelihood * std::numbers::ln2);
    }
    // A cell can at most hold all of mu_gamma's mass.
    for (auto& a : p.masses_) a = std::min(a, 1.0);
    return p;
}

Partition Partition::estimate(std::shared_ptr<const EstimateGrid> grid, std::int64_t n,
                              std::uint64_t samples_per_point, std::uint64_t seed) {
    if (!grid) throw ConfigError("partition needs a grid");
    if (samples_per_point < 2) throw ConfigError("Monte Carlo partition needs at least 2 samples per point");
    Partition p;
    p.grid_ = std::move(grid);
    p.n_ = n;
    p.exact_ = false;
    p.masses_.assign(p.grid_->size(), 0.0);
    p.ses_.assign(p.grid_->size(), 0.0);
    const double ns = static_cast<double>(samples_per_point);
    for (std::size_t i = 0; i < p.grid_->size(); ++i) {
        Rng rng(derive_seed(seed, i));
        std::uint64_t hits = 0;
        for (std::uint64_t s = 0; s < samples_per_point; ++s) {
            const auto x = sample_sequence(p.grid_->point(i), n, rng);
            if (ml_estimate(x, *p.grid_).index == i) ++hits;
        }
        const double a = static_cast<double>(hits) / ns;
        p.masses_[i] = a;
        p.ses_[i] = std::sqrt(a * (1.0 - a) / ns);
    }
    return p;
}

Partition Partition::from_masses(std::shared_ptr<const EstimateGrid> grid, std::int64_t n, std::vector<double> masses,
                                 bool exact) {
    if (!grid) throw ConfigError("partition needs a grid");
    if (masses.size() != grid->size()) throw ConfigError("partition mass count does not match grid size");
    for (double a : masses)
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("partition mass out of [0,1]");
    Partition p;
    p.grid_ = std::move(grid);
    p.n_ = n;
    p.exact_ = exact;
    p.masses_ = std::move(masses);
    if (!exact) p.ses_.assign(p.masses_.size(), 0.0);
    return p;
}

std::vector<std::size_t> Partition::members(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < cell_of_.size(); ++c)
        if (cell_of_[c] == i) out.push_back(c);
    return out;
}

namespace {

double cond_length_from_estimate(const MlEstimate& est, const Partition& partition) {
    // Estimated masses can undershoot the sequence's own probability.
    const double a = std::max(partition.mass(est.index), std::exp2(est.log2_likelihood));
    return static_cast<double>(partition.grid().bits()) + std::log2(a) - est.log2_likelihood;
}

}  // namespace

double cond_two_stage_length(std::span<const Symbol> x, const Partition& partition) {
    check_length(x, partition.n());
    return cond_length_from_estimate(ml_estimate(x, partition.grid()), partition);
}

double mixture_length(const ParamFamily& family, std::span<const Symbol> x) {
    const auto k = static_cast<std::size_t>(family.alphabet_size());
    const double half_k = 0.5 * static_cast<double>(k);
    const bool markov = family.kind() == SourceKind::Markov1;
    std::vector<std::uint32_t> counts(markov ? k * k : k, 0);
    std::vector<std::uint32_t> totals(markov ? k : 1, 0);
    double bits = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (markov && t == 0) {
            bits += std::log2(static_cast<double>(k));
            continue;
        }
        const std::size_t state = markov ? x[t - 1] : 0;
        const double num = static_cast<double>(counts[state * k + x[t]]) + 0.5;
        const double den = static_cast<double>(totals[state]) + half_k;
        bits -= std::log2(num / den);
        ++counts[state * k + x[t]];
        ++totals[state];
    }
    return bits;
}

double mixture_length_from_stats(const ParamFamily& family, std::span<const std::uint32_t> stats) {
    const auto k = static_cast<std::size_t>(family.alphabet_size());
    if (family.kind() == SourceKind::Memoryless) return -kt_block_log2(stats);
    double bits = std::log2(static_cast<double>(k));
    for (std::size_t r = 0; r < k; ++r) bits -= kt_block_log2(stats.subspan(1 + r * k, k));
    return bits;
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::IdealTheta: return "ideal";
        case ModelKind::TwoStage: return "two_stage";
        case ModelKind::CondTwoStage: return "cond_two_stage";
        case ModelKind::JeffreysMixture: return "mixture";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "ideal") return ModelKind::IdealTheta;
    if (name == "two_stage" || name == "two-stage" || name == "2p") return ModelKind::TwoStage;
    if (name == "cond_two_stage" || name == "cond-two-stage" || name == "c2p") return ModelKind::CondTwoStage;
    if (name == "mixture" || name == "jeffreys" || name == "kt") return ModelKind::JeffreysMixture;
    throw ConfigError("unknown model kind '" + name + "'");
}

LengthModel LengthModel::ideal(ParamVector theta, std::int64_t n) {
    if (n < 1) throw ConfigError("sequence length must be >= 1");
    LengthModel m(ModelKind::IdealTheta, theta.family(), n);
    m.theta_.emplace(std::move(theta));
    return m;
}

LengthModel LengthModel::two_stage(std::shared_ptr<const EstimateGrid> grid, std::int64_t n) {
    if (!grid) throw ConfigError("two-stage model needs a grid");
    if (n < 1) throw ConfigError("sequence length must be >= 1");
    LengthModel m(ModelKind::TwoStage, grid->family(), n);
    m.grid_ = std::move(grid);
    return m;
}

LengthModel LengthModel::cond_two_stage(std::shared_ptr<const Partition> partition) {
    if (!partition) throw ConfigError("conditional two-stage model needs a partition");
    LengthModel m(ModelKind::CondTwoStage, partition->grid().family(), partition->n());
    m.grid_ = partition->grid_ptr();
    m.partition_ = std::move(partition);
    return m;
}

LengthModel LengthModel::mixture(const ParamFamily& family, std::int64_t n) {
    if (n < 1) throw ConfigError("sequence length must be >= 1");
    return LengthModel(ModelKind::JeffreysMixture, family, n);
}

const ParamVector& LengthModel::theta() const {
    if (!theta_) throw ConfigError("model has no fixed parameter");
    return *theta_;
}

const EstimateGrid& LengthModel::grid() const {
    if (!grid_) throw ConfigError("model has no estimate grid");
    return *grid_;
}

std::shared_ptr<const EstimateGrid> LengthModel::grid_ptr() const { return grid_; }

const Partition& LengthModel::partition() const {
    if (!partition_) throw ConfigError("model has no partition");
    return *partition_;
}

double LengthModel::length(std::span<const Symbol> x) const {
    check_length(x, n_);
    switch (kind_) {
        case ModelKind::IdealTheta: return ideal_length(*theta_, x);
        case ModelKind::TwoStage: return two_stage_length(x, *grid_);
        case ModelKind::CondTwoStage: return cond_two_stage_length(x, *partition_);
        case ModelKind::JeffreysMixture: return mixture_length(family_, x);
    }
    throw InvariantError("unhandled model kind");
}

double LengthModel::class_length(std::span<const std::uint32_t> stats) const {
    switch (kind_) {
        case ModelKind::IdealTheta: return -class_log2_prob(*theta_, stats);
        case ModelKind::TwoStage: {
            const auto est = ml_index(*grid_, stats);
            return static_cast<double>(grid_->bits()) - est.log2_likelihood;
        }
        case ModelKind::CondTwoStage: return cond_length_from_estimate(ml_index(*grid_, stats), *partition_);
        case ModelKind::JeffreysMixture: return mixture_length_from_stats(family_, stats);
    }
    throw InvariantError("unhandled model kind");
}

}  // namespace redlab
