#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "redlab/family.hpp"
#include "redlab/grid.hpp"
#include "redlab/type_classes.hpp"

namespace redlab {

struct MlEstimate {
    std::size_t index = 0;
    double log2_likelihood = 0.0;
};

/// Maximum-likelihood grid point for sufficient statistics. Ties (equal
/// log-likelihood within a relative 1e-12) go to the lowest index.
MlEstimate ml_index(const EstimateGrid& grid, std::span<const std::uint32_t> stats);

/// Maximum-likelihood grid point for a sequence; same tie-breaking.
MlEstimate ml_estimate(std::span<const Symbol> x, const EstimateGrid& grid);
MlEstimate ml_estimate(const SequenceSample& x, const EstimateGrid& grid);

/// Shannon-ideal length under a known parameter, log2(1 / mu_theta(x)).
double ideal_length(const ParamVector& theta, std::span<const Symbol> x);

/// m + log2(1 / mu_gamma(x)), gamma the ML grid point.
double two_stage_length(std::span<const Symbol> x, const EstimateGrid& grid);

/// The cells S_m(gamma) of sequences whose ML grid point is gamma, and their
/// masses A_m(gamma) = sum over the cell of mu_gamma(x).
class Partition {
public:
    /// Exact construction over type classes.
    static Partition build(std::shared_ptr<const EstimateGrid> grid, std::int64_t n,
                           std::size_t max_classes = kDefaultMaxClasses);

    /// Monte Carlo estimate of each A_m(gamma) from `samples_per_point`
    /// sequences drawn from mu_gamma. For instances too large for `build`.
    static Partition estimate(std::shared_ptr<const EstimateGrid> grid, std::int64_t n,
                              std::uint64_t samples_per_point, std::uint64_t seed);

    /// Rebuilds a partition from stored masses (cache files).
    static Partition from_masses(std::shared_ptr<const EstimateGrid> grid, std::int64_t n,
                                 std::vector<double> masses, bool exact);

    const EstimateGrid& grid() const noexcept { return *grid_; }
    std::shared_ptr<const EstimateGrid> grid_ptr() const noexcept { return grid_; }
    std::int64_t n() const noexcept { return n_; }
    bool exact() const noexcept { return exact_; }

    /// A_m(gamma) for grid index i.
    double mass(std::size_t i) const { return masses_.at(i); }
    const std::vector<double>& masses() const noexcept { return masses_; }
    /// Standard error of mass(i); zero when exact.
    double mass_se(std::size_t i) const { return exact_ ? 0.0 : ses_.at(i); }

    /// Type classes and their cells; empty unless built exactly with build().
    const TypeClassSet* classes() const noexcept { return classes_ ? &*classes_ : nullptr; }
    std::size_t cell_of_class(std::size_t class_index) const { return cell_of_.at(class_index); }
    /// Indices (into classes()) of the type classes forming cell i.
    std::vector<std::size_t> members(std::size_t i) const;

private:
    Partition() = default;

    std::shared_ptr<const EstimateGrid> grid_;
    std::int64_t n_ = 0;
    bool exact_ = true;
    std::vector<double> masses_;
    std::vector<double> ses_;
    std::optional<TypeClassSet> classes_;
    std::vector<std::size_t> cell_of_;
};

/// m + log2(A_m(gamma) / mu_gamma(x)).
double cond_two_stage_length(std::span<const Symbol> x, const Partition& partition);

/// Jeffreys-mixture (add-1/2) code length computed sequentially. Markov
/// sequences code their first symbol with a state-free k-ary predictor.
double mixture_length(const ParamFamily& family, std::span<const Symbol> x);
/// Same length in closed form from sufficient statistics.
double mixture_length_from_stats(const ParamFamily& family, std::span<const std::uint32_t> stats);

enum class ModelKind { IdealTheta, TwoStage, CondTwoStage, JeffreysMixture };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// An evaluable code length function on sequences of length n, in bits.
class LengthModel {
public:
    static LengthModel ideal(ParamVector theta, std::int64_t n);
    static LengthModel two_stage(std::shared_ptr<const EstimateGrid> grid, std::int64_t n);
    static LengthModel cond_two_stage(std::shared_ptr<const Partition> partition);
    static LengthModel mixture(const ParamFamily& family, std::int64_t n);

    ModelKind kind() const noexcept { return kind_; }
    const ParamFamily& family() const noexcept { return family_; }
    std::int64_t n() const noexcept { return n_; }

    const ParamVector& theta() const;
    const EstimateGrid& grid() const;
    std::shared_ptr<const EstimateGrid> grid_ptr() const;
    const Partition& partition() const;

    /// Length of a sequence; x must have length n.
    double length(std::span<const Symbol> x) const;
    /// Length of any member of a type class.
    double class_length(std::span<const std::uint32_t> stats) const;

private:
    LengthModel(ModelKind kind, ParamFamily family, std::int64_t n) : kind_(kind), family_(family), n_(n) {}

    ModelKind kind_;
    ParamFamily family_;
    std::int64_t n_;
    std::optional<ParamVector> theta_;
    std::shared_ptr<const EstimateGrid> grid_;
    std::shared_ptr<const Partition> partition_;
};

}  // namespace redlab
