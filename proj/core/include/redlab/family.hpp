#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "redlab/rng.hpp"

namespace redlab {

using Symbol = std::uint16_t;

enum class SourceKind { Memoryless, Markov1 };

/// A smooth parametric source family over the alphabet {0, ..., k-1}.
///
/// Memoryless sources have d = k - 1 free parameters; first-order Markov
/// sources have one probability row per state, d = k (k - 1).
class ParamFamily {
public:
    static ParamFamily memoryless(int k);
    static ParamFamily markov1(int k);

    /// Parses the `kind:k` micro-grammar, e.g. "memoryless:3", "markov1:2".
    static ParamFamily parse(std::string_view spec);

    SourceKind kind() const noexcept { return kind_; }
    int alphabet_size() const noexcept { return k_; }
    /// Number of free parameters.
    std::int64_t dimension() const noexcept;
    /// Number of probability rows: 1 for memoryless, k for Markov.
    int rows() const noexcept { return kind_ == SourceKind::Memoryless ? 1 : k_; }

    std::string to_string() const;

    friend bool operator==(const ParamFamily&, const ParamFamily&) = default;

private:
    ParamFamily(SourceKind kind, int k);

    SourceKind kind_;
    int k_;
};

inline constexpr double kDefaultInteriorEta = 1e-9;

/// A point theta of the parameter space: one probability vector (memoryless)
/// or a row-stochastic transition matrix stored row-major (Markov).
///
/// Free coordinates are the entries for symbols 1..k-1 of each row; the
/// entry for symbol 0 is implied. With k = 2 the free coordinate is the
/// Bernoulli parameter P(1).
class ParamVector {
public:
    /// Validates ranges and row sums (1e-12). Markov vectors compute and
    /// cache their stationary distribution.
    ParamVector(ParamFamily family, std::vector<double> probs);

    /// Memoryless k = 2 with P(1) = theta.
    static ParamVector bernoulli(double theta);

    const ParamFamily& family() const noexcept { return family_; }
    int alphabet_size() const noexcept { return family_.alphabet_size(); }

    std::span<const double> probs() const noexcept { return probs_; }
    /// Row `r` (always 0 for memoryless).
    std::span<const double> row(int r) const;
    double prob(int row_index, Symbol s) const;

    /// Distribution of the first symbol: theta itself for memoryless, the
    /// stationary distribution for Markov.
    std::span<const double> initial() const noexcept;
    /// Stationary distribution (Markov); equals probs for memoryless.
    std::span<const double> stationary() const noexcept { return initial(); }

    bool is_interior(double eta = kDefaultInteriorEta) const noexcept;

    /// Free coordinates, row by row.
    std::vector<double> free_coordinates() const;
    /// Inverse of free_coordinates(); the symbol-0 entry of each row is implied.
    static ParamVector from_free(const ParamFamily& family, std::span<const double> free);

private:
    ParamFamily family_;
    std::vector<double> probs_;
    std::vector<double> stationary_;
};

/// Stationary distribution of a k x k row-stochastic matrix (row-major).
/// Uses a direct linear solve; reducible chains fall back to the Cesaro
/// average of the chain started from the uniform distribution.
std::vector<double> stationary_distribution(std::span<const double> matrix, int k);

/// A sequence x^n together with its family.
struct SequenceSample {
    ParamFamily family;
    std::vector<Symbol> symbols;

    SequenceSample(ParamFamily f, std::vector<Symbol> s);
    std::size_t size() const noexcept { return symbols.size(); }
};

/// log2 mu_theta(x^n), <= 0. Returns -infinity when some symbol has zero
/// probability. Markov sequences start from the stationary distribution.
double seq_log_prob(const ParamVector& theta, std::span<const Symbol> x);
double seq_log_prob(const ParamVector& theta, const SequenceSample& x);

/// Draws x^n from mu_theta (Markov: stationary start).
std::vector<Symbol> sample_sequence(const ParamVector& theta, std::int64_t n, Rng& rng);

/// Entropy of a probability vector in bits.
double entropy_bits(std::span<const double> p);

/// H_n(theta) in bits, closed form.
double entropy_n(const ParamVector& theta, std::int64_t n);

/// Per-symbol limit Fisher information matrix I(theta), d x d, natural units.
/// Throws SingularityError if theta is not interior.
Eigen::MatrixXd fisher_info(const ParamVector& theta, double eta = kDefaultInteriorEta);

/// sqrt(det I(theta)) computed from the closed-form product, without
/// forming the matrix.
double sqrt_det_fisher(const ParamVector& theta);

enum class IntegralSource { ClosedForm, MonteCarlo, Approximate };

std::string to_string(IntegralSource src);

/// The normalizing constant of the Jeffreys prior, integral of
/// sqrt(det I) over the parameter space.
struct JeffreysIntegral {
    double value = 0.0;        // may underflow for huge families; see log2_value
    double log2_value = 0.0;
    double rel_se = 0.0;       // relative standard error; 0 for closed form
    std::uint64_t samples = 0;
    IntegralSource source = IntegralSource::ClosedForm;
};

struct IntegralOptions {
    std::uint64_t seed = 0x5eed;
    double target_rel_se = 0.005;
    std::uint64_t min_samples = 20000;
    std::uint64_t max_samples = 20'000'000;
    /// Upper bound on estimated floating-point work (samples * k^3).
    double work_budget = 2e10;
};

/// Memoryless: pi^{k/2} / Gamma(k/2). Markov: importance sampling with
/// Dirichlet(1/2) rows, sampled until the relative SE reaches the target.
/// Throws IntractableError when the budget cannot meet the target.
JeffreysIntegral jeffreys_integral(const ParamFamily& family, const IntegralOptions& opts = {});

/// Closed-form upper bound on log2 of the Jeffreys integral. Exact for
/// memoryless families. For Markov families it bounds the stationary factor
/// prod_i pi_i^{(k-1)/2} by its value at the uniform distribution, which is
/// tight to leading order for large k and stays finite where Monte Carlo
/// is out of reach.
double jeffreys_log2_integral_upper_bound(const ParamFamily& family);

/// Jeffreys-prior sampler. Memoryless draws are exact Dirichlet(1/2); Markov
/// draws use rejection from independent Dirichlet(1/2) rows with acceptance
/// probability prod_i pi_i^{(k-1)/2}.
class JeffreysSampler {
public:
    explicit JeffreysSampler(ParamFamily family, std::uint64_t max_attempts = 1'000'000);

    /// Throws IntractableError (with acceptance diagnostics) when
    /// max_attempts proposals are all rejected.
    ParamVector draw(Rng& rng) const;

    const ParamFamily& family() const noexcept { return family_; }

private:
    ParamFamily family_;
    std::uint64_t max_attempts_;
};

/// One Jeffreys draw, deterministic in `seed`.
ParamVector sample_jeffreys(const ParamFamily& family, std::uint64_t seed);

}  // namespace redlab
