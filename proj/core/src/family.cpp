#include "redlab/family.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "redlab/error.hpp"

namespace redlab {

namespace {

constexpr double kRowSumTolerance = 1e-12;

}  // namespace

ParamFamily::ParamFamily(SourceKind kind, int k) : kind_(kind), k_(k) {
    if (k < 2) throw ConfigError("alphabet size must be >= 2, got " + std::to_string(k));
    if (k > 65535) throw ConfigError("alphabet size too large: " + std::to_string(k));
}

ParamFamily ParamFamily::memoryless(int k) { return ParamFamily(SourceKind::Memoryless, k); }
ParamFamily ParamFamily::markov1(int k) { return ParamFamily(SourceKind::Markov1, k); }

ParamFamily ParamFamily::parse(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos)
        throw ConfigError("family spec must look like 'memoryless:3' or 'markov1:2', got '" +
                          std::string(spec) + "'");
    const auto name = spec.substr(0, colon);
    const auto digits = spec.substr(colon + 1);
    int k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || ptr != digits.data() + digits.size())
        throw ConfigError("invalid alphabet size in family spec '" + std::string(spec) + "'");
    if (name == "memoryless") return memoryless(k);
    if (name == "markov1") return markov1(k);
    throw ConfigError("unknown family kind '" + std::string(name) + "'");
}

std::int64_t ParamFamily::dimension() const noexcept {
    const std::int64_t k = k_;
    return kind_ == SourceKind::Memoryless ? k - 1 : k * (k - 1);
}

std::string ParamFamily::to_string() const {
    return (kind_ == SourceKind::Memoryless ? "memoryless:" : "markov1:") + std::to_string(k_);
}

ParamVector::ParamVector(ParamFamily family, std::vector<double> probs)
    : family_(family), probs_(std::move(probs)) {
    const int k = family_.alphabet_size();
    const auto expected = static_cast<std::size_t>(family_.rows()) * static_cast<std::size_t>(k);
    if (probs_.size() != expected)
        throw ConfigError("parameter vector for " + family_.to_string() + " needs " +
                          std::to_string(expected) + " probabilities, got " +
                          std::to_string(probs_.size()));
    for (int r = 0; r < family_.rows(); ++r) {
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            const double p = probs_[static_cast<std::size_t>(r * k + j)];
            if (!(p >= 0.0 && p <= 1.0))
                throw ConfigError("probability out of [0,1] in row " + std::to_string(r));
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance)
            throw ConfigError("row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
    if (family_.kind() == SourceKind::Markov1) stationary_ = stationary_distribution(probs_, k);
}

ParamVector ParamVector::bernoulli(double theta) {
    return ParamVector(ParamFamily::memoryless(2), {1.0 - theta, theta});
}

std::span<const double> ParamVector::row(int r) const {
    const auto k = static_cast<std::size_t>(family_.alphabet_size());
    return std::span<const double>(probs_).subspan(static_cast<std::size_t>(r) * k, k);
}

double ParamVector::prob(int row_index, Symbol s) const {
    return probs_[static_cast<std::size_t>(row_index) * static_cast<std::size_t>(alphabet_size()) + s];
}

std::span<const double> ParamVector::initial() const noexcept {
    if (family_.kind() == SourceKind::Memoryless) return probs_;
    return stationary_;
}

bool ParamVector::is_interior(double eta) const noexcept {
    return std::all_of(probs_.begin(), probs_.end(), [eta](double p) { return p >= eta; });
}

std::vector<double> ParamVector::free_coordinates() const {
    const int k = alphabet_size();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(family_.dimension()));
    for (int r = 0; r < family_.rows(); ++r)
        for (int j = 1; j < k; ++j) out.push_back(prob(r, static_cast<Symbol>(j)));
    return out;
}

ParamVector ParamVector::from_free(const ParamFamily& family, std::span<const double> free) {
    const int k = family.alphabet_size();
    if (static_cast<std::int64_t>(free.size()) != family.dimension())
        throw ConfigError("free coordinate count does not match family dimension");
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(family.rows() * k));
    for (int r = 0; r < family.rows(); ++r) {
        const auto row = free.subspan(static_cast<std::size_t>(r * (k - 1)), static_cast<std::size_t>(k - 1));
        probs.push_back(1.0 - std::accumulate(row.begin(), row.end(), 0.0));
        probs.insert(probs.end(), row.begin(), row.end());
    }
    return ParamVector(family, std::move(probs));
}

std::vector<double> stationary_distribution(std::span<const double> matrix, int k) {
    const auto ks = static_cast<Eigen::Index>(k);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> P(
        matrix.data(), ks, ks);

    // pi (P - I) = 0 with one balance equation replaced by sum(pi) = 1.
    Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(ks, ks);
    A.row(ks - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ks);
    b(ks - 1) = 1.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd pi;
    const double det = std::abs(lu.determinant());
    bool ok = std::isfinite(det) && det > 1e-300;
    if (ok) {
        pi = lu.solve(b);
        ok = pi.allFinite() && (pi.array() >= -1e-12).all();
    }
    if (!ok) {
        // Reducible chain: Cesaro average from the uniform start.
        Eigen::RowVectorXd state = Eigen::RowVectorXd::Constant(ks, 1.0 / static_cast<double>(k));
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(ks);
        constexpr int kSteps = 4096;
        for (int t = 0; t < kSteps; ++t) {
            acc += state;
            state = state * P;
        }
        pi = (acc / static_cast<double>(kSteps)).transpose();
    }
    std::vector<double> out(static_cast<std::size_t>(k));
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        out[static_cast<std::size_t>(i)] = std::max(0.0, pi(i));
        total += out[static_cast<std::size_t>(i)];
    }
    for (auto& v : out) v /= total;
    return out;
}

SequenceSample::SequenceSample(ParamFamily f, std::vector<Symbol> s)
    : family(f), symbols(std::move(s)) {
    if (symbols.empty()) throw ConfigError("sequence must be non-empty");
    for (auto sym : symbols)
        if (sym >= family.alphabet_size())
            throw ConfigError("symbol " + std::to_string(sym) + " out of range for " + family.to_string());
}

double seq_log_prob(const ParamVector& theta, std::span<const Symbol> x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    const auto init = theta.initial();
    acc += std::log2(init[x[0]]);
    const bool markov = theta.family().kind() == SourceKind::Markov1;
    for (std::size_t t = 1; t < x.size(); ++t) {
        const int r = markov ? x[t - 1] : 0;
        acc += std::log2(theta.prob(r, x[t]));
    }
    // log2(0) = -inf propagates; NaN cannot arise since all terms are <= 0.
    return acc;
}

double seq_log_prob(const ParamVector& theta, const SequenceSample& x) {
    if (!(x.family == theta.family())) throw ConfigError("sequence and parameter families differ");
    return seq_log_prob(theta, x.symbols);
}

std::vector<Symbol> sample_sequence(const ParamVector& theta, std::int64_t n, Rng& rng) {
    if (n < 1) throw ConfigError("sequence length must be >= 1");
    std::vector<Symbol> x(static_cast<std::size_t>(n));
    const bool markov = theta.family().kind() == SourceKind::Markov1;
    x[0] = static_cast<Symbol>(rng.categorical(theta.initial()));
    for (std::size_t t = 1; t < x.size(); ++t)
        x[t] = static_cast<Symbol>(rng.categorical(theta.row(markov ? x[t - 1] : 0)));
    return x;
}

double entropy_bits(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

double entropy_n(const ParamVector& theta, std::int64_t n) {
    if (n < 1) throw ConfigError("sequence length must be >= 1");
    const auto nn = static_cast<double>(n);
    if (theta.family().kind() == SourceKind::Memoryless) return nn * entropy_bits(theta.probs());
    const auto pi = theta.stationary();
    double rate = 0.0;
    for (int i = 0; i < theta.alphabet_size(); ++i) rate += pi[static_cast<std::size_t>(i)] * entropy_bits(theta.row(i));
    return entropy_bits(pi) + (nn - 1.0) * rate;
}

Eigen::MatrixXd fisher_info(const ParamVector& theta, double eta) {
    if (!theta.is_interior(eta))
        throw SingularityError("Fisher information is singular at boundary parameter");
    const int k = theta.alphabet_size();
    const auto d = static_cast<Eigen::Index>(theta.family().dimension());
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(d, d);
    const bool markov = theta.family().kind() == SourceKind::Markov1;
    for (int r = 0; r < theta.family().rows(); ++r) {
        const double weight = markov ? theta.stationary()[static_cast<std::size_t>(r)] : 1.0;
        const double p0 = theta.prob(r, 0);
        const Eigen::Index base = static_cast<Eigen::Index>(r) * (k - 1);
        for (int i = 1; i < k; ++i) {
            for (int j = 1; j < k; ++j) {
                double v = 1.0 / p0;
                if (i == j) v += 1.0 / theta.prob(r, static_cast<Symbol>(i));
                info(base + i - 1, base + j - 1) = weight * v;
            }
        }
    }
    return info;
}

double sqrt_det_fisher(const ParamVector& theta) {
    const int k = theta.alphabet_size();
    double log_det = 0.0;
    for (double p : theta.probs()) log_det -= std::log(p);
    if (theta.family().kind() == SourceKind::Markov1)
        for (double pi : theta.stationary()) log_det += static_cast<double>(k - 1) * std::log(pi);
    return std::exp(0.5 * log_det);
}

std::string to_string(IntegralSource src) {
    switch (src) {
        case IntegralSource::ClosedForm: return "closed_form";
        case IntegralSource::MonteCarlo: return "monte_carlo";
        case IntegralSource::Approximate: return "approximate";
    }
    return "unknown";
}

namespace {

// log of the Dirichlet(1/2,...,1/2) normalizer over a k-simplex.
double log_dirichlet_half_norm(int k) {
    return 0.5 * static_cast<double>(k) * std::log(std::numbers::pi) - std::lgamma(0.5 * k);
}

// log prod_i pi_i^{(k-1)/2} for a sampled transition matrix.
double log_stationary_weight(std::span<const double> matrix, int k) {
    const auto pi = stationary_distribution(matrix, k);
    double acc = 0.0;
    for (double v : pi) acc += std::log(v);
    return 0.5 * static_cast<double>(k - 1) * acc;
}

void draw_rows(Rng& rng, std::vector<double>& matrix, int k) {
    for (int r = 0; r < k; ++r)
        rng.dirichlet_half(std::span<double>(matrix).subspan(static_cast<std::size_t>(r * k), static_cast<std::size_t>(k)));
}

}  // namespace

JeffreysIntegral jeffreys_integral(const ParamFamily& family, const IntegralOptions& opts) {
    const int k = family.alphabet_size();
    if (family.kind() == SourceKind::Memoryless) {
        const double log_v = log_dirichlet_half_norm(k);
        return {std::exp(log_v), log_v / std::numbers::ln2, 0.0, 0, IntegralSource::ClosedForm};
    }

    const double kd = static_cast<double>(k);
    const double work_per_sample = kd * kd * kd;
    if (work_per_sample * static_cast<double>(opts.min_samples) > opts.work_budget)
        throw IntractableError("Jeffreys integral for " + family.to_string() +
                               " exceeds the Monte Carlo budget (d = " +
                               std::to_string(family.dimension()) + ")");

    // Weights are prod_i pi_i^{(k-1)/2} <= 1 in log space; accumulate relative
    // to the first sample's log weight to avoid underflow for moderate k.
    Rng rng(opts.seed);
    std::vector<double> matrix(static_cast<std::size_t>(k * k));
    double shift = 0.0;
    bool have_shift = false;
    double sum = 0.0, sum_sq = 0.0;
    std::uint64_t count = 0;
    constexpr std::uint64_t kBatch = 10000;
    const auto max_by_work = static_cast<std::uint64_t>(opts.work_budget / work_per_sample);
    const std::uint64_t cap = std::min(opts.max_samples, max_by_work);
    double rel_se = std::numeric_limits<double>::infinity();

    while (count < cap) {
        const std::uint64_t batch_end = std::min(cap, count + kBatch);
        for (; count < batch_end; ++count) {
            draw_rows(rng, matrix, k);
            const double lw = log_stationary_weight(matrix, k);
            if (!have_shift) {
                shift = lw;
                have_shift = true;
            }
            const double w = std::exp(lw - shift);
            sum += w;
            sum_sq += w * w;
        }
        const double nn = static_cast<double>(count);
        const double mean = sum / nn;
        const double var = std::max(0.0, sum_sq / nn - mean * mean) * nn / (nn - 1.0);
        rel_se = std::sqrt(var / nn) / mean;
        if (count >= opts.min_samples && rel_se <= opts.target_rel_se) break;
    }
    if (!(rel_se <= opts.target_rel_se))
        throw IntractableError("Jeffreys integral for " + family.to_string() +
                               " did not reach relative SE " + std::to_string(opts.target_rel_se) +
                               " within budget (reached " + std::to_string(rel_se) + ")");

    const double log_v = kd * log_dirichlet_half_norm(k) + shift + std::log(sum / static_cast<double>(count));
    return {std::exp(log_v), log_v / std::numbers::ln2, rel_se, count, IntegralSource::MonteCarlo};
}

double jeffreys_log2_integral_upper_bound(const ParamFamily& family) {
    const int k = family.alphabet_size();
    const double kd = static_cast<double>(k);
    const double log_row = log_dirichlet_half_norm(k);
    if (family.kind() == SourceKind::Memoryless) return log_row / std::numbers::ln2;
    // prod_i pi_i <= k^{-k} (AM-GM), raised to (k-1)/2.
    const double log_v = kd * log_row - 0.5 * kd * (kd - 1.0) * std::log(kd);
    return log_v / std::numbers::ln2;
}

JeffreysSampler::JeffreysSampler(ParamFamily family, std::uint64_t max_attempts)
    : family_(family), max_attempts_(max_attempts) {}

ParamVector JeffreysSampler::draw(Rng& rng) const {
    const int k = family_.alphabet_size();
    if (family_.kind() == SourceKind::Memoryless) {
        std::vector<double> probs(static_cast<std::size_t>(k));
        rng.dirichlet_half(probs);
        return ParamVector(family_, std::move(probs));
    }
    std::vector<double> matrix(static_cast<std::size_t>(k * k));
    for (std::uint64_t attempt = 0; attempt < max_attempts_; ++attempt) {
        draw_rows(rng, matrix, k);
        const double lw = log_stationary_weight(matrix, k);
        if (std::log(rng.uniform()) < lw) {
            // Renormalize rows exactly; Dirichlet draws can be off by an ulp.
            for (int r = 0; r < k; ++r) {
                auto row = std::span<double>(matrix).subspan(static_cast<std::size_t>(r * k), static_cast<std::size_t>(k));
                const double s = std::accumulate(row.begin(), row.end(), 0.0);
                for (auto& v : row) v /= s;
            }
            return ParamVector(family_, matrix);
        }
    }
    std::ostringstream msg;
    msg << "Jeffreys rejection sampler for " << family_.to_string() << " exhausted " << max_attempts_
        << " attempts with 0 acceptances (acceptance rate < " << 1.0 / static_cast<double>(max_attempts_)
        << ")";
    throw IntractableError(msg.str());
}

ParamVector sample_jeffreys(const ParamFamily& family, std::uint64_t seed) {
    Rng rng(seed);
    return JeffreysSampler(family).draw(rng);
}

}  // namespace redlab
