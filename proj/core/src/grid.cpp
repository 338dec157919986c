#include "redlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "redlab/error.hpp"

namespace redlab {

LogTable::LogTable(const ParamVector& theta) {
    for (double p : theta.initial()) initial.push_back(std::log2(p));
    for (double p : theta.probs()) probs.push_back(std::log2(p));
}

std::vector<int> coordinate_budgets(std::int64_t d, int m) {
    std::vector<int> budgets(static_cast<std::size_t>(d), 0);
    const auto base = static_cast<int>(m / d);
    const auto extra = m % d;
    for (std::int64_t c = 0; c < d; ++c) budgets[static_cast<std::size_t>(c)] = base + (c < extra ? 1 : 0);
    return budgets;
}

namespace {

// A stick share together with its complement, so symmetric quantiles can be
// mirrored exactly.
struct Share {
    double taken;
    double left;
};

// Quantile of Beta(1/2, b) at u, with its complement.
Share beta_half_quantile(double b, double u) {
    if (b == 0.5) {
        // Arcsine law: F^{-1}(u) = sin^2(pi u / 2). Compute on the lower half
        // and mirror so that u and 1-u give exactly swapped shares.
        const double lo = std::min(u, 1.0 - u);
        const double s = std::sin(0.5 * std::numbers::pi * lo);
        const double c = std::cos(0.5 * std::numbers::pi * lo);
        const double q = s * s;
        const double qc = c * c;
        return u <= 0.5 ? Share{q, qc} : Share{qc, q};
    }
    double left = 0.0;
    const double q = boost::math::ibeta_inv(0.5, b, u, &left);
    return {q, left};
}

// Quantile midpoints (2i - 1) / 2^{b+1}, i = 1..2^b.
std::vector<double> midpoints(int bits) {
    const std::size_t count = std::size_t{1} << bits;
    std::vector<double> u(count);
    const double denom = std::ldexp(1.0, bits + 1);
    for (std::size_t i = 0; i < count; ++i) u[i] = static_cast<double>(2 * i + 1) / denom;
    return u;
}

}  // namespace

EstimateGrid::EstimateGrid(ParamFamily family, int m, std::vector<ParamVector> points)
    : family_(family), m_(m), points_(std::move(points)) {
    tables_.reserve(points_.size());
    for (const auto& p : points_) tables_.emplace_back(p);
}

EstimateGrid EstimateGrid::build(const ParamFamily& family, int m) {
    if (m < 0 || m > kMaxGridBits)
        throw ConfigError("grid bits must lie in [0, " + std::to_string(kMaxGridBits) + "], got " + std::to_string(m));
    const int k = family.alphabet_size();
    const auto d = family.dimension();
    if (d > 4096) throw IntractableError("estimate grid quantiles are not tabulated for d > 4096");
    const auto budgets = coordinate_budgets(d, m);

    // Coordinate c belongs to row c / (k-1); within the row, stick j = c % (k-1)
    // carves out symbol k-1-j with shape Beta(1/2, (k-1-j)/2).
    std::vector<std::vector<Share>> shares(static_cast<std::size_t>(d));
    for (std::int64_t c = 0; c < d; ++c) {
        const auto j = static_cast<int>(c % (k - 1));
        const double b = 0.5 * static_cast<double>(k - 1 - j);
        for (double u : midpoints(budgets[static_cast<std::size_t>(c)]))
            shares[static_cast<std::size_t>(c)].push_back(beta_half_quantile(b, u));
    }

    const std::size_t count = std::size_t{1} << m;
    std::vector<ParamVector> points;
    points.reserve(count);
    std::vector<std::size_t> digit(static_cast<std::size_t>(d));
    std::vector<double> probs(static_cast<std::size_t>(family.rows() * k));
    for (std::size_t idx = 0; idx < count; ++idx) {
        // Mixed-radix decomposition, coordinate 0 most significant.
        std::size_t rest = idx;
        for (std::int64_t c = d - 1; c >= 0; --c) {
            const std::size_t radix = std::size_t{1} << budgets[static_cast<std::size_t>(c)];
            digit[static_cast<std::size_t>(c)] = rest % radix;
            rest /= radix;
        }
        for (int r = 0; r < family.rows(); ++r) {
            double remaining = 1.0;
            for (int j = 0; j < k - 1; ++j) {
                const auto c = static_cast<std::size_t>(r * (k - 1) + j);
                const Share s = shares[c][digit[c]];
                probs[static_cast<std::size_t>(r * k + (k - 1 - j))] = remaining * s.taken;
                remaining *= s.left;
            }
            probs[static_cast<std::size_t>(r * k)] = remaining;
        }
        points.emplace_back(family, probs);
    }
    return EstimateGrid(family, m, std::move(points));
}

EstimateGrid EstimateGrid::from_points(const ParamFamily& family, std::vector<ParamVector> points) {
    if (points.empty()) throw ConfigError("estimate grid must be non-empty");
    int m = 0;
    while ((std::size_t{1} << m) < points.size()) ++m;
    if ((std::size_t{1} << m) != points.size())
        throw ConfigError("estimate grid size must be a power of two, got " + std::to_string(points.size()));
    for (const auto& p : points)
        if (!(p.family() == family)) throw ConfigError("grid point family mismatch");
    return EstimateGrid(family, m, std::move(points));
}

}  // namespace redlab
