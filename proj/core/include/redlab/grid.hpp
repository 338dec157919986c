#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "redlab/family.hpp"

namespace redlab {

inline constexpr int kMaxGridBits = 24;

/// log2 probability tables of one parameter point, laid out for fast
/// likelihood evaluation from sufficient statistics.
struct LogTable {
    std::vector<double> initial;  // k entries
    std::vector<double> probs;    // rows * k entries, row-major

    explicit LogTable(const ParamVector& theta);
};

/// The set of 2^m estimate points available to an m-bit first stage. The
/// position of a point in `points()` is its first-stage codeword.
///
/// Points are Jeffreys-quantile midpoints in stick-breaking coordinates:
/// within each row, the share of symbol k-1 is drawn first from
/// Beta(1/2, (k-1)/2), then symbol k-2's share of what remains from
/// Beta(1/2, (k-2)/2), and so on; under Dirichlet(1/2) these shares are
/// independent, so a product of per-coordinate quantiles gives cells of
/// equal prior mass (exactly for memoryless families). Each of the d
/// coordinates gets floor(m/d) bits, the first m mod d get one extra, and
/// points are enumerated row-major with coordinate 0 most significant.
class EstimateGrid {
public:
    /// 0 <= m <= 24. m = 0 yields the single median point.
    static EstimateGrid build(const ParamFamily& family, int m);

    /// Arbitrary points; their count must be 2^m.
    static EstimateGrid from_points(const ParamFamily& family, std::vector<ParamVector> points);

    const ParamFamily& family() const noexcept { return family_; }
    int bits() const noexcept { return m_; }
    std::size_t size() const noexcept { return points_.size(); }
    const ParamVector& point(std::size_t i) const { return points_.at(i); }
    const std::vector<ParamVector>& points() const noexcept { return points_; }
    const LogTable& log_table(std::size_t i) const { return tables_.at(i); }

private:
    EstimateGrid(ParamFamily family, int m, std::vector<ParamVector> points);

    ParamFamily family_;
    int m_;
    std::vector<ParamVector> points_;
    std::vector<LogTable> tables_;
};

/// Per-coordinate bit budgets used by EstimateGrid::build.
std::vector<int> coordinate_budgets(std::int64_t d, int m);

}  // namespace redlab
