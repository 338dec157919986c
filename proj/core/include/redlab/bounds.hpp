#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "redlab/family.hpp"

namespace redlab {

/// The Jeffreys normalizing constant as consumed by the bounds, in log2 form
/// so that families with astronomically small integrals stay representable.
struct JeffreysConstant {
    double log2_value = 0.0;
    double rel_se = 0.0;
    IntegralSource source = IntegralSource::ClosedForm;

    static JeffreysConstant from(const JeffreysIntegral& integral);
};

/// Closed form for memoryless families, Monte Carlo for Markov ones.
/// Throws IntractableError for Markov families out of Monte Carlo reach.
JeffreysConstant jeffreys_constant(const ParamFamily& family, const IntegralOptions& opts = {});

/// Average minimax redundancy (d/2) log2(n / 2 pi) + log2 integral, bits.
/// The O(1/n) remainder is dropped.
double minimax_redundancy(std::int64_t d, std::int64_t n, const JeffreysConstant& c);
double minimax_redundancy(const ParamFamily& family, std::int64_t n, const IntegralOptions& opts = {});

/// C_d = Gamma(1/2)^d / Gamma(d/2 + 1).
double unit_ball_volume(std::int64_t d);
double log2_unit_ball_volume(std::int64_t d);

/// g(d) = log2 Gamma(d/2 + 1) - (d/2) log2(d / 2e), bits.
double two_stage_penalty(std::int64_t d);
/// Large-d form (1/2) log2(pi d).
double two_stage_penalty_asymptotic(std::int64_t d);

/// Minimax redundancy of two-stage codes: minimax + g(d).
double minimax_two_stage(std::int64_t d, std::int64_t n, const JeffreysConstant& c);
double minimax_two_stage(const ParamFamily& family, std::int64_t n, const IntegralOptions& opts = {});

/// Integral-free dominant term (1 - eps)(d/2) log2 n.
double main_term(std::int64_t d, std::int64_t n, double eps);

enum class CurveKind { CondTwoStage, TwoStage, Minimax, MinimaxTwoStage, MainTerm };

std::string to_string(CurveKind kind);
CurveKind curve_kind_from_string(const std::string& name);

enum class PointFlag {
    Ok,
    Saturated,  // required eps < 0; R0 capped at (d/2) log2 n
    Vacuous,    // required eps > 1; the bound gives nothing beyond R0 = 0
};

std::string to_string(PointFlag flag);

struct CurvePoint {
    double p0 = 0.0;
    double r0 = 0.0;
    PointFlag flag = PointFlag::Ok;
    double eps = 0.0;
};

/// A (P0, R0) curve and the constant behind it. For bound kinds, at least a fraction
/// P0 of Jeffreys-distributed sources have expected redundancy >= R0.
struct BoundCurve {
    std::string family;  // "memoryless:3", or "d=65280" for main-term curves
    std::int64_t d = 0;
    std::int64_t n = 0;
    CurveKind kind = CurveKind::CondTwoStage;
    JeffreysConstant constant;
    bool has_constant = true;
    bool approximate = false;
    std::vector<CurvePoint> points;

    std::string to_csv() const;
    nlohmann::json to_json() const;
};

/// log2 of the failure-mass kernel K such that the bound's failure mass at
/// eps is K * n^{-eps d/2}.
double log2_kernel_cond_two_stage(std::int64_t d, const JeffreysConstant& c);
double log2_kernel_two_stage(std::int64_t d, const JeffreysConstant& c);

/// Failure mass (1/integral)(2 pi / n^eps)^{d/2} of the conditional
/// two-stage bound; P[R >= (1-eps)(d/2) log2 n] >= 1 - mass.
double failure_mass_cond_two_stage(std::int64_t d, std::int64_t n, double eps, const JeffreysConstant& c);
/// Failure mass (C_d/integral)(d / (e n^eps))^{d/2} of the two-stage bound.
double failure_mass_two_stage(std::int64_t d, std::int64_t n, double eps, const JeffreysConstant& c);

/// Solves 1 - K n^{-eps d/2} = P0 for eps and returns the clipped point.
CurvePoint solve_bound_point(double log2_kernel, std::int64_t d, std::int64_t n, double p0);

BoundCurve thm1_curve(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                      const JeffreysConstant& c);
BoundCurve thm1_curve(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                      const IntegralOptions& opts = {});
BoundCurve thm2_curve(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                      const JeffreysConstant& c);
BoundCurve thm2_curve(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                      const IntegralOptions& opts = {});

/// Constant-in-P0 minimax lines.
BoundCurve minimax_line(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                        const JeffreysConstant& c, bool two_stage);

/// Conditional two-stage kernel with the integral supplied by the caller, or
/// dropped entirely (log2 integral := 0) when `log2_constant` is empty. Always
/// flagged approximate.
BoundCurve main_term_curve(std::int64_t d, std::int64_t n, std::span<const double> p0_grid,
                           std::optional<double> log2_constant = std::nullopt);

/// 0.01, 0.02, ..., 0.99.
std::vector<double> default_p0_grid();

}  // namespace redlab
