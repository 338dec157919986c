#include "redlab/bounds.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "redlab/error.hpp"

namespace redlab {

namespace {

constexpr double kLog2e = std::numbers::log2e;

double log2_gamma(double x) { return std::lgamma(x) * kLog2e; }

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void require_dimension(std::int64_t d) {
    if (d <= 0) throw ConfigError("dimension must be >= 1, got " + std::to_string(d));
}

void require_length(std::int64_t n, std::int64_t min_n) {
    if (n < min_n)
        throw ConfigError("sequence length must be >= " + std::to_string(min_n) + ", got " + std::to_string(n));
}

}  // namespace

JeffreysConstant JeffreysConstant::from(const JeffreysIntegral& integral) {
    return {integral.log2_value, integral.rel_se, integral.source};
}

JeffreysConstant jeffreys_constant(const ParamFamily& family, const IntegralOptions& opts) {
    return JeffreysConstant::from(jeffreys_integral(family, opts));
}

double minimax_redundancy(std::int64_t d, std::int64_t n, const JeffreysConstant& c) {
    require_dimension(d);
    require_length(n, 1);
    return 0.5 * static_cast<double>(d) * std::log2(static_cast<double>(n) / (2.0 * std::numbers::pi)) +
           c.log2_value;
}

double minimax_redundancy(const ParamFamily& family, std::int64_t n, const IntegralOptions& opts) {
    return minimax_redundancy(family.dimension(), n, jeffreys_constant(family, opts));
}

double log2_unit_ball_volume(std::int64_t d) {
    require_dimension(d);
    const double dd = static_cast<double>(d);
    return dd * log2_gamma(0.5) - log2_gamma(0.5 * dd + 1.0);
}

double unit_ball_volume(std::int64_t d) { return std::exp2(log2_unit_ball_volume(d)); }

double two_stage_penalty(std::int64_t d) {
    require_dimension(d);
    const double half = 0.5 * static_cast<double>(d);
    return log2_gamma(half + 1.0) - half * std::log2(half / std::numbers::e);
}

double two_stage_penalty_asymptotic(std::int64_t d) {
    require_dimension(d);
    return 0.5 * std::log2(std::numbers::pi * static_cast<double>(d));
}

double minimax_two_stage(std::int64_t d, std::int64_t n, const JeffreysConstant& c) {
    return minimax_redundancy(d, n, c) + two_stage_penalty(d);
}

double minimax_two_stage(const ParamFamily& family, std::int64_t n, const IntegralOptions& opts) {
    return minimax_two_stage(family.dimension(), n, jeffreys_constant(family, opts));
}

double main_term(std::int64_t d, std::int64_t n, double eps) {
    require_dimension(d);
    require_length(n, 1);
    return (1.0 - eps) * 0.5 * static_cast<double>(d) * std::log2(static_cast<double>(n));
}

std::string to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::CondTwoStage: return "thm1_cond_two_stage";
        case CurveKind::TwoStage: return "thm2_two_stage";
        case CurveKind::Minimax: return "minimax";
        case CurveKind::MinimaxTwoStage: return "minimax_two_stage";
        case CurveKind::MainTerm: return "main_term";
    }
    return "unknown";
}

CurveKind curve_kind_from_string(const std::string& name) {
    if (name == "thm1" || name == "thm1_cond_two_stage" || name == "c2p") return CurveKind::CondTwoStage;
    if (name == "thm2" || name == "thm2_two_stage" || name == "2p") return CurveKind::TwoStage;
    if (name == "minimax") return CurveKind::Minimax;
    if (name == "minimax2p" || name == "minimax_two_stage") return CurveKind::MinimaxTwoStage;
    if (name == "main-term" || name == "main_term") return CurveKind::MainTerm;
    throw ConfigError("unknown curve kind '" + name + "'");
}

std::string to_string(PointFlag flag) {
    switch (flag) {
        case PointFlag::Ok: return "ok";
        case PointFlag::Saturated: return "saturated";
        case PointFlag::Vacuous: return "vacuous";
    }
    return "unknown";
}

double log2_kernel_cond_two_stage(std::int64_t d, const JeffreysConstant& c) {
    require_dimension(d);
    return 0.5 * static_cast<double>(d) * std::log2(2.0 * std::numbers::pi) - c.log2_value;
}

double log2_kernel_two_stage(std::int64_t d, const JeffreysConstant& c) {
    require_dimension(d);
    const double dd = static_cast<double>(d);
    return log2_unit_ball_volume(d) + 0.5 * dd * std::log2(dd / std::numbers::e) - c.log2_value;
}

namespace {

double failure_mass(double log2_kernel, std::int64_t d, std::int64_t n, double eps) {
    require_length(n, 1);
    return std::exp2(log2_kernel - eps * 0.5 * static_cast<double>(d) * std::log2(static_cast<double>(n)));
}

}  // namespace

double failure_mass_cond_two_stage(std::int64_t d, std::int64_t n, double eps, const JeffreysConstant& c) {
    return failure_mass(log2_kernel_cond_two_stage(d, c), d, n, eps);
}

double failure_mass_two_stage(std::int64_t d, std::int64_t n, double eps, const JeffreysConstant& c) {
    return failure_mass(log2_kernel_two_stage(d, c), d, n, eps);
}

CurvePoint solve_bound_point(double log2_kernel, std::int64_t d, std::int64_t n, double p0) {
    require_dimension(d);
    require_length(n, 2);
    if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("P0 must lie in (0, 1), got " + std::to_string(p0));
    const double full = 0.5 * static_cast<double>(d) * std::log2(static_cast<double>(n));
    const double eps = (log2_kernel - std::log2(1.0 - p0)) / full;

    CurvePoint pt;
    pt.p0 = p0;
    if (eps < 0.0) {
        pt.flag = PointFlag::Saturated;
        pt.eps = 0.0;
    } else if (eps > 1.0) {
        pt.flag = PointFlag::Vacuous;
        pt.eps = 1.0;
    } else {
        pt.eps = eps;
    }
    pt.r0 = (1.0 - pt.eps) * full;
    return pt;
}

namespace {

BoundCurve bound_curve(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                       const JeffreysConstant& c, CurveKind kind) {
    const auto d = family.dimension();
    const double log2_k =
        kind == CurveKind::CondTwoStage ? log2_kernel_cond_two_stage(d, c) : log2_kernel_two_stage(d, c);
    BoundCurve curve;
    curve.family = family.to_string();
    curve.d = d;
    curve.n = n;
    curve.kind = kind;
    curve.constant = c;
    curve.approximate = c.source == IntegralSource::Approximate;
    curve.points.reserve(p0_grid.size());
    for (double p0 : p0_grid) curve.points.push_back(solve_bound_point(log2_k, d, n, p0));
    return curve;
}

}  // namespace

BoundCurve thm1_curve(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                      const JeffreysConstant& c) {
    return bound_curve(family, n, p0_grid, c, CurveKind::CondTwoStage);
}

BoundCurve thm1_curve(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                      const IntegralOptions& opts) {
    return thm1_curve(family, n, p0_grid, jeffreys_constant(family, opts));
}

BoundCurve thm2_curve(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                      const JeffreysConstant& c) {
    return bound_curve(family, n, p0_grid, c, CurveKind::TwoStage);
}

BoundCurve thm2_curve(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                      const IntegralOptions& opts) {
    return thm2_curve(family, n, p0_grid, jeffreys_constant(family, opts));
}

BoundCurve minimax_line(const ParamFamily& family, std::int64_t n, std::span<const double> p0_grid,
                        const JeffreysConstant& c, bool two_stage) {
    const auto d = family.dimension();
    const double value = two_stage ? minimax_two_stage(d, n, c) : minimax_redundancy(d, n, c);
    BoundCurve curve;
    curve.family = family.to_string();
    curve.d = d;
    curve.n = n;
    curve.kind = two_stage ? CurveKind::MinimaxTwoStage : CurveKind::Minimax;
    curve.constant = c;
    curve.approximate = c.source == IntegralSource::Approximate;
    for (double p0 : p0_grid) {
        if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("P0 must lie in (0, 1)");
        curve.points.push_back({p0, value, PointFlag::Ok, 0.0});
    }
    return curve;
}

BoundCurve main_term_curve(std::int64_t d, std::int64_t n, std::span<const double> p0_grid,
                           std::optional<double> log2_constant) {
    JeffreysConstant c{log2_constant.value_or(0.0), 0.0, IntegralSource::Approximate};
    const double log2_k = log2_kernel_cond_two_stage(d, c);
    BoundCurve curve;
    curve.family = "d=" + std::to_string(d);
    curve.d = d;
    curve.n = n;
    curve.kind = CurveKind::MainTerm;
    curve.constant = c;
    curve.has_constant = log2_constant.has_value();
    curve.approximate = true;
    for (double p0 : p0_grid) curve.points.push_back(solve_bound_point(log2_k, d, n, p0));
    return curve;
}

std::vector<double> default_p0_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 99; ++i) grid.push_back(static_cast<double>(i) / 100.0);
    return grid;
}

std::string BoundCurve::to_csv() const {
    std::string out = "p0,r0,flag\n";
    for (const auto& pt : points) out += shortest(pt.p0) + ',' + shortest(pt.r0) + ',' + to_string(pt.flag) + '\n';
    return out;
}

nlohmann::json BoundCurve::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : points)
        pts.push_back({{"p0", pt.p0}, {"r0", pt.r0}, {"eps", pt.eps}, {"flag", to_string(pt.flag)}});
    nlohmann::json j = {
        {"family", family},
        {"d", d},
        {"n", n},
        {"kind", to_string(kind)},
        {"approximate", approximate},
        {"points", std::move(pts)},
    };
    if (has_constant) {
        j["integral"] = {
            {"log2_value", constant.log2_value},
            {"rel_se", constant.rel_se},
            {"source", to_string(constant.source)},
        };
    } else {
        j["integral"] = nullptr;
    }
    return j;
}

}  // namespace redlab
