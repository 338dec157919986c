#include "redlab/figures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "redlab/bounds.hpp"
#include "redlab/codecs.hpp"
#include "redlab/error.hpp"
#include "redlab/eval.hpp"

namespace redlab {

std::string to_string(FigureId id) {
    switch (id) {
        case FigureId::Fig1: return "fig1";
        case FigureId::Fig2: return "fig2";
        case FigureId::Fig3: return "fig3";
        case FigureId::Fig4: return "fig4";
    }
    throw InvariantError("unknown figure id");
}

FigureId figure_id_from_string(const std::string& name) {
    if (name == "fig1" || name == "1") return FigureId::Fig1;
    if (name == "fig2" || name == "2") return FigureId::Fig2;
    if (name == "fig3" || name == "3") return FigureId::Fig3;
    if (name == "fig4" || name == "4") return FigureId::Fig4;
    throw ConfigError("unknown figure '" + name + "' (expected fig1..fig4)");
}

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw ConfigError("failed writing " + path.string());
}

std::string Series::file_name() const { return name + "_n" + std::to_string(n) + ".csv"; }

std::string Series::to_csv() const {
    std::string out = "series,n,p0_or_r0,value,ci\n";
    for (const auto& r : rows) {
        out += name + ',' + std::to_string(n) + ',' + format_double(r.x) + ',' + format_double(r.value) + ',' +
               format_double(r.ci) + '\n';
    }
    return out;
}

const Series* FigureBundle::find(const std::string& name, std::int64_t n) const {
    for (const auto& s : series)
        if (s.name == name && s.n == n) return &s;
    return nullptr;
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// 95% half-width of a bound value induced by the Monte Carlo error of the
// Jeffreys constant (log2 of the integral moves by about rel_se / ln 2).
double constant_ci(const JeffreysConstant& c) {
    if (c.source != IntegralSource::MonteCarlo) return kNan;
    return 1.959963984540054 * c.rel_se / std::numbers::ln2;
}

Series from_curve(const std::string& name, const BoundCurve& curve) {
    Series s{name, curve.n, {}};
    const double ci = constant_ci(curve.constant);
    for (const auto& pt : curve.points) s.rows.push_back({pt.p0, pt.r0, pt.flag == PointFlag::Ok ? ci : kNan});
    return s;
}

nlohmann::json curve_meta(const std::string& name, const BoundCurve& curve, const Series& s) {
    std::size_t saturated = 0, vacuous = 0;
    for (const auto& pt : curve.points) {
        saturated += pt.flag == PointFlag::Saturated;
        vacuous += pt.flag == PointFlag::Vacuous;
    }
    return {{"series", name},
            {"n", curve.n},
            {"file", s.file_name()},
            {"kind", to_string(curve.kind)},
            {"approximate", curve.approximate},
            {"saturated_points", saturated},
            {"vacuous_points", vacuous}};
}

struct Spec {
    ParamFamily family;
    std::vector<std::int64_t> ns;
    bool thm2 = false;
    bool minimax2p = false;
    std::int64_t reduced_n = 0;
    std::vector<ModelKind> empirical_kinds;
};

Spec spec_for(FigureId id) {
    switch (id) {
        case FigureId::Fig1:
            return {ParamFamily::memoryless(3), {8, 32, 128, 512}, false, false, 8, {ModelKind::CondTwoStage}};
        case FigureId::Fig2:
            return {ParamFamily::markov1(2), {12, 50, 202, 811}, false, false, 12, {ModelKind::CondTwoStage}};
        case FigureId::Fig3:
            return {ParamFamily::memoryless(2),
                    {8, 64, 512, 4096},
                    true,
                    true,
                    16,
                    {ModelKind::CondTwoStage, ModelKind::TwoStage}};
        case FigureId::Fig4:
            return {ParamFamily::markov1(256),
                    {256LL * 1024, 2LL * 1024 * 1024, 16LL * 1024 * 1024, 128LL * 1024 * 1024},
                    false,
                    true,
                    0,
                    {}};
    }
    throw InvariantError("unknown figure id");
}

std::vector<double> r0_grid_up_to(double top) {
    std::vector<double> grid;
    for (int i = 0; i * 0.05 <= top + 1e-12; ++i) grid.push_back(i * 0.05);
    return grid;
}

}  // namespace

FigureBundle reproduce_figure(FigureId id, const FigureOptions& opts) {
    const Spec spec = spec_for(id);
    const auto p0_grid = default_p0_grid();
    const std::int64_t d = spec.family.dimension();

    FigureBundle bundle;
    bundle.id = id;
    nlohmann::json& meta = bundle.meta;
    meta["figure"] = to_string(id);
    meta["family"] = spec.family.to_string();
    meta["d"] = d;
    meta["n"] = spec.ns;
    meta["p0_grid"] = p0_grid;
    meta["csv_schema"] = "series,n,p0_or_r0,value,ci";
    meta["options"] = {{"empirical", opts.empirical},
                       {"theta_samples", opts.theta_samples},
                       {"seed", opts.seed},
                       {"integral_seed", opts.integral.seed},
                       {"integral_target_rel_se", opts.integral.target_rel_se},
                       {"integral_min_samples", opts.integral.min_samples}};
    meta["g_d"] = two_stage_penalty(d);
    meta["g_d_asymptotic"] = two_stage_penalty_asymptotic(d);
    nlohmann::json curves = nlohmann::json::array();

    auto add = [&](const std::string& name, const BoundCurve& curve) {
        Series s = from_curve(name, curve);
        curves.push_back(curve_meta(name, curve, s));
        bundle.series.push_back(std::move(s));
    };

    if (id == FigureId::Fig4) {
        // The Jeffreys integral for d = 65280 is out of reach; its AM-GM upper
        // bound stands in, and everything is flagged approximate.
        const double log2_c = jeffreys_log2_integral_upper_bound(spec.family);
        const JeffreysConstant c{log2_c, 0.0, IntegralSource::Approximate};
        meta["approximate"] = true;
        meta["constant"] = {{"log2_value", log2_c}, {"source", "am_gm_upper_bound"}};
        nlohmann::json per_n = nlohmann::json::array();
        for (auto n : spec.ns) {
            add("main_term", main_term_curve(d, n, p0_grid, log2_c));
            auto mm = minimax_line(spec.family, n, p0_grid, c, false);
            mm.approximate = true;
            add("minimax", mm);
            auto mm2 = minimax_line(spec.family, n, p0_grid, c, true);
            mm2.approximate = true;
            add("minimax2p", mm2);
            const double rbar = minimax_redundancy(d, n, c);
            per_n.push_back({{"n", n},
                             {"main_term_bits", main_term(d, n, 0.0)},
                             {"minimax_bits", rbar},
                             {"overhead_at_1_bit_per_byte", rbar / static_cast<double>(n)}});
        }
        meta["per_n"] = per_n;
        meta["curves"] = curves;
        return bundle;
    }

    const JeffreysConstant c = jeffreys_constant(spec.family, opts.integral);
    meta["approximate"] = false;
    meta["constant"] = {{"log2_value", c.log2_value},
                        {"value", std::exp2(c.log2_value)},
                        {"rel_se", c.rel_se},
                        {"source", to_string(c.source)}};
    nlohmann::json per_n = nlohmann::json::array();
    for (auto n : spec.ns) {
        add("thm1", thm1_curve(spec.family, n, p0_grid, c));
        if (spec.thm2) add("thm2", thm2_curve(spec.family, n, p0_grid, c));
        add("minimax", minimax_line(spec.family, n, p0_grid, c, false));
        if (spec.minimax2p) add("minimax2p", minimax_line(spec.family, n, p0_grid, c, true));
        per_n.push_back({{"n", n},
                         {"minimax_bits", minimax_redundancy(d, n, c)},
                         {"minimax_two_stage_bits", minimax_two_stage(d, n, c)}});
    }
    meta["per_n"] = per_n;

    if (opts.empirical) {
        const std::int64_t n = spec.reduced_n;
        if (std::find(spec.ns.begin(), spec.ns.end(), n) == spec.ns.end())
            add("thm1", thm1_curve(spec.family, n, p0_grid, c));
        const auto r0_grid = r0_grid_up_to(std::ceil(minimax_two_stage(d, n, c)) + 2.0);
        nlohmann::json emp = nlohmann::json::array();
        for (auto kind : spec.empirical_kinds) {
            EmpiricalOptions eo;
            eo.threads = opts.threads;
            const auto curve = empirical_curve(spec.family, n, kind, opts.theta_samples, opts.seed, r0_grid, eo);
            const std::string name = kind == ModelKind::CondTwoStage ? "empirical_c2p" : "empirical_2p";
            Series s{name, n, {}};
            for (const auto& pt : curve.points) s.rows.push_back({pt.r0, pt.fraction, pt.ci_halfwidth});
            emp.push_back({{"series", name},
                           {"n", n},
                           {"file", s.file_name()},
                           {"model", to_string(kind)},
                           {"m", curve.m},
                           {"theta_samples", curve.theta_samples},
                           {"seed", curve.seed},
                           {"x", "r0"},
                           {"value", "exceedance fraction"},
                           {"ci", "Wilson 95% half-width"}});
            bundle.series.push_back(std::move(s));
        }
        meta["empirical"] = emp;
    }
    meta["curves"] = curves;
    return bundle;
}

void write_bundle(const FigureBundle& bundle, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
    write_text_file(dir / "meta.json", bundle.meta.dump(2) + "\n");
    for (const auto& s : bundle.series) write_text_file(dir / s.file_name(), s.to_csv());
}

}  // namespace redlab
