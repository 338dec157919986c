#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "redlab/bounds.hpp"
#include "redlab/coder.hpp"
#include "redlab/codecs.hpp"
#include "redlab/error.hpp"
#include "redlab/eval.hpp"
#include "redlab/family.hpp"
#include "redlab/figures.hpp"
#include "redlab/optimal_m.hpp"
#include "redlab/rng.hpp"
#include "redlab/serialize.hpp"

namespace redlab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::int64_t parse_size(const std::string& text) {
    std::size_t pos = 0;
    long long value = 0;
    try {
        value = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("invalid size '" + text + "'");
    }
    const std::string suffix = text.substr(pos);
    std::int64_t mult = 1;
    if (suffix.empty() || suffix == "B") {
        mult = 1;
    } else if (suffix == "kB" || suffix == "KB" || suffix == "k" || suffix == "K") {
        mult = 1024;
    } else if (suffix == "MB" || suffix == "M") {
        mult = 1024 * 1024;
    } else if (suffix == "GB" || suffix == "G") {
        mult = 1024LL * 1024 * 1024;
    } else {
        throw ConfigError("invalid size suffix in '" + text + "' (use kB or MB)");
    }
    if (value < 1) throw ConfigError("size must be positive: '" + text + "'");
    return static_cast<std::int64_t>(value) * mult;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw ConfigError("invalid number '" + item + "'");
        }
        if (pos != item.size()) throw ConfigError("invalid number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty number list");
    return out;
}

namespace {

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

struct Common {
    std::string out_dir = "redlab-out";
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct BoundsCfg {
    std::string family;
    std::string n;
    bool json = false;
    bool main_term_only = false;
    std::uint64_t mc_seed = IntegralOptions{}.seed;
    double mc_rel_se = IntegralOptions{}.target_rel_se;
};

struct CurveCfg {
    std::string family;
    std::string n;
    std::string kind = "thm1";
    std::optional<double> p0;
    std::string format = "csv";
    std::uint64_t mc_seed = IntegralOptions{}.seed;
};

struct EvalCfg {
    std::string family;
    std::string n;
    std::string model = "cond_two_stage";
    std::string m = "auto";
    std::string theta;
    std::string model_theta;
    std::uint64_t samples = 0;
    std::string r0;
    std::uint64_t mc_samples = EvalOptions{}.mc_samples;
    std::size_t max_classes = kDefaultMaxClasses;
    bool no_mc = false;
    int m_max = 8;
};

struct FiguresCfg {
    std::string id;
    bool empirical = false;
    std::uint64_t samples = 1000;
};

struct CodecCfg {
    std::string family;
    std::string n;
    std::string model = "mixture";
    std::string m = "auto";
    std::string theta;
    bool roundtrip_all = false;
    std::uint64_t random = 0;
    std::string encode;
    std::string decode;
    std::string container;
    std::string symbols;
};

IntegralOptions integral_options(std::uint64_t seed, double rel_se) {
    IntegralOptions o;
    o.seed = seed;
    o.target_rel_se = rel_se;
    return o;
}

ParamVector parse_theta(const ParamFamily& family, const std::string& text) {
    auto probs = parse_doubles(text);
    if (family.kind() == SourceKind::Memoryless && family.alphabet_size() == 2 && probs.size() == 1)
        return ParamVector::bernoulli(probs[0]);
    return ParamVector(family, std::move(probs));
}

json run_meta(const std::string& sub, const std::vector<std::string>& args, const Common& c, json config) {
    return {{"tool", "redlab"},
            {"version", "0.1.0"},
            {"subcommand", sub},
            {"args", args},
            {"seed", c.seed},
            {"threads", c.threads},
            {"config", std::move(config)}};
}

void write_meta(const Common& c, const json& meta) {
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) throw ConfigError("cannot create " + c.out_dir + ": " + ec.message());
    write_text_file(fs::path(c.out_dir) / "meta.json", meta.dump(2) + "\n");
}

// ---- bounds ---------------------------------------------------------------

int cmd_bounds(const BoundsCfg& cfg, const Common& common, const std::vector<std::string>& args, std::ostream& out) {
    const auto family = ParamFamily::parse(cfg.family);
    const auto n = parse_size(cfg.n);
    const auto d = family.dimension();

    json report = {{"family", family.to_string()},
                   {"d", d},
                   {"n", n},
                   {"g_d", two_stage_penalty(d)},
                   {"g_d_asymptotic", two_stage_penalty_asymptotic(d)},
                   {"log2_unit_ball_volume", log2_unit_ball_volume(d)}};
    if (cfg.main_term_only) {
        report["main_term_bits"] = main_term(d, n, 0.0);
        report["approximate"] = true;
    } else {
        const auto integral = jeffreys_integral(family, integral_options(cfg.mc_seed, cfg.mc_rel_se));
        const auto c = JeffreysConstant::from(integral);
        report["minimax_bits"] = minimax_redundancy(d, n, c);
        report["minimax_two_stage_bits"] = minimax_two_stage(d, n, c);
        report["approximate"] = integral.source == IntegralSource::Approximate;
        report["integral"] = {{"value", integral.value},
                              {"log2_value", integral.log2_value},
                              {"rel_se", integral.rel_se},
                              {"samples", integral.samples},
                              {"source", to_string(integral.source)},
                              {"seed", cfg.mc_seed}};
    }

    json config = {{"family", cfg.family},      {"n", cfg.n},           {"json", cfg.json},
                   {"main_term_only", cfg.main_term_only}, {"mc_seed", cfg.mc_seed}, {"mc_rel_se", cfg.mc_rel_se}};
    auto meta = run_meta("bounds", args, common, config);
    meta["outputs"] = {"bounds.json"};
    write_meta(common, meta);
    write_text_file(fs::path(common.out_dir) / "bounds.json", report.dump(2) + "\n");

    if (cfg.json) {
        out << report.dump(2) << "\n";
        return kExitOk;
    }
    out << "family " << family.to_string() << "  d=" << d << "  n=" << n << "\n";
    if (cfg.main_term_only) {
        out << "main term (d/2) log2 n = " << fixed3(report["main_term_bits"].get<double>())
            << " bits  [approximate: Jeffreys integral omitted]\n";
    } else {
        const auto& in = report["integral"];
        out << "R_n     = " << fixed3(report["minimax_bits"].get<double>()) << " bits\n";
        out << "R2p_n   = " << fixed3(report["minimax_two_stage_bits"].get<double>()) << " bits\n";
        out << "integral " << in["source"].get<std::string>();
        if (in["source"] == "monte_carlo")
            out << "  log2 = " << fixed3(in["log2_value"].get<double>()) << "  rel SE "
                << fixed3(100.0 * in["rel_se"].get<double>()) << "%  (" << in["samples"].get<std::uint64_t>()
                << " samples)";
        else
            out << "  value = " << fixed3(in["value"].get<double>());
        out << "\n";
    }
    out << "g(d)    = " << fixed3(report["g_d"].get<double>()) << " bits  (0.5 log2(pi d) = "
        << fixed3(report["g_d_asymptotic"].get<double>()) << ")\n";
    if (d <= 64)
        out << "C_d     = " << fixed3(unit_ball_volume(d)) << "\n";
    else
        out << "log2 C_d = " << fixed3(log2_unit_ball_volume(d)) << "\n";
    return kExitOk;
}

// ---- curve ----------------------------------------------------------------

int cmd_curve(const CurveCfg& cfg, const Common& common, const std::vector<std::string>& args, std::ostream& out) {
    const auto family = ParamFamily::parse(cfg.family);
    const auto n = parse_size(cfg.n);
    const auto kind = curve_kind_from_string(cfg.kind);
    if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("--format must be csv or json");
    std::vector<double> grid = cfg.p0 ? std::vector<double>{*cfg.p0} : default_p0_grid();
    for (double p : grid)
        if (!(p > 0.0 && p < 1.0)) throw ConfigError("P0 must lie in (0, 1)");

    const auto d = family.dimension();
    BoundCurve curve;
    if (kind == CurveKind::MainTerm) {
        curve = main_term_curve(d, n, grid);
    } else {
        const auto c = jeffreys_constant(family, integral_options(cfg.mc_seed, IntegralOptions{}.target_rel_se));
        switch (kind) {
            case CurveKind::CondTwoStage: curve = thm1_curve(family, n, grid, c); break;
            case CurveKind::TwoStage: curve = thm2_curve(family, n, grid, c); break;
            case CurveKind::Minimax: curve = minimax_line(family, n, grid, c, false); break;
            case CurveKind::MinimaxTwoStage: curve = minimax_line(family, n, grid, c, true); break;
            case CurveKind::MainTerm: break;
        }
    }

    const std::string file = cfg.format == "csv" ? "curve.csv" : "curve.json";
    json config = {{"family", cfg.family}, {"n", cfg.n}, {"kind", cfg.kind}, {"format", cfg.format},
                   {"mc_seed", cfg.mc_seed}};
    config["p0"] = cfg.p0 ? json(*cfg.p0) : json(nullptr);
    auto meta = run_meta("curve", args, common, config);
    meta["outputs"] = {file};
    write_meta(common, meta);
    write_text_file(fs::path(common.out_dir) / file,
                    cfg.format == "csv" ? curve.to_csv() : curve.to_json().dump(2) + "\n");

    out << to_string(curve.kind) << " curve  " << family.to_string() << "  n=" << n;
    if (curve.approximate) out << "  [approximate]";
    out << "\n";
    if (cfg.p0) {
        const auto& pt = curve.points.front();
        out << "R0 = " << fixed3(pt.r0) << " bits at P0 = " << fixed3(pt.p0) << "  (" << to_string(pt.flag) << ")\n";
    } else {
        out << curve.points.size() << " points written to " << (fs::path(common.out_dir) / file).string() << "\n";
    }
    return kExitOk;
}

// ---- eval -----------------------------------------------------------------

int resolve_m(const std::string& m, const ParamFamily& family, std::int64_t n, ModelKind kind, int m_max,
              const EvalOptions& eo) {
    if (m != "auto") {
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(m, &pos);
        } catch (const std::exception&) {
            throw ConfigError("--m must be an integer or 'auto'");
        }
        if (pos != m.size() || v < 0 || v > kMaxGridBits) throw ConfigError("--m out of range");
        return v;
    }
    OptimalMOptions mo;
    mo.m_max = m_max;
    mo.eval = eo;
    return optimal_m(family, n, MCriterion::MinimaxOverGrid, kind, mo).m;
}

LengthModel build_model(ModelKind kind, const ParamFamily& family, std::int64_t n, int m,
                        const std::string& model_theta, std::size_t max_classes) {
    switch (kind) {
        case ModelKind::IdealTheta:
            if (model_theta.empty()) throw ConfigError("the ideal model needs --model-theta");
            return LengthModel::ideal(parse_theta(family, model_theta), n);
        case ModelKind::TwoStage:
            return LengthModel::two_stage(std::make_shared<const EstimateGrid>(EstimateGrid::build(family, m)), n);
        case ModelKind::CondTwoStage:
            return LengthModel::cond_two_stage(cached_partition(family, n, m, cache_dir_from_env(), max_classes));
        case ModelKind::JeffreysMixture:
            return LengthModel::mixture(family, n);
    }
    throw InvariantError("unknown model kind");
}

bool is_two_stage(ModelKind k) { return k == ModelKind::TwoStage || k == ModelKind::CondTwoStage; }

int cmd_eval(const EvalCfg& cfg, const Common& common, const std::vector<std::string>& args, std::ostream& out) {
    const auto family = ParamFamily::parse(cfg.family);
    const auto n = parse_size(cfg.n);
    const auto kind = model_kind_from_string(cfg.model);
    if (cfg.samples == 0 && cfg.theta.empty()) throw ConfigError("eval needs --theta or --samples");
    if (cfg.samples > 0 && kind == ModelKind::IdealTheta) throw ConfigError("empirical curves need a universal model");
    if (cfg.m_max < 1 || cfg.m_max > 20) throw ConfigError("--m-max must lie in [1, 20]");

    EvalOptions eo;
    eo.max_classes = cfg.max_classes;
    eo.allow_monte_carlo = !cfg.no_mc;
    eo.mc_samples = cfg.mc_samples;
    eo.seed = common.seed;

    json config = {{"family", cfg.family},       {"n", cfg.n},           {"model", cfg.model},
                   {"m", cfg.m},                 {"m_max", cfg.m_max},   {"theta", cfg.theta},
                   {"model_theta", cfg.model_theta}, {"samples", cfg.samples}, {"r0", cfg.r0},
                   {"mc_samples", cfg.mc_samples}, {"max_classes", cfg.max_classes}, {"no_mc", cfg.no_mc}};
    json result = {{"family", family.to_string()}, {"n", n}, {"model", to_string(kind)}};

    if (cfg.samples > 0) {
        std::vector<double> r0_grid;
        if (!cfg.r0.empty()) {
            r0_grid = parse_doubles(cfg.r0);
        } else {
            const double top = std::ceil(static_cast<double>(family.dimension()) / 2.0 * std::log2(static_cast<double>(n))) + 3.0;
            for (int i = 0; i * 0.05 <= top + 1e-12; ++i) r0_grid.push_back(i * 0.05);
        }
        EmpiricalOptions opts;
        opts.threads = common.threads;
        opts.m_max = cfg.m_max;
        opts.eval = eo;
        if (is_two_stage(kind) && cfg.m != "auto") opts.m = resolve_m(cfg.m, family, n, kind, cfg.m_max, eo);
        const auto curve = empirical_curve(family, n, kind, cfg.samples, common.seed, r0_grid, opts);

        std::string csv = "series,n,p0_or_r0,value,ci\n";
        const std::string series = "empirical_" + to_string(kind);
        for (const auto& pt : curve.points)
            csv += series + ',' + std::to_string(n) + ',' + format_double(pt.r0) + ',' + format_double(pt.fraction) +
                   ',' + format_double(pt.ci_halfwidth) + '\n';
        result["m"] = curve.m;
        result["theta_samples"] = curve.theta_samples;
        result["redundancies"] = curve.redundancies;

        auto meta = run_meta("eval", args, common, config);
        meta["outputs"] = {"empirical.csv", "eval.json"};
        write_meta(common, meta);
        write_text_file(fs::path(common.out_dir) / "empirical.csv", csv);
        write_text_file(fs::path(common.out_dir) / "eval.json", result.dump(2) + "\n");

        double mean = 0.0;
        for (double r : curve.redundancies) mean += r;
        mean /= static_cast<double>(curve.redundancies.size());
        out << "empirical " << to_string(kind) << "  " << family.to_string() << "  n=" << n;
        if (is_two_stage(kind)) out << "  m=" << curve.m;
        out << "\n" << curve.theta_samples << " Jeffreys samples, mean redundancy " << fixed3(mean) << " bits\n";
        return kExitOk;
    }

    const auto theta = parse_theta(family, cfg.theta);
    const int m = is_two_stage(kind) ? resolve_m(cfg.m, family, n, kind, cfg.m_max, eo) : 0;
    const auto model = build_model(kind, family, n, m, cfg.model_theta, cfg.max_classes);
    const auto est = expected_redundancy(theta, model, eo);
    result["theta"] = param_to_json(theta);
    if (is_two_stage(kind)) result["m"] = m;
    result["redundancy_bits"] = est.value;
    result["mode"] = to_string(est.mode);
    result["se"] = est.se;
    result["samples"] = est.samples;
    result["mc_seed"] = est.seed;

    auto meta = run_meta("eval", args, common, config);
    meta["outputs"] = {"eval.json"};
    write_meta(common, meta);
    write_text_file(fs::path(common.out_dir) / "eval.json", result.dump(2) + "\n");

    out << to_string(kind) << "  " << family.to_string() << "  n=" << n;
    if (is_two_stage(kind)) out << "  m=" << m;
    out << "\nR_n = " << fixed3(est.value) << " bits (" << to_string(est.mode);
    if (est.mode == EstimateMode::MonteCarlo) out << ", 95% CI +/- " << fixed3(1.959963984540054 * est.se);
    out << ")\n";
    return kExitOk;
}

// ---- figures --------------------------------------------------------------

int cmd_figures(const FiguresCfg& cfg, const Common& common, const std::vector<std::string>& args,
                std::ostream& out) {
    const auto id = figure_id_from_string(cfg.id);
    if (cfg.empirical && cfg.samples < 100) throw ConfigError("--samples must be at least 100");
    FigureOptions fo;
    fo.empirical = cfg.empirical;
    fo.theta_samples = cfg.samples;
    fo.seed = common.seed;
    fo.threads = common.threads;
    auto bundle = reproduce_figure(id, fo);
    bundle.meta["run"] = run_meta("figures", args, common,
                                  {{"id", cfg.id}, {"empirical", cfg.empirical}, {"samples", cfg.samples}});
    write_bundle(bundle, common.out_dir);

    out << to_string(id) << "  " << bundle.meta["family"].get<std::string>() << "  -> " << common.out_dir << "\n";
    for (const auto& s : bundle.series) {
        out << "  " << s.file_name();
        if (s.rows.empty()) {
            out << "\n";
            continue;
        }
        if (s.name.rfind("empirical", 0) == 0) {
            out << "  (" << s.rows.size() << " R0 levels)\n";
            continue;
        }
        auto at = [&](double p0) {
            for (const auto& r : s.rows)
                if (std::abs(r.x - p0) < 1e-12) return r.value;
            return std::nan("");
        };
        out << "  R0(0.4) = " << fixed3(at(0.4)) << "  R0(0.6) = " << fixed3(at(0.6)) << "\n";
    }
    if (id == FigureId::Fig4) {
        out << "  approximate: Jeffreys integral replaced by its upper bound; g(d) = "
            << fixed3(bundle.meta["g_d"].get<double>()) << " bits\n";
        for (const auto& p : bundle.meta["per_n"])
            out << "  n=" << p["n"].get<std::int64_t>() << "  minimax ~ " << fixed3(p["minimax_bits"].get<double>())
                << " bits  overhead " << fixed3(100.0 * p["overhead_at_1_bit_per_byte"].get<double>()) << "%\n";
    }
    return kExitOk;
}

// ---- codec ----------------------------------------------------------------

std::vector<Symbol> read_symbols(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<Symbol> out;
    long long v = 0;
    while (in >> v) {
        if (v < 0 || v > 65535) throw ConfigError("symbol out of range in " + path);
        out.push_back(static_cast<Symbol>(v));
    }
    if (!in.eof()) throw ConfigError("malformed symbol file " + path);
    return out;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct RoundTrip {
    bool ok = false;
    std::size_t bits = 0;
    double ideal = 0.0;
};

RoundTrip round_trip(const SequenceSample& x, const LengthModel& model) {
    const auto bits = encode(x, model);
    const auto y = decode(bits, model, model.n());
    return {y.symbols == x.symbols, bits.bit_count, model.length(x.symbols)};
}

int cmd_codec(const CodecCfg& cfg, const Common& common, const std::vector<std::string>& args, std::ostream& out) {
    const int modes = int(cfg.roundtrip_all) + int(cfg.random > 0) + int(!cfg.encode.empty()) + int(!cfg.decode.empty());
    if (modes != 1) throw ConfigError("choose exactly one of --roundtrip-all, --random, --encode, --decode");
    json config = {{"family", cfg.family}, {"n", cfg.n},           {"model", cfg.model},     {"m", cfg.m},
                   {"theta", cfg.theta},   {"roundtrip_all", cfg.roundtrip_all}, {"random", cfg.random},
                   {"encode", cfg.encode}, {"decode", cfg.decode}, {"container", cfg.container},
                   {"symbols", cfg.symbols}};

    if (!cfg.decode.empty()) {
        if (cfg.symbols.empty()) throw ConfigError("--decode needs --symbols OUT");
        const auto bytes = read_bytes(cfg.decode);
        const auto c = read_container(bytes);
        const auto model = model_from_descriptor(c.header, c.n);
        const auto x = decode(c.payload, model, c.n);
        std::string text;
        for (std::size_t i = 0; i < x.symbols.size(); ++i) text += (i ? " " : "") + std::to_string(x.symbols[i]);
        auto meta = run_meta("codec", args, common, config);
        meta["outputs"] = {cfg.symbols};
        meta["header"] = c.header;
        write_meta(common, meta);
        write_text_file(cfg.symbols, text + "\n");
        out << "decoded " << x.size() << " symbols (" << c.payload.bit_count << " bits) -> " << cfg.symbols << "\n";
        return kExitOk;
    }

    if (cfg.family.empty()) throw ConfigError("--family is required");
    const auto family = ParamFamily::parse(cfg.family);
    const auto kind = model_kind_from_string(cfg.model);
    if (kind == ModelKind::CondTwoStage) throw ConfigError("the conditional two-stage code is not sequential");

    std::int64_t n = 0;
    std::vector<Symbol> input;
    if (!cfg.encode.empty()) {
        if (cfg.container.empty()) throw ConfigError("--encode needs --container OUT");
        input = read_symbols(cfg.encode);
        if (input.empty()) throw ConfigError("empty input sequence");
        n = static_cast<std::int64_t>(input.size());
    } else {
        if (cfg.n.empty()) throw ConfigError("--n is required");
        n = parse_size(cfg.n);
    }
    EvalOptions eo;
    const int m = kind == ModelKind::TwoStage ? resolve_m(cfg.m, family, n, kind, 8, eo) : 0;
    const auto model = build_model(kind, family, n, m, cfg.theta, kDefaultMaxClasses);

    if (!cfg.encode.empty()) {
        const SequenceSample x(family, input);
        Container c;
        c.header = model_descriptor(model);
        c.n = n;
        c.payload = encode(x, model);
        auto meta = run_meta("codec", args, common, config);
        meta["outputs"] = {cfg.container};
        meta["header"] = c.header;
        write_meta(common, meta);
        const auto bytes = write_container(c);
        std::ofstream f(cfg.container, std::ios::binary);
        if (!f) throw ConfigError("cannot open " + cfg.container);
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out << "encoded " << n << " symbols into " << c.payload.bit_count << " bits (ideal "
            << fixed3(model.length(x.symbols)) << ") -> " << cfg.container << "\n";
        return kExitOk;
    }

    std::uint64_t total = 0, ok = 0, within = 0;
    double worst_excess = -1e300;
    auto account = [&](const RoundTrip& r) {
        ++total;
        ok += r.ok;
        const double excess = static_cast<double>(r.bits) - std::ceil(r.ideal - 1e-9);
        within += excess <= 2.0;
        worst_excess = std::max(worst_excess, excess);
    };
    if (cfg.roundtrip_all) {
        const double count = std::pow(static_cast<double>(family.alphabet_size()), static_cast<double>(n));
        if (count > 1 << 20) throw IntractableError("--roundtrip-all is limited to 2^20 sequences");
        std::vector<Symbol> x(static_cast<std::size_t>(n), 0);
        const auto k = static_cast<Symbol>(family.alphabet_size());
        for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(count); ++i) {
            std::uint64_t v = i;
            for (std::int64_t j = n - 1; j >= 0; --j) {
                x[static_cast<std::size_t>(j)] = static_cast<Symbol>(v % k);
                v /= k;
            }
            account(round_trip(SequenceSample(family, x), model));
        }
    } else {
        const JeffreysSampler sampler(family);
        for (std::uint64_t i = 0; i < cfg.random; ++i) {
            Rng rng(derive_seed(common.seed, i));
            const auto theta = kind == ModelKind::IdealTheta ? model.theta() : sampler.draw(rng);
            account(round_trip(SequenceSample(family, sample_sequence(theta, n, rng)), model));
        }
    }
    json summary = {{"total", total}, {"ok", ok}, {"within_ceil_plus_2", within}, {"worst_excess_bits", worst_excess}};
    if (kind == ModelKind::TwoStage) summary["m"] = m;
    auto meta = run_meta("codec", args, common, config);
    meta["summary"] = summary;
    write_meta(common, meta);
    out << ok << "/" << total << " round-trips OK\n";
    out << within << "/" << total << " within ceil(ideal) + 2 bits (worst excess " << fixed3(worst_excess) << ")\n";
    return ok == total && within == total ? kExitOk : kExitInvariant;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out_dir, "Output directory for meta.json and data files")->capture_default_str();
    sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"redlab: finite-length redundancy of universal source codes", "redlab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");

    Common common;
    BoundsCfg bounds;
    CurveCfg curve;
    EvalCfg eval;
    FiguresCfg figures;
    CodecCfg codec;

    auto* b = app.add_subcommand("bounds", "Minimax redundancy, two-stage penalty and the Jeffreys constant");
    b->add_option("--family", bounds.family, "Family spec kind:k, e.g. memoryless:3 or markov1:2")->required();
    b->add_option("--n", bounds.n, "Sequence length; kB/MB suffixes are 1024 multiples")->required();
    b->add_flag("--json", bounds.json, "Print the report as JSON with full precision");
    b->add_flag("--main-term-only", bounds.main_term_only, "Skip the Jeffreys integral; report (d/2) log2 n and g(d)");
    b->add_option("--mc-seed", bounds.mc_seed, "Seed of the Monte Carlo integral")->capture_default_str();
    b->add_option("--mc-rel-se", bounds.mc_rel_se, "Target relative SE of the Monte Carlo integral")
        ->check(CLI::Range(1e-6, 0.5))
        ->capture_default_str();
    add_common(b, common);

    auto* c = app.add_subcommand("curve", "Probability bound curve R0(P0)");
    c->add_option("--family", curve.family, "Family spec kind:k")->required();
    c->add_option("--n", curve.n, "Sequence length")->required();
    c->add_option("--kind", curve.kind, "thm1 | thm2 | minimax | minimax2p | main-term")->capture_default_str();
    c->add_option("--p0", curve.p0, "Single P0 in (0,1); default is the grid 0.01..0.99");
    c->add_option("--format", curve.format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    c->add_option("--mc-seed", curve.mc_seed, "Seed of the Monte Carlo integral")->capture_default_str();
    add_common(c, common);

    auto* e = app.add_subcommand("eval", "Expected redundancy of a code, at one parameter or over Jeffreys samples");
    e->add_option("--family", eval.family, "Family spec kind:k")->required();
    e->add_option("--n", eval.n, "Sequence length")->required();
    e->add_option("--model", eval.model, "ideal | two_stage | cond_two_stage | mixture")->capture_default_str();
    e->add_option("--m", eval.m, "Grid bits for two-stage models, or auto")->capture_default_str();
    e->add_option("--m-max", eval.m_max, "Largest m searched by auto")->capture_default_str();
    e->add_option("--theta", eval.theta, "Source parameter: probabilities, row-major (one value = Bernoulli P(1))");
    e->add_option("--model-theta", eval.model_theta, "Coding parameter of the ideal model");
    e->add_option("--samples", eval.samples, "Jeffreys samples for an empirical exceedance curve (>= 100)");
    e->add_option("--r0", eval.r0, "Comma-separated R0 levels for the empirical curve");
    e->add_option("--mc-samples", eval.mc_samples, "Sequences per Monte Carlo estimate")->capture_default_str();
    e->add_option("--max-classes", eval.max_classes, "Type-class budget for exact evaluation")->capture_default_str();
    e->add_flag("--no-mc", eval.no_mc, "Fail instead of falling back to Monte Carlo");
    add_common(e, common);

    auto* f = app.add_subcommand("figures", "Reproduce a figure as a dataset bundle");
    f->add_option("--id", figures.id, "fig1 | fig2 | fig3 | fig4")->required();
    f->add_flag("--empirical", figures.empirical, "Add empirical curves at reduced n (fig1..fig3)");
    f->add_option("--samples", figures.samples, "Jeffreys samples per empirical curve")->capture_default_str();
    add_common(f, common);

    auto* k = app.add_subcommand("codec", "Arithmetic-coder round trips and container encode/decode");
    k->add_option("--family", codec.family, "Family spec kind:k");
    k->add_option("--n", codec.n, "Sequence length (round-trip modes)");
    k->add_option("--model", codec.model, "ideal | two_stage | mixture")->capture_default_str();
    k->add_option("--m", codec.m, "Grid bits for two_stage, or auto")->capture_default_str();
    k->add_option("--theta", codec.theta, "Parameter of the ideal model");
    k->add_flag("--roundtrip-all", codec.roundtrip_all, "Round-trip every sequence of length n");
    k->add_option("--random", codec.random, "Round-trip this many random sequences");
    k->add_option("--encode", codec.encode, "Encode a whitespace-separated symbol file");
    k->add_option("--decode", codec.decode, "Decode a container file");
    k->add_option("--container", codec.container, "Container output path for --encode");
    k->add_option("--symbols", codec.symbols, "Symbol output path for --decode");
    add_common(k, common);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (b->parsed()) return cmd_bounds(bounds, common, args, out);
        if (c->parsed()) return cmd_curve(curve, common, args, out);
        if (e->parsed()) return cmd_eval(eval, common, args, out);
        if (f->parsed()) return cmd_figures(figures, common, args, out);
        if (k->parsed()) return cmd_codec(codec, common, args, out);
        throw InvariantError("no subcommand dispatched");
    } catch (const IntractableError& ex) {
        err << "intractable: " << ex.what() << "\n";
        if (b->parsed() || c->parsed()) err << "hint: use --main-term-only (or --kind main-term)\n";
        return kExitIntractable;
    } catch (const InvariantError& ex) {
        err << "internal error: " << ex.what() << "\n";
        return kExitInvariant;
    } catch (const Error& ex) {
        err << "error: " << ex.what() << "\n";
        return ex.kind() == ErrorKind::Intractable ? kExitIntractable
               : ex.kind() == ErrorKind::Invariant ? kExitInvariant
                                                   : kExitConfig;
    } catch (const std::exception& ex) {
        err << "internal error: " << ex.what() << "\n";
        return kExitInvariant;
    }
}

}  // namespace redlab::cli
