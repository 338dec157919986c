// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "oracle/naive.hpp"
#include "redlab/bounds.hpp"
#include "redlab/coder.hpp"
#include "redlab/codecs.hpp"
#include "redlab/eval.hpp"
#include "redlab/figures.hpp"
#include "redlab/optimal_m.hpp"

using namespace redlab;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

template <class... A>
std::string fmtn(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

std::shared_ptr<const EstimateGrid> grid_of(const ParamFamily& f, int m) {
    return std::make_shared<const EstimateGrid>(EstimateGrid::build(f, m));
}

Outcome c1() {
    const auto f = ParamFamily::memoryless(2);
    const double r = minimax_redundancy(f, 8), r2 = minimax_two_stage(f, 8), g = two_stage_penalty(1);
    return {std::abs(r - 1.826) <= 0.02 && std::abs(r2 - 2.873) <= 0.05 && std::abs(g - 1.047) <= 0.002 &&
                std::abs(r - 1.82) <= 0.02 && std::abs(r2 - 2.86) <= 0.05 && std::abs(g - 1.048) <= 0.002,
            fmtn("Rbar_8 = %.3f (target 1.82), Rbar2p_8 = %.3f (target 2.86), g(1) = %.3f (target 1.048)", r, r2, g)};
}

Outcome c2() {
    const auto f = ParamFamily::memoryless(3);
    struct Case {
        std::int64_t n;
        double p0, want;
    };
    const Case cases[] = {{32, 0.4, 4.26}, {128, 0.4, 6.26}, {32, 0.6, 3.67}, {128, 0.6, 5.68}};
    Outcome o;
    for (const auto& c : cases) {
        const double p[] = {c.p0};
        const double r0 = thm1_curve(f, c.n, p).points.front().r0;
        o.pass = o.pass && std::abs(r0 - c.want) <= 0.01;
        o.detail += fmtn("(n=%lld, P0=%.1f) -> %.3f [target %.2f] ", static_cast<long long>(c.n), c.p0, r0, c.want);
    }
    return o;
}

Outcome c3() {
    const auto f = ParamFamily::markov1(2);
    const auto c = jeffreys_constant(f);
    const double r = minimax_redundancy(f.dimension(), 12, c);
    return {c.source == IntegralSource::MonteCarlo && c.rel_se <= 0.005 && std::abs(r - 2.794) <= 0.05,
            fmtn("Rbar_12(markov1:2) = %.3f (target 2.794), Monte Carlo rel SE %.3f%%", r, 100.0 * c.rel_se)};
}

Outcome c4() {
    const double g = two_stage_penalty(65280), a = 0.5 * std::log2(M_PI * 65280.0);
    return {std::abs(g - 8.82) <= 0.05 && std::abs(g - a) <= 0.05,
            fmtn("g(65280) = %.3f, (1/2)log2(pi d) = %.3f, target 8.82", g, a)};
}

double kraft(const LengthModel& model, int k, int n) {
    return oracle::kraft_sum(k, n, [&](const oracle::Seq& x) { return model.length(x); });
}

Outcome c5() {
    const auto f = ParamFamily::memoryless(2);
    Outcome o;
    const double mix = kraft(LengthModel::mixture(f, 8), 2, 8);
    o.pass = std::abs(mix - 1.0) <= 1e-9;
    o.detail = fmtn("mixture %.12f;", mix);
    for (int m = 1; m <= 3; ++m) {
        const auto g = grid_of(f, m);
        const auto part = std::make_shared<const Partition>(Partition::build(g, 8));
        const double cond = kraft(LengthModel::cond_two_stage(part), 2, 8);
        const double plain = kraft(LengthModel::two_stage(g, 8), 2, 8);
        o.pass = o.pass && std::abs(cond - 1.0) <= 1e-9 && plain < 1.0;
        o.detail += fmtn(" m=%d cond %.12f plain %.6f;", m, cond, plain);
    }
    return o;
}

Outcome c6() {
    Outcome o;
    std::uint64_t checked = 0, violations = 0;
    for (auto [k, n] : {std::pair{3, 8}, std::pair{2, 16}}) {
        const auto f = ParamFamily::memoryless(k);
        for (int m = 1; m <= 6; ++m) {
            const auto g = grid_of(f, m);
            const Partition part = Partition::build(g, n);
            oracle::for_each_sequence(k, n, [&](const oracle::Seq& x) {
                ++checked;
                if (cond_two_stage_length(x, part) > two_stage_length(x, *g) + 1e-9) ++violations;
            });
        }
    }
    o.pass = violations == 0;
    o.detail = fmtn("%llu (sequence, m) pairs over 3^8 and 2^16 sequences, m = 1..6; %llu violations",
                    static_cast<unsigned long long>(checked), static_cast<unsigned long long>(violations));
    return o;
}

Outcome c7() {
    Outcome o;
    double worst = 0.0;
    int cases = 0;
    Rng rng(7);
    struct Scope {
        ParamFamily family;
        int n_max;
    };
    const Scope scopes[] = {{ParamFamily::memoryless(2), 16}, {ParamFamily::markov1(2), 16},
                            {ParamFamily::memoryless(3), 8}, {ParamFamily::markov1(3), 8}};
    EvalOptions eo;
    eo.allow_monte_carlo = false;
    for (const auto& s : scopes) {
        const int m = 3;
        const auto g = grid_of(s.family, m);
        for (int n = 1; n <= s.n_max; ++n) {
            std::vector<double> p(static_cast<std::size_t>(s.family.rows() * s.family.alphabet_size()));
            std::vector<double> draw(s.family.alphabet_size());
            for (int r = 0; r < s.family.rows(); ++r) {
                double sum = 0.0;
                for (auto& v : draw) sum += (v = 0.05 + rng.uniform());
                for (int j = 0; j < s.family.alphabet_size(); ++j)
                    p[r * s.family.alphabet_size() + j] = draw[j] / sum;
            }
            const ParamVector theta(s.family, p);
            const ParamVector other = g->point(g->size() / 3);
            const auto part = std::make_shared<const Partition>(Partition::build(g, n));
            const auto masses = oracle::cell_masses(g->points(), n);
            const double h = oracle::entropy_enum(theta, n);
            const auto naive = [&](const std::function<double(const oracle::Seq&)>& len) {
                return oracle::expected_len(theta, n, len) - h;
            };
            const std::pair<LengthModel, std::function<double(const oracle::Seq&)>> kinds[] = {
                {LengthModel::ideal(other, n), [&](const oracle::Seq& x) { return -std::log2(oracle::prob(other, x)); }},
                {LengthModel::two_stage(g, n), [&](const oracle::Seq& x) { return oracle::two_stage_len(g->points(), m, x); }},
                {LengthModel::cond_two_stage(part),
                 [&](const oracle::Seq& x) { return oracle::cond_two_stage_len(g->points(), masses, m, x); }},
                {LengthModel::mixture(s.family, n), [&](const oracle::Seq& x) { return oracle::mixture_len(s.family, x); }},
            };
            for (const auto& [model, len] : kinds) {
                const double diff = std::abs(expected_redundancy(theta, model, eo).value - naive(len));
                worst = std::max(worst, diff);
                ++cases;
            }
        }
    }
    o.pass = worst <= 1e-9;
    o.detail = fmtn("%d cases (memoryless and Markov, k=2 n<=16, k=3 n<=8, 4 kinds); max |diff| = %.2e", cases, worst);
    return o;
}

Outcome c8() {
    const auto f = ParamFamily::memoryless(2);
    std::vector<double> p0;
    for (int i = 2; i <= 9; ++i) p0.push_back(i / 10.0);
    const auto bound = thm1_curve(f, 16, p0);
    std::vector<double> r0;
    for (const auto& pt : bound.points) r0.push_back(pt.r0);
    EmpiricalOptions eo;
    eo.threads = std::max(1u, std::thread::hardware_concurrency());
    const auto curve = empirical_curve(f, 16, ModelKind::CondTwoStage, 1000, 2024, r0, eo);
    Outcome o;
    o.detail = fmtn("m = %d;", curve.m);
    for (std::size_t i = 0; i < p0.size(); ++i) {
        const auto pt = curve.at(r0[i]);
        o.pass = o.pass && pt.ci_upper >= p0[i];
        o.detail += fmtn(" P0=%.1f R0=%.3f frac=%.3f+%.3f;", p0[i], r0[i], pt.fraction, pt.ci_halfwidth);
    }
    return o;
}

Outcome c9() {
    const auto f = ParamFamily::memoryless(2);
    Outcome o;
    for (std::int64_t n : {8, 64}) {
        const auto model = LengthModel::mixture(f, n);
        double worst = 0.0;
        for (const auto& t : bernoulli_theta_grid()) worst = std::max(worst, expected_redundancy(t, model).value);
        const double rbar = minimax_redundancy(f, n);
        o.pass = o.pass && std::abs(worst - rbar) <= 0.5;
        o.detail += fmtn("n=%lld max %.3f vs Rbar %.3f; ", static_cast<long long>(n), worst, rbar);
    }
    return o;
}

Outcome c10() {
    const auto f = ParamFamily::memoryless(2);
    std::vector<std::pair<std::string, LengthModel>> models{{"mixture", LengthModel::mixture(f, 8)}};
    for (int m = 1; m <= 3; ++m) models.emplace_back("two_stage m=" + std::to_string(m), LengthModel::two_stage(grid_of(f, m), 8));
    Outcome o;
    for (const auto& [name, model] : models) {
        int ok = 0;
        double excess = -1e300;
        oracle::for_each_sequence(2, 8, [&](const oracle::Seq& x) {
            const auto bits = encode(SequenceSample(f, x), model);
            const double e = static_cast<double>(bits.bit_count) - std::ceil(model.length(x) - 1e-9);
            excess = std::max(excess, e);
            if (decode(bits, model, 8).symbols == x && e <= 2.0) ++ok;
        });
        o.pass = o.pass && ok == 256;
        o.detail += fmtn("%s %d/256 (worst excess %+.0f); ", name.c_str(), ok, excess);
    }
    return o;
}

Outcome c11() {
    const auto b = reproduce_figure(FigureId::Fig4);
    const auto& per_n = b.meta["per_n"];
    double main_256k = 0.0, rbar_256k = 0.0, ov_256k = 0.0, ov_16m = 0.0;
    for (const auto& row : per_n) {
        const auto n = row["n"].get<std::int64_t>();
        if (n == 256 * 1024) {
            main_256k = row["main_term_bits"].get<double>();
            rbar_256k = row["minimax_bits"].get<double>();
            ov_256k = row["overhead_at_1_bit_per_byte"].get<double>();
        }
        if (n == 16 * 1024 * 1024) ov_16m = row["overhead_at_1_bit_per_byte"].get<double>();
    }
    const bool pass = main_256k >= 1e5 && rbar_256k >= 1e5 && std::abs(100.0 * ov_256k - 38.0) <= 5.0 &&
                      std::abs(100.0 * ov_16m - 1.7) <= 5.0 && b.meta["approximate"].get<bool>();
    return {pass, fmtn("approximate; 256 kB: main term %.0f bits, minimax %.0f bits, overhead %.2f%% (target 38%%); "
                       "16 MB overhead %.3f%% (target 1.7%%)",
                       main_256k, rbar_256k, 100.0 * ov_256k, 100.0 * ov_16m)};
}

}  // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("criterion %zu: %s  %s (%.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
