#include <cmath>

#include <gtest/gtest.h>

#include "oracle/naive.hpp"
#include "redlab/bounds.hpp"
#include "redlab/error.hpp"
#include "redlab/eval.hpp"
#include "redlab/optimal_m.hpp"
#include "test_util.hpp"

using namespace redlab;

namespace {

std::shared_ptr<const EstimateGrid> grid_of(const ParamFamily& f, int m) {
    return std::make_shared<const EstimateGrid>(EstimateGrid::build(f, m));
}

double naive_redundancy(const ParamVector& theta, int n, const std::function<double(const oracle::Seq&)>& len) {
    return oracle::expected_len(theta, n, len) - oracle::entropy_enum(theta, n);
}

}  // namespace

TEST(Exact, AgreesWithNaiveEnumerationAllKinds) {
    Rng rng(31);
    for (auto f : {ParamFamily::memoryless(2), ParamFamily::memoryless(3), ParamFamily::markov1(2)}) {
        const int n = f.alphabet_size() == 3 ? 6 : 10;
        const int m = 3;
        const auto g = grid_of(f, m);
        const auto part = std::make_shared<const Partition>(Partition::build(g, n));
        const auto masses = oracle::cell_masses(g->points(), n);
        for (int rep = 0; rep < 3; ++rep) {
            const auto theta = testutil::random_theta(f, rng);
            const auto other = testutil::random_theta(f, rng);
            EvalOptions eo;
            eo.allow_monte_carlo = false;
            const auto ideal = expected_redundancy(theta, LengthModel::ideal(other, n), eo);
            EXPECT_EQ(ideal.mode, EstimateMode::Exact);
            EXPECT_NEAR(ideal.value, naive_redundancy(theta, n, [&](const oracle::Seq& x) { return -std::log2(oracle::prob(other, x)); }), 1e-9);
            EXPECT_NEAR(expected_redundancy(theta, LengthModel::two_stage(g, n), eo).value,
                        naive_redundancy(theta, n, [&](const oracle::Seq& x) { return oracle::two_stage_len(g->points(), m, x); }), 1e-9);
            EXPECT_NEAR(expected_redundancy(theta, LengthModel::cond_two_stage(part), eo).value,
                        naive_redundancy(theta, n, [&](const oracle::Seq& x) {
                            return oracle::cond_two_stage_len(g->points(), masses, m, x);
                        }), 1e-9);
            EXPECT_NEAR(expected_redundancy(theta, LengthModel::mixture(f, n), eo).value,
                        naive_redundancy(theta, n, [&](const oracle::Seq& x) { return oracle::mixture_len(f, x); }), 1e-9);
        }
    }
}

TEST(Exact, KlIdentity) {
    Rng rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        const auto f = testutil::random_family(rng, 4, 3);
        const auto theta = testutil::random_theta(f, rng);
        const auto other = testutil::random_theta(f, rng);
        const int n = 5;
        const double r = expected_redundancy(theta, LengthModel::ideal(other, n)).value;
        EXPECT_NEAR(r, oracle::kl_enum(theta, other, n), 1e-9) << f.to_string();
        if (f.kind() == SourceKind::Memoryless) {
            double kl = 0.0;
            for (int j = 0; j < f.alphabet_size(); ++j)
                kl += theta.prob(0, j) * std::log2(theta.prob(0, j) / other.prob(0, j));
            EXPECT_NEAR(r, n * kl, 1e-9);
        }
    }
    const auto theta = ParamVector::bernoulli(0.37);
    EXPECT_NEAR(expected_redundancy(theta, LengthModel::ideal(theta, 40)).value, 0.0, 1e-9);
}

TEST(MonteCarlo, AgreesWithExactWithinError) {
    const auto f = ParamFamily::memoryless(2);
    const auto theta = ParamVector::bernoulli(0.2);
    const auto model = LengthModel::mixture(f, 30);
    const auto exact = expected_redundancy(theta, model);
    EvalOptions eo;
    eo.max_classes = 5;  // force Monte Carlo
    eo.mc_samples = 20000;
    eo.seed = 17;
    const auto mc = expected_redundancy(theta, model, eo);
    EXPECT_EQ(mc.mode, EstimateMode::MonteCarlo);
    EXPECT_GT(mc.se, 0.0);
    EXPECT_NEAR(mc.value, exact.value, 4.0 * mc.se);
    const auto again = expected_redundancy(theta, model, eo);
    EXPECT_EQ(again.value, mc.value);
    eo.allow_monte_carlo = false;
    EXPECT_THROW(expected_redundancy(theta, model, eo), IntractableError);
}

TEST(Wilson, KnownValues) {
    const auto a = wilson_interval(0, 10);
    EXPECT_NEAR(a.lower, 0.0, 1e-12);
    EXPECT_NEAR(a.upper, 0.2775, 1e-4);
    const auto b = wilson_interval(50, 100);
    EXPECT_NEAR(b.lower, 0.4038, 1e-4);
    EXPECT_NEAR(b.upper, 0.5962, 1e-4);
    EXPECT_THROW(wilson_interval(0, 0), ConfigError);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 7, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                     if (i == 5) throw ConfigError("boom");
                 }),
                 ConfigError);
}

TEST(Empirical, TailFunctionProperties) {
    std::vector<double> r0;
    for (int i = 0; i <= 60; ++i) r0.push_back(i * 0.1);
    const auto curve = empirical_curve(ParamFamily::memoryless(2), 12, ModelKind::CondTwoStage, 300, 5, r0);
    ASSERT_EQ(curve.points.size(), r0.size());
    EXPECT_DOUBLE_EQ(curve.points[0].fraction, 1.0);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        EXPECT_LE(curve.points[i].fraction, curve.points[i - 1].fraction);
        EXPECT_LE(curve.points[i].ci_lower, curve.points[i].fraction);
        EXPECT_GE(curve.points[i].ci_upper, curve.points[i].fraction);
    }
    for (double r : curve.redundancies) EXPECT_GE(r, -1e-9);
}

TEST(Empirical, ThreadCountDoesNotChangeResults) {
    const std::vector<double> r0{0.5, 1.0, 2.0};
    EmpiricalOptions one, many;
    many.threads = 6;
    for (auto f : {ParamFamily::memoryless(3), ParamFamily::markov1(2)}) {
        const auto a = empirical_curve(f, 6, ModelKind::JeffreysMixture, 200, 99, r0, one);
        const auto b = empirical_curve(f, 6, ModelKind::JeffreysMixture, 200, 99, r0, many);
        EXPECT_EQ(a.redundancies, b.redundancies);
    }
}

TEST(Empirical, RejectsBadInput) {
    const std::vector<double> r0{1.0};
    EXPECT_THROW(empirical_curve(ParamFamily::memoryless(2), 8, ModelKind::CondTwoStage, 99, 1, r0), ConfigError);
    EXPECT_THROW(empirical_curve(ParamFamily::memoryless(2), 8, ModelKind::IdealTheta, 100, 1, r0), ConfigError);
}

TEST(OptimalM, MinimaxSearch) {
    OptimalMOptions o;
    o.m_max = 6;
    const auto best = optimal_m(ParamFamily::memoryless(2), 16, MCriterion::MinimaxOverGrid, ModelKind::CondTwoStage, o);
    ASSERT_EQ(best.per_m.size(), 6u);
    for (double v : best.per_m) EXPECT_GE(v, best.achieved);
    EXPECT_EQ(best.per_m[best.m - 1], best.achieved);
}

TEST(OptimalM, ReturnsFirstMinimum) {
    OptimalMOptions o;
    o.m_max = 8;
    o.theta = ParamVector::bernoulli(0.5);
    const auto best = optimal_m(ParamFamily::memoryless(2), 4, MCriterion::ExpectedAt, ModelKind::TwoStage, o);
    for (int m = o.m_min; m < best.m; ++m) EXPECT_GT(best.per_m[m - o.m_min], best.achieved);
}

TEST(OptimalM, Validation) {
    OptimalMOptions o;
    EXPECT_THROW(optimal_m(ParamFamily::memoryless(2), 8, MCriterion::ExpectedAt, ModelKind::TwoStage, o), ConfigError);
    EXPECT_THROW(optimal_m(ParamFamily::memoryless(2), 8, MCriterion::MinimaxOverGrid, ModelKind::JeffreysMixture, o),
                 ConfigError);
    o.m_max = 21;
    EXPECT_THROW(optimal_m(ParamFamily::memoryless(2), 8, MCriterion::MinimaxOverGrid, ModelKind::TwoStage, o),
                 ConfigError);
    EXPECT_EQ(bernoulli_theta_grid().size(), 99u);
    EXPECT_EQ(default_theta_set(ParamFamily::markov1(2)).size(), 64u);
}

TEST(Saturation, MixtureMaxNearMinimax) {
    const auto f = ParamFamily::memoryless(2);
    for (std::int64_t n : {8, 64}) {
        const auto model = LengthModel::mixture(f, n);
        double worst = 0.0;
        for (const auto& t : bernoulli_theta_grid()) worst = std::max(worst, expected_redundancy(t, model).value);
        EXPECT_NEAR(worst, minimax_redundancy(f, n), 0.5);
    }
}
