#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "redlab/error.hpp"
#include "redlab/figures.hpp"

using namespace redlab;
namespace fs = std::filesystem;

namespace {

double value_at(const Series& s, double x) {
    for (const auto& r : s.rows)
        if (std::abs(r.x - x) < 1e-12) return r.value;
    return NAN;
}

}  // namespace

TEST(Figures, Fig1HasReferencePoint) {
    const auto b = reproduce_figure(FigureId::Fig1);
    const auto* s = b.find("thm1", 32);
    ASSERT_NE(s, nullptr);
    EXPECT_NEAR(value_at(*s, 0.4), 4.26, 0.01);
    EXPECT_NE(b.find("minimax", 512), nullptr);
    EXPECT_EQ(b.meta["family"], "memoryless:3");
}

TEST(Figures, Fig2MinimaxLine) {
    const auto b = reproduce_figure(FigureId::Fig2);
    const auto* s = b.find("minimax", 12);
    ASSERT_NE(s, nullptr);
    EXPECT_NEAR(s->rows.front().value, 2.794, 0.05);
    EXPECT_EQ(b.meta["constant"]["source"], "monte_carlo");
    // Monte Carlo constants carry a confidence half-width.
    EXPECT_FALSE(std::isnan(s->rows.front().ci));
}

TEST(Figures, Fig3PenaltyGap) {
    const auto b = reproduce_figure(FigureId::Fig3);
    for (std::int64_t n : {8, 64, 512, 4096}) {
        const auto* a = b.find("minimax", n);
        const auto* c = b.find("minimax2p", n);
        ASSERT_NE(a, nullptr);
        ASSERT_NE(c, nullptr);
        EXPECT_NEAR(c->rows[10].value - a->rows[10].value, 1.047, 1e-3);
        EXPECT_NE(b.find("thm2", n), nullptr);
    }
}

TEST(Figures, Fig4IsApproximate) {
    const auto b = reproduce_figure(FigureId::Fig4);
    EXPECT_TRUE(b.meta["approximate"].get<bool>());
    EXPECT_NEAR(b.meta["g_d"].get<double>(), 8.82, 0.01);
    EXPECT_EQ(b.meta["d"], 65280);
    const auto* s = b.find("main_term", 256 * 1024);
    ASSERT_NE(s, nullptr);
    for (const auto& r : s->rows) EXPECT_GE(r.value, 100000.0);
    EXPECT_EQ(b.meta["per_n"].size(), 4u);
}

TEST(Figures, EmpiricalOverlayIsSeparateSeries) {
    FigureOptions o;
    o.empirical = true;
    o.theta_samples = 200;
    const auto b = reproduce_figure(FigureId::Fig3, o);
    const auto* e = b.find("empirical_c2p", 16);
    ASSERT_NE(e, nullptr);
    EXPECT_DOUBLE_EQ(e->rows.front().value, 1.0);
    EXPECT_NE(b.find("empirical_2p", 16), nullptr);
    EXPECT_NE(b.find("thm1", 16), nullptr);
}

TEST(Figures, DeterministicAndWritten) {
    FigureOptions o;
    o.empirical = true;
    o.theta_samples = 150;
    const auto a = reproduce_figure(FigureId::Fig1, o);
    const auto b = reproduce_figure(FigureId::Fig1, o);
    ASSERT_EQ(a.series.size(), b.series.size());
    for (std::size_t i = 0; i < a.series.size(); ++i) EXPECT_EQ(a.series[i].to_csv(), b.series[i].to_csv());
    EXPECT_EQ(a.meta.dump(), b.meta.dump());

    const auto dir = fs::temp_directory_path() / "redlab_fig_test";
    fs::remove_all(dir);
    write_bundle(a, dir);
    EXPECT_TRUE(fs::exists(dir / "meta.json"));
    std::ifstream in(dir / "thm1_n32.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "series,n,p0_or_r0,value,ci");
    std::stringstream rest;
    rest << in.rdbuf();
    EXPECT_NE(rest.str().find("thm1,32,0.4,4.26"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Figures, IdParsing) {
    EXPECT_EQ(figure_id_from_string("fig2"), FigureId::Fig2);
    EXPECT_EQ(figure_id_from_string("4"), FigureId::Fig4);
    EXPECT_THROW(figure_id_from_string("fig5"), ConfigError);
}

TEST(Figures, FormatDouble) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(NAN), "");
    EXPECT_EQ(format_double(4.0), "4");
}
