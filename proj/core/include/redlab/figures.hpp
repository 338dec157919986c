#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "redlab/family.hpp"

namespace redlab {

enum class FigureId { Fig1, Fig2, Fig3, Fig4 };

std::string to_string(FigureId id);
/// Accepts "fig1".."fig4" and "1".."4".
FigureId figure_id_from_string(const std::string& name);

struct FigureOptions {
    /// Adds empirical exceedance curves at reduced n (Figs. 1-3 only).
    bool empirical = false;
    std::uint64_t theta_samples = 1000;
    std::uint64_t seed = 2024;
    unsigned threads = 1;
    IntegralOptions integral;
};

/// One row of the bundle CSV schema `series,n,p0_or_r0,value,ci`. A NaN ci
/// is written as an empty field.
struct SeriesRow {
    double x = 0.0;
    double value = 0.0;
    double ci = 0.0;
};

struct Series {
    std::string name;  // e.g. "thm1", "minimax", "empirical_c2p"
    std::int64_t n = 0;
    std::vector<SeriesRow> rows;

    std::string file_name() const;
    std::string to_csv() const;
};

struct FigureBundle {
    FigureId id = FigureId::Fig1;
    nlohmann::json meta;
    std::vector<Series> series;

    const Series* find(const std::string& name, std::int64_t n) const;
};

FigureBundle reproduce_figure(FigureId id, const FigureOptions& opts = {});

/// Writes meta.json plus one CSV per series into `dir` (created if needed).
void write_bundle(const FigureBundle& bundle, const std::filesystem::path& dir);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Writes `text` to `path`, throwing ConfigError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace redlab
