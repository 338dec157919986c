#include "redlab/serialize.hpp"

#include <cstdlib>
#include <fstream>

#include "redlab/error.hpp"

namespace redlab {

namespace {

const char* kind_name(SourceKind kind) { return kind == SourceKind::Memoryless ? "memoryless" : "markov1"; }

template <class F>
auto json_guard(const char* what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed ") + what + " JSON: " + e.what());
    }
}

}  // namespace

nlohmann::json family_to_json(const ParamFamily& family) {
    return {{"kind", kind_name(family.kind())}, {"k", family.alphabet_size()}};
}

ParamFamily family_from_json(const nlohmann::json& j) {
    return json_guard("family", [&] {
        const auto kind = j.at("kind").get<std::string>();
        const int k = j.at("k").get<int>();
        if (kind == "memoryless") return ParamFamily::memoryless(k);
        if (kind == "markov1") return ParamFamily::markov1(k);
        throw ConfigError("unknown family kind '" + kind + "'");
    });
}

nlohmann::json param_to_json(const ParamVector& theta) {
    auto j = family_to_json(theta.family());
    j["probs"] = std::vector<double>(theta.probs().begin(), theta.probs().end());
    return j;
}

ParamVector param_from_json(const nlohmann::json& j) {
    return json_guard("parameter", [&] {
        return ParamVector(family_from_json(j), j.at("probs").get<std::vector<double>>());
    });
}

nlohmann::json grid_to_json(const EstimateGrid& grid) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : grid.points()) pts.push_back(std::vector<double>(p.probs().begin(), p.probs().end()));
    return {
        {"format_version", kCacheFormatVersion},
        {"family", family_to_json(grid.family())},
        {"m", grid.bits()},
        {"points", std::move(pts)},
    };
}

EstimateGrid grid_from_json(const nlohmann::json& j) {
    return json_guard("grid", [&] {
        if (j.at("format_version").get<int>() != kCacheFormatVersion)
            throw ConfigError("unsupported grid format version");
        const auto family = family_from_json(j.at("family"));
        std::vector<ParamVector> points;
        for (const auto& p : j.at("points")) points.emplace_back(family, p.get<std::vector<double>>());
        auto grid = EstimateGrid::from_points(family, std::move(points));
        if (grid.bits() != j.at("m").get<int>()) throw ConfigError("grid size does not match m");
        return grid;
    });
}

nlohmann::json partition_to_json(const Partition& partition) {
    return {
        {"format_version", kCacheFormatVersion},
        {"n", partition.n()},
        {"exact", partition.exact()},
        {"grid", grid_to_json(partition.grid())},
        {"masses", partition.masses()},
    };
}

Partition partition_from_json(const nlohmann::json& j) {
    return json_guard("partition", [&] {
        if (j.at("format_version").get<int>() != kCacheFormatVersion)
            throw ConfigError("unsupported partition format version");
        auto grid = std::make_shared<const EstimateGrid>(grid_from_json(j.at("grid")));
        return Partition::from_masses(std::move(grid), j.at("n").get<std::int64_t>(),
                                      j.at("masses").get<std::vector<double>>(), j.at("exact").get<bool>());
    });
}

std::optional<std::filesystem::path> cache_dir_from_env() {
    const char* env = std::getenv("REDLAB_CACHE_DIR");
    if (env == nullptr || *env == '\0') return std::nullopt;
    return std::filesystem::path(env);
}

std::shared_ptr<const Partition> cached_partition(const ParamFamily& family, std::int64_t n, int m,
                                                  const std::optional<std::filesystem::path>& cache_dir,
                                                  std::size_t max_classes) {
    std::filesystem::path file;
    if (cache_dir) {
        file = *cache_dir / ("partition_" + std::string(kind_name(family.kind())) + "_k" +
                             std::to_string(family.alphabet_size()) + "_n" + std::to_string(n) + "_m" +
                             std::to_string(m) + ".json");
        std::ifstream in(file);
        if (in) {
            try {
                auto p = partition_from_json(nlohmann::json::parse(in));
                if (p.exact() && p.n() == n && p.grid().bits() == m && p.grid().family() == family)
                    return std::make_shared<const Partition>(std::move(p));
            } catch (const std::exception&) {
                // Stale or corrupt entry; rebuild below and overwrite.
            }
        }
    }
    auto grid = std::make_shared<const EstimateGrid>(EstimateGrid::build(family, m));
    auto partition = std::make_shared<const Partition>(Partition::build(grid, n, max_classes));
    if (cache_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*cache_dir, ec);
        std::ofstream out(file);
        if (out) out << partition_to_json(*partition).dump();
    }
    return partition;
}

}  // namespace redlab
