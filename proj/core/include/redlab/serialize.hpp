#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "redlab/codecs.hpp"
#include "redlab/family.hpp"
#include "redlab/grid.hpp"

namespace redlab {

inline constexpr int kCacheFormatVersion = 1;

/// {"kind": "memoryless"|"markov1", "k": int}
nlohmann::json family_to_json(const ParamFamily& family);
ParamFamily family_from_json(const nlohmann::json& j);

/// {"kind", "k", "probs"} with Markov matrices row-major.
nlohmann::json param_to_json(const ParamVector& theta);
ParamVector param_from_json(const nlohmann::json& j);

nlohmann::json grid_to_json(const EstimateGrid& grid);
EstimateGrid grid_from_json(const nlohmann::json& j);

/// Grid points plus cell masses; type-class membership is not stored.
nlohmann::json partition_to_json(const Partition& partition);
Partition partition_from_json(const nlohmann::json& j);

/// Directory named by REDLAB_CACHE_DIR, if set and non-empty.
std::optional<std::filesystem::path> cache_dir_from_env();

/// Exact partition for (family, n, m), read from `cache_dir` when a file with
/// a matching key and format version exists, otherwise built and stored.
std::shared_ptr<const Partition> cached_partition(const ParamFamily& family, std::int64_t n, int m,
                                                  const std::optional<std::filesystem::path>& cache_dir,
                                                  std::size_t max_classes = kDefaultMaxClasses);

}  // namespace redlab
