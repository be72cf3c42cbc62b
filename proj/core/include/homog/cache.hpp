#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "homog/cell.hpp"
#include "homog/config.hpp"

namespace homog {

std::uint64_t fnv1a_hash(std::string_view data);

/// Content hash over (geometry, coefficient parameters, target_h, segments);
/// any parameter change changes the key.
struct CacheKey {
  std::uint64_t hash = 0;
  std::string hex() const;
};

CacheKey cell_cache_key(const RunConfig& config);

/// On-disk text record of a cell stage: measures, both tensor forms and the
/// four nodal fields. Doubles use shortest round-trip formatting, so a cache
/// hit reproduces the cold run bit for bit.
struct CellCacheData {
  MeshMeasures measures;
  TensorPair tensor;
  std::array<std::vector<double>, 2> corrector;
  std::array<std::vector<double>, 2> auxiliary;
};

std::optional<CellCacheData> load_cell_cache(const std::string& dir, const CacheKey& key,
                                             std::size_t expected_vertices);
void store_cell_cache(const std::string& dir, const CacheKey& key, const CellSolution& cell,
                      const TensorPair& tensor);

}  // namespace homog
