#pragma once

// Shared surrogate data, built once per test binary.

#include <map>
#include <vector>

#include "wheelflat/features.hpp"
#include "wheelflat/flatgen.hpp"
#include "wheelflat/pipeline.hpp"

namespace fixtures {

inline const std::vector<wheelflat::AbaRecord>& default_records() {
  static const auto records = wheelflat::simulate_records(wheelflat::RunConfig{});
  return records;
}

inline const wheelflat::Dataset& original_dataset(int level) {
  static std::map<int, wheelflat::Dataset> cache;
  auto it = cache.find(level);
  if (it == cache.end()) {
    it = cache.emplace(level, wheelflat::build_dataset(default_records(), level)).first;
  }
  return it->second;
}

}  // namespace fixtures
