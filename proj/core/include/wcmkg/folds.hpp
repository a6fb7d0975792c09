#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wcmkg/data.hpp"

namespace wcmkg {

/// Disjoint spatial partition of sites into folds.
struct FoldAssignment {
  int fold_count = 0;
  std::map<std::string, int> site_to_fold;

  std::vector<std::vector<std::string>> fold_sites() const;

  /// Every site mapped exactly once, every fold non-empty.
  void validate(const std::vector<SiteSeries>& sites) const;
};

/// Clusters site coordinates with seeded k-means (k-means++ init, Lloyd
/// iterations to convergence) and maps one cluster to one fold. Folds are
/// numbered by centroid position so the labeling is stable. Deterministic
/// given the seed.
FoldAssignment assign_spatial_folds(const std::vector<SiteSeries>& sites,
                                    int fold_count, std::uint64_t seed);

}  // namespace wcmkg
