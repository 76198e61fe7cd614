#pragma once

#include <vector>

#include "hrbm/dataset.hpp"
#include "hrbm/types.hpp"

namespace hrbm {

// Columns are +-1 patterns; class_of_column maps each column to its digit class.
struct PatternMatrix {
  Matrix xi;                        // n x p
  std::vector<int> class_of_column; // length p

  int n() const { return static_cast<int>(xi.rows()); }
  int p() const { return static_cast<int>(xi.cols()); }
};

// Smallest singular value >= tol * largest.
bool is_full_rank(const Matrix& m, double tol = 1e-8);

// One pattern per class: sign of the class mean, ties resolved to +1.
PatternMatrix class_mean_patterns(const BinaryDataset& data);

// k sub-patterns per class from Ward-linkage agglomerative clustering on the
// +-1 vectors; each sub-pattern is the sign of its cluster mean. Within a
// class, clusters are ordered by descending size, ties by lowest contained
// sample index. Rank deficiency of the result is not an error here; callers
// that need a projection network check is_full_rank().
PatternMatrix subpattern_clusters(const BinaryDataset& data, int k);

// A single agglomerative merge: cluster ids at merge time (a < b) and the
// increase in total within-cluster sum of squares it incurred.
struct WardMerge {
  int a = 0;
  int b = 0;
  double delta_sse = 0.0;
};

// Greedy Ward clustering of points (columns) down to k clusters via the
// Lance-Williams recurrence on squared Euclidean distances. Exposed for
// oracle tests; merge tie-breaks are by smallest (a, b).
struct WardResult {
  std::vector<std::vector<int>> clusters;  // member sample indices
  std::vector<WardMerge> merges;
};

WardResult ward_cluster(const Matrix& points, int k);

}  // namespace hrbm
