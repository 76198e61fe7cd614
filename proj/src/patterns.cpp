#include "hrbm/patterns.hpp"

#include <algorithm>
#include <limits>

#include "hrbm/errors.hpp"

namespace hrbm {

bool is_full_rank(const Matrix& m, double tol) {
  if (m.cols() == 0) return false;
  if (m.cols() > m.rows()) return false;
  Eigen::BDCSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) >= tol * sv(0);
}

PatternMatrix class_mean_patterns(const BinaryDataset& data) {
  const int n_classes = data.n_classes();
  PatternMatrix out;
  out.xi.resize(data.n_visible(), n_classes);
  out.class_of_column.resize(static_cast<std::size_t>(n_classes));
  for (int cls = 0; cls < n_classes; ++cls) {
    const auto& idx = data.class_index[static_cast<std::size_t>(cls)];
    if (idx.empty()) throw EmptyClass("class " + std::to_string(cls) + " has no samples");
    Vector mean = Vector::Zero(data.n_visible());
    for (int a : idx) mean += data.samples.col(a);
    // Sums of +-1 entries are exact integers, so the sgn(0) -> +1 tie rule
    // fires exactly on balanced classes.
    out.xi.col(cls) = sign_pm(mean);
    out.class_of_column[static_cast<std::size_t>(cls)] = cls;
  }
  return out;
}

namespace {

// Condensed upper-triangle index for i < j among n items.
inline std::size_t cidx(std::size_t i, std::size_t j, std::size_t n) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

}  // namespace

WardResult ward_cluster(const Matrix& points, int k) {
  const std::size_t n = static_cast<std::size_t>(points.cols());
  if (k <= 0 || static_cast<std::size_t>(k) > n) {
    throw TooFewSamples("ward: need at least k points");
  }

  // Squared Euclidean distances, built from Gram blocks to keep the matrix
  // products large. With the Lance-Williams Ward update these stay equal to
  // 2x the SSE increase of merging the pair.
  std::vector<double> dist(n * (n - 1) / 2);
  Vector sqnorm(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) sqnorm(static_cast<Eigen::Index>(i)) = points.col(static_cast<Eigen::Index>(i)).squaredNorm();
  const std::size_t block = 256;
  for (std::size_t r0 = 0; r0 < n; r0 += block) {
    const std::size_t bs = std::min(block, n - r0);
    Matrix gram = points.middleCols(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(bs)).transpose() * points;
    for (std::size_t bi = 0; bi < bs; ++bi) {
      const std::size_t i = r0 + bi;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = sqnorm(static_cast<Eigen::Index>(i)) + sqnorm(static_cast<Eigen::Index>(j)) -
                         2.0 * gram(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(j));
        dist[cidx(i, j, n)] = std::max(0.0, d);
      }
    }
  }

  std::vector<bool> active(n, true);
  std::vector<double> size(n, 1.0);
  std::vector<std::vector<int>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};

  auto d_at = [&](std::size_t i, std::size_t j) -> double& {
    return i < j ? dist[cidx(i, j, n)] : dist[cidx(j, i, n)];
  };

  // Per-cluster nearest active neighbour cache.
  std::vector<std::size_t> nn(n, 0);
  std::vector<double> nn_dist(n, std::numeric_limits<double>::infinity());
  auto recompute_nn = [&](std::size_t i) {
    nn_dist[i] = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      const double d = d_at(i, j);
      if (d < nn_dist[i] || (d == nn_dist[i] && j < nn[i])) {
        nn_dist[i] = d;
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) recompute_nn(i);

  WardResult result;
  std::size_t n_active = n;
  while (n_active > static_cast<std::size_t>(k)) {
    // Global minimum pair; ties broken by the smallest (a, b).
    double best = std::numeric_limits<double>::infinity();
    std::size_t a = 0, b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const std::size_t lo = std::min(i, nn[i]);
      const std::size_t hi = std::max(i, nn[i]);
      if (nn_dist[i] < best ||
          (nn_dist[i] == best && (lo < a || (lo == a && hi < b)))) {
        best = nn_dist[i];
        a = lo;
        b = hi;
      }
    }

    result.merges.push_back({static_cast<int>(a), static_cast<int>(b), 0.5 * best});

    // Merge b into a (a < b), then Lance-Williams updates toward every
    // other active cluster.
    const double na = size[a], nb = size[b], dab = d_at(a, b);
    for (std::size_t j2 = 0; j2 < n; ++j2) {
      if (!active[j2] || j2 == a || j2 == b) continue;
      const double nj = size[j2];
      const double updated = ((na + nj) * d_at(a, j2) + (nb + nj) * d_at(b, j2) - nj * dab) /
                             (na + nb + nj);
      d_at(a, j2) = updated;
    }
    active[b] = false;
    size[a] += size[b];
    members[a].insert(members[a].end(), members[b].begin(), members[b].end());
    members[b].clear();
    --n_active;
    if (n_active == static_cast<std::size_t>(k)) break;

    recompute_nn(a);
    for (std::size_t j2 = 0; j2 < n; ++j2) {
      if (!active[j2] || j2 == a) continue;
      if (nn[j2] == a || nn[j2] == b) {
        recompute_nn(j2);
      } else {
        const double d = d_at(a, j2);
        if (d < nn_dist[j2] || (d == nn_dist[j2] && a < nn[j2])) {
          nn_dist[j2] = d;
          nn[j2] = a;
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) {
      std::sort(members[i].begin(), members[i].end());
      result.clusters.push_back(std::move(members[i]));
    }
  }
  return result;
}

PatternMatrix subpattern_clusters(const BinaryDataset& data, int k) {
  if (k < 1) throw TooFewSamples("subpattern count must be positive");
  const int n_classes = data.n_classes();
  PatternMatrix out;
  out.xi.resize(data.n_visible(), static_cast<Eigen::Index>(n_classes) * k);
  out.class_of_column.resize(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(k));

  int col = 0;
  for (int cls = 0; cls < n_classes; ++cls) {
    const auto& idx = data.class_index[static_cast<std::size_t>(cls)];
    if (idx.empty()) throw EmptyClass("class " + std::to_string(cls) + " has no samples");
    if (static_cast<int>(idx.size()) < k) {
      throw TooFewSamples("class " + std::to_string(cls) + " has " +
                          std::to_string(idx.size()) + " samples < k=" + std::to_string(k));
    }

    std::vector<std::vector<int>> clusters;
    if (k == 1) {
      clusters.push_back(std::vector<int>(idx.begin(), idx.end()));
      std::sort(clusters[0].begin(), clusters[0].end());
    } else {
      Matrix pts(data.n_visible(), static_cast<Eigen::Index>(idx.size()));
      for (int j = 0; j < static_cast<int>(idx.size()); ++j) {
        pts.col(j) = data.samples.col(idx[static_cast<std::size_t>(j)]);
      }
      WardResult wr = ward_cluster(pts, k);
      for (auto& local : wr.clusters) {
        std::vector<int> global;
        global.reserve(local.size());
        for (int li : local) global.push_back(idx[static_cast<std::size_t>(li)]);
        std::sort(global.begin(), global.end());
        clusters.push_back(std::move(global));
      }
    }

    // Deterministic column order: descending size, ties by lowest sample index.
    std::sort(clusters.begin(), clusters.end(),
              [](const std::vector<int>& x, const std::vector<int>& y) {
                if (x.size() != y.size()) return x.size() > y.size();
                return x.front() < y.front();
              });

    for (const auto& members : clusters) {
      Vector mean = Vector::Zero(data.n_visible());
      for (int a : members) mean += data.samples.col(a);
      out.xi.col(col) = sign_pm(mean);
      out.class_of_column[static_cast<std::size_t>(col)] = cls;
      ++col;
    }
  }
  return out;
}

}  // namespace hrbm
