#include <doctest.h>

#include <algorithm>

#include "hrbm/errors.hpp"
#include "hrbm/patterns.hpp"
#include "test_util.hpp"

using namespace hrbm;

namespace {

BinaryDataset dataset_from(const Matrix& samples, const std::vector<int>& labels) {
  BinaryDataset ds;
  ds.samples = samples;
  ds.labels = labels;
  int n_classes = 0;
  for (int l : labels) n_classes = std::max(n_classes, l + 1);
  ds.class_index.assign(static_cast<std::size_t>(n_classes), {});
  for (int a = 0; a < static_cast<int>(labels.size()); ++a) {
    ds.class_index[static_cast<std::size_t>(labels[a])].push_back(a);
  }
  return ds;
}

// Brute-force Ward oracle: the SSE increase of merging two clusters, from the
// raw member vectors.
double delta_sse(const Matrix& pts, const std::vector<int>& a, const std::vector<int>& b) {
  auto centroid = [&](const std::vector<int>& c) {
    Vector m = Vector::Zero(pts.rows());
    for (int i : c) m += pts.col(i);
    return Vector(m / static_cast<double>(c.size()));
  };
  const Vector ca = centroid(a), cb = centroid(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  return na * nb / (na + nb) * (ca - cb).squaredNorm();
}

}  // namespace

TEST_CASE("class mean of a single sample is the sample") {
  Matrix s(4, 1);
  s << 1, -1, 1, -1;
  const PatternMatrix pm = class_mean_patterns(dataset_from(s, {0}));
  CHECK(pm.xi.col(0) == s.col(0));
}

TEST_CASE("class mean resolves ties to +1") {
  Matrix s(2, 2);
  s << 1, 1, 1, -1;  // samples (1,1) and (1,-1); mean (1,0)
  const PatternMatrix pm = class_mean_patterns(dataset_from(s, {0, 0}));
  CHECK(pm.xi(0, 0) == 1.0);
  CHECK(pm.xi(1, 0) == 1.0);
}

TEST_CASE("empty class is an error") {
  Matrix s(2, 1);
  s << 1, -1;
  CHECK_THROWS_AS(class_mean_patterns(dataset_from(s, {1})), EmptyClass);
}

TEST_CASE("subpattern_clusters with k=1 equals class_mean_patterns") {
  Rng rng(3);
  Matrix samples = testutil::random_pm_matrix(10, 40, rng);
  std::vector<int> labels;
  for (int a = 0; a < 40; ++a) labels.push_back(a % 4);
  const BinaryDataset ds = dataset_from(samples, labels);

  const PatternMatrix a = class_mean_patterns(ds);
  const PatternMatrix b = subpattern_clusters(ds, 1);
  CHECK(a.xi == b.xi);
  CHECK(a.class_of_column == b.class_of_column);
}

TEST_CASE("a class of exactly k samples yields the samples themselves") {
  Rng rng(5);
  Matrix samples = testutil::random_pm_matrix(8, 3, rng);
  const BinaryDataset ds = dataset_from(samples, {0, 0, 0});
  const PatternMatrix pm = subpattern_clusters(ds, 3);
  REQUIRE(pm.p() == 3);
  // Each sub-pattern must be one of the samples (singleton clusters).
  for (int j = 0; j < 3; ++j) {
    bool found = false;
    for (int a = 0; a < 3; ++a) {
      if (pm.xi.col(j) == samples.col(a)) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("too few samples per class is an error") {
  Rng rng(6);
  Matrix samples = testutil::random_pm_matrix(8, 2, rng);
  CHECK_THROWS_AS(subpattern_clusters(dataset_from(samples, {0, 0}), 3), TooFewSamples);
}

TEST_CASE("every output entry is exactly +-1") {
  Rng rng(8);
  Matrix samples = testutil::random_pm_matrix(12, 30, rng);
  std::vector<int> labels;
  for (int a = 0; a < 30; ++a) labels.push_back(a % 3);
  const PatternMatrix pm = subpattern_clusters(dataset_from(samples, labels), 2);
  CHECK(is_pm_one(pm.xi));
}

TEST_CASE("planted groups are recovered and merges are greedy-optimal") {
  // 3 synthetic classes, 2 well-separated groups per class of 4 samples each.
  Rng rng(11);
  const int n = 24;
  Matrix samples(n, 24);
  std::vector<int> labels;
  std::vector<int> planted_group;
  int col = 0;
  for (int cls = 0; cls < 3; ++cls) {
    for (int g = 0; g < 2; ++g) {
      Vector base(n);
      for (int i = 0; i < n; ++i) base(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
      for (int a = 0; a < 4; ++a) {
        Vector v = base;
        // One-bit noise inside a group, at distinct positions so the group's
        // sign-mean is exactly the base vector.
        const int flip = (cls * 8 + g * 4 + a) % n;
        v(flip) = -v(flip);
        samples.col(col) = v;
        labels.push_back(cls);
        planted_group.push_back(g);
        ++col;
      }
    }
  }
  const BinaryDataset ds = dataset_from(samples, labels);
  const PatternMatrix pm = subpattern_clusters(ds, 2);
  REQUIRE(pm.p() == 6);

  // Each recovered sub-pattern equals the sign of one planted group's mean;
  // with base +-1 vectors and one-bit noise the sign-mean is the base itself.
  for (int cls = 0; cls < 3; ++cls) {
    const auto& idx = ds.class_index[static_cast<std::size_t>(cls)];
    for (int g = 0; g < 2; ++g) {
      Vector mean = Vector::Zero(n);
      int count = 0;
      for (int a : idx) {
        if (planted_group[static_cast<std::size_t>(a)] == g) {
          mean += samples.col(a);
          ++count;
        }
      }
      REQUIRE(count == 4);
      const Vector expected = sign_pm(Vector(mean / count));
      bool found = false;
      for (int j = 0; j < pm.p(); ++j) {
        if (pm.class_of_column[static_cast<std::size_t>(j)] == cls &&
            pm.xi.col(j) == expected) {
          found = true;
        }
      }
      CHECK(found);
    }
  }
}

TEST_CASE("ward merges minimize the SSE increase (exhaustive oracle)") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(100 + seed);
    const int n_points = 8;
    Matrix pts = testutil::random_pm_matrix(6, n_points, rng);

    const WardResult res = ward_cluster(pts, 1);
    REQUIRE(res.merges.size() == static_cast<std::size_t>(n_points - 1));

    // Replay the merges, checking each chosen pair attains the minimal
    // delta-SSE over all active pairs at that step.
    std::vector<std::vector<int>> clusters(n_points);
    for (int i = 0; i < n_points; ++i) clusters[static_cast<std::size_t>(i)] = {i};
    std::vector<bool> active(n_points, true);

    for (const WardMerge& m : res.merges) {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n_points; ++i) {
        if (!active[static_cast<std::size_t>(i)]) continue;
        for (int j = i + 1; j < n_points; ++j) {
          if (!active[static_cast<std::size_t>(j)]) continue;
          best = std::min(best, delta_sse(pts, clusters[static_cast<std::size_t>(i)],
                                          clusters[static_cast<std::size_t>(j)]));
        }
      }
      const double chosen = delta_sse(pts, clusters[static_cast<std::size_t>(m.a)],
                                      clusters[static_cast<std::size_t>(m.b)]);
      CHECK(chosen == doctest::Approx(best).epsilon(1e-9));
      CHECK(m.delta_sse == doctest::Approx(chosen).epsilon(1e-9));

      auto& ca = clusters[static_cast<std::size_t>(m.a)];
      auto& cb = clusters[static_cast<std::size_t>(m.b)];
      ca.insert(ca.end(), cb.begin(), cb.end());
      active[static_cast<std::size_t>(m.b)] = false;
    }
  }
}

TEST_CASE("rank deficiency is reported, not thrown") {
  // Two identical classes produce duplicate class means.
  Matrix samples(6, 4);
  samples.col(0) << 1, 1, 1, -1, -1, -1;
  samples.col(1) = samples.col(0);
  samples.col(2) = samples.col(0);
  samples.col(3) = samples.col(0);
  const PatternMatrix pm = class_mean_patterns(dataset_from(samples, {0, 0, 1, 1}));
  CHECK_FALSE(is_full_rank(pm.xi));
}
