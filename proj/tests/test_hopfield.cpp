#include <doctest.h>

#include <map>

#include "hrbm/errors.hpp"
#include "hrbm/evaluation.hpp"
#include "hrbm/hopfield.hpp"
#include "test_util.hpp"

using namespace hrbm;

TEST_CASE("projection couplings: invertible square xi gives the identity") {
  PatternMatrix pm;
  pm.xi.resize(3, 3);
  pm.xi.col(0) << 1, 1, 1;
  pm.xi.col(1) << 1, -1, 1;
  pm.xi.col(2) << 1, 1, -1;
  pm.class_of_column = {0, 1, 2};
  const HopfieldNetwork net = projection_couplings(pm);
  CHECK((net.J - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("orthogonal patterns reduce the projection rule to the Hebbian form") {
  const PatternMatrix pm = testutil::hadamard_patterns(4, 2);
  const HopfieldNetwork proj = projection_couplings(pm);
  const HopfieldNetwork hebb = hebbian_couplings(pm);
  CHECK((proj.J - pm.xi * pm.xi.transpose() / 4.0).norm() < 1e-12);
  CHECK((proj.J - hebb.J).norm() < 1e-12);
}

TEST_CASE("projection J is a projector onto the pattern span") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(200 + seed);
    const int n = 10, p = 4;
    const PatternMatrix pm = testutil::random_correlated_patterns(n, p, rng);
    const HopfieldNetwork net = projection_couplings(pm);
    CHECK((net.J - net.J.transpose()).norm() < 1e-12);
    CHECK((net.J * net.J - net.J).norm() < 1e-10);
    CHECK(net.J.trace() == doctest::Approx(p).epsilon(1e-10));
    CHECK((net.J * pm.xi - pm.xi).norm() < 1e-10);
  }
}

TEST_CASE("hebbian and projection couplings differ for correlated patterns") {
  Rng rng(42);
  const PatternMatrix pm = testutil::random_correlated_patterns(10, 4, rng);
  const HopfieldNetwork proj = projection_couplings(pm);
  const HopfieldNetwork hebb = hebbian_couplings(pm);
  CHECK((proj.J - hebb.J).norm() > 1e-3);
  // Single pattern: J_ij = xi_i xi_j / N, diagonal 1/N.
  PatternMatrix one;
  one.xi = pm.xi.leftCols(1);
  one.class_of_column = {0};
  const HopfieldNetwork h1 = hebbian_couplings(one);
  CHECK(h1.J(0, 0) == doctest::Approx(0.1));
  CHECK(h1.J(2, 3) == doctest::Approx(one.xi(2, 0) * one.xi(3, 0) / 10.0));
}

TEST_CASE("energy at stored patterns is -N/2; orthogonal-complement states sit at 0") {
  Rng rng(77);
  const int n = 12, p = 3;
  const PatternMatrix pm = testutil::random_correlated_patterns(n, p, rng);
  const HopfieldNetwork net = projection_couplings(pm);
  for (int mu = 0; mu < p; ++mu) {
    CHECK(energy(net, pm.xi.col(mu)) == doctest::Approx(-n / 2.0).epsilon(1e-10));
  }
  // A vector orthogonal to the span: J v = 0 so H = 0 (not a spin state, but
  // the quadratic form itself is what the claim is about).
  Eigen::FullPivLU<Matrix> lu(pm.xi.transpose());
  const Matrix null_space = lu.kernel();
  REQUIRE(null_space.cols() > 0);
  const Vector v = null_space.col(0);
  CHECK(std::abs(v.dot(net.J * v)) < 1e-8);
}

TEST_CASE("energy equals -(N/2) m.a for random spin states") {
  Rng rng(78);
  const int n = 8, p = 3;
  const PatternMatrix pm = testutil::random_correlated_patterns(n, p, rng);
  const HopfieldNetwork net = projection_couplings(pm);
  for (int trial = 0; trial < 20; ++trial) {
    Vector s(n);
    for (int i = 0; i < n; ++i) s(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const OverlapState st = overlaps(pm, s);
    CHECK(energy(net, s) ==
          doctest::Approx(-0.5 * n * st.m.dot(st.a)).epsilon(1e-10));
    CHECK(st.m.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    CHECK(st.a.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
  }
}

TEST_CASE("overlaps: stored patterns project to unit vectors") {
  Rng rng(79);
  const PatternMatrix pm = testutil::random_correlated_patterns(9, 3, rng);
  for (int mu = 0; mu < 3; ++mu) {
    const OverlapState st = overlaps(pm, pm.xi.col(mu));
    Vector e = Vector::Zero(3);
    e(mu) = 1.0;
    CHECK((st.a - e).norm() < 1e-9);
    const OverlapState neg = overlaps(pm, Vector(-pm.xi.col(mu)));
    CHECK((neg.a + e).norm() < 1e-9);
  }
  // Direct linear solve oracle for a random state.
  Vector s(9);
  for (int i = 0; i < 9; ++i) s(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const OverlapState st = overlaps(pm, s);
  const Matrix a_direct =
      (pm.xi.transpose() * pm.xi).fullPivLu().solve(pm.xi.transpose() * s);
  CHECK((st.a - a_direct).norm() < 1e-9);
}

TEST_CASE("deterministic update: stored patterns are fixed points, ties keep spins") {
  Rng rng(80);
  const PatternMatrix pm = testutil::random_correlated_patterns(14, 3, rng);
  const HopfieldNetwork net = projection_couplings(pm);
  for (int mu = 0; mu < 3; ++mu) {
    CHECK(update_deterministic(net, pm.xi.col(mu)) == pm.xi.col(mu));
    CHECK(update_deterministic(net, Vector(-pm.xi.col(mu))) == -pm.xi.col(mu));
  }

  HopfieldNetwork zero;
  zero.J = Matrix::Zero(5, 5);
  zero.b = Vector::Zero(5);
  Vector s(5);
  s << 1, -1, 1, 1, -1;
  CHECK(update_deterministic(zero, s) == s);
}

TEST_CASE("one-bit corruption converges back within a few sweeps") {
  Rng rng(81);
  const int n = 20;
  const PatternMatrix pm = testutil::random_correlated_patterns(n, 2, rng);
  const HopfieldNetwork net = projection_couplings(pm);
  for (int mu = 0; mu < 2; ++mu) {
    Vector s = pm.xi.col(mu);
    s(3) = -s(3);
    bool recovered = false;
    for (int sweep = 0; sweep < 5 && !recovered; ++sweep) {
      s = update_deterministic(net, s);
      recovered = (s == pm.xi.col(mu));
    }
    CHECK(recovered);
  }
}

TEST_CASE("asynchronous deterministic updates weakly decrease the energy") {
  Rng rng(82);
  const PatternMatrix pm = testutil::random_correlated_patterns(12, 3, rng);
  const HopfieldNetwork net = projection_couplings(pm);
  for (int trial = 0; trial < 10; ++trial) {
    Vector s(12);
    for (int i = 0; i < 12; ++i) s(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    double e = energy(net, s);
    for (int sweep = 0; sweep < 10; ++sweep) {
      deterministic_async_sweep(net, s, rng);
      const double e2 = energy(net, s);
      CHECK(e2 <= e + 1e-10);
      e = e2;
    }
  }
}

TEST_CASE("infinite temperature flips coins; zero temperature matches sgn") {
  HopfieldNetwork zero;
  zero.J = Matrix::Zero(6, 6);
  zero.b = Vector::Zero(6);
  Rng rng(83);
  Vector s = Vector::Ones(6);
  Vector mean = Vector::Zero(6);
  const int sweeps = 10000;
  for (int t = 0; t < sweeps; ++t) {
    stochastic_sweep(zero, s, 0.0, rng);
    mean += s;
  }
  CHECK((mean / sweeps).cwiseAbs().maxCoeff() < 0.05);

  // beta -> infinity with a pure field: every spin locks to sgn(b).
  HopfieldNetwork field;
  field.J = Matrix::Zero(6, 6);
  field.b.resize(6);
  field.b << 0.3, -0.2, 1.0, -0.7, 0.4, -0.1;
  Vector s2 = Vector::Ones(6);
  stochastic_sweep(field, s2, 1e6, rng);
  CHECK(s2 == sign_pm(field.b));
}

TEST_CASE("glauber dynamics sample the Boltzmann distribution (TV oracle)") {
  Rng rng(84);
  const int n = 8;
  const PatternMatrix pm = testutil::random_correlated_patterns(n, 2, rng);
  HopfieldNetwork net = projection_couplings(pm);
  net.beta = 2.0;

  // Exact Boltzmann weights by enumeration.
  std::vector<double> target(1 << n);
  double zsum = 0.0;
  for (int u = 0; u < (1 << n); ++u) {
    Vector s(n);
    for (int i = 0; i < n; ++i) s(i) = (u >> i) & 1 ? 1.0 : -1.0;
    target[static_cast<std::size_t>(u)] = std::exp(-net.beta * energy(net, s));
    zsum += target[static_cast<std::size_t>(u)];
  }
  for (auto& t : target) t /= zsum;

  Vector s = pm.xi.col(0);
  const int burn = 2000, keep = 400000;
  std::vector<double> counts(1 << n, 0.0);
  for (int t = 0; t < burn; ++t) update_stochastic(net, s, rng);
  for (int t = 0; t < keep; ++t) {
    update_stochastic(net, s, rng);
    int u = 0;
    for (int i = 0; i < n; ++i) {
      if (s(i) > 0) u |= 1 << i;
    }
    counts[static_cast<std::size_t>(u)] += 1.0;
  }
  double tv = 0.0;
  for (int u = 0; u < (1 << n); ++u) {
    tv += std::abs(counts[static_cast<std::size_t>(u)] / keep - target[static_cast<std::size_t>(u)]);
  }
  tv *= 0.5;
  CHECK(tv < 0.02);
}

TEST_CASE("retrieve returns the pattern's class immediately for a stored pattern") {
  Rng rng(85);
  const PatternMatrix pm = testutil::random_correlated_patterns(16, 3, rng);
  const HopfieldNetwork net = projection_couplings(pm);
  RetrievalConfig cfg;
  const RetrievalResult res = retrieve(net, pm, pm.xi.col(1), cfg);
  CHECK(res.retrieved);
  CHECK(res.fixed_point_was_pattern);
  CHECK(res.class_id == 1);
  CHECK(res.class_weights(1) == doctest::Approx(1.0));
}

TEST_CASE("retrieve reports NoRetrieval or a split vote for a hostile start") {
  // Tiny net whose stochastic stage cannot reach threshold: max_sweeps = 0.
  Rng rng(86);
  const PatternMatrix pm = testutil::hadamard_patterns(8, 2);
  const HopfieldNetwork net = projection_couplings(pm);
  RetrievalConfig cfg;
  cfg.max_sweeps = 0;
  // Hadamard column 2 is orthogonal to patterns 0 and 1 and is NOT stored.
  Matrix h = testutil::hadamard_patterns(8, 8).xi;
  const RetrievalResult res = retrieve(net, pm, h.col(2), cfg);
  CHECK_FALSE(res.retrieved);
}

TEST_CASE("metropolis sweeps also sample the Boltzmann distribution") {
  Rng rng(87);
  const int n = 6;
  const PatternMatrix pm = testutil::random_correlated_patterns(n, 2, rng);
  HopfieldNetwork net = projection_couplings(pm);
  net.beta = 1.0;

  std::vector<double> target(1 << n);
  double zsum = 0.0;
  for (int u = 0; u < (1 << n); ++u) {
    Vector s(n);
    for (int i = 0; i < n; ++i) s(i) = (u >> i) & 1 ? 1.0 : -1.0;
    target[static_cast<std::size_t>(u)] = std::exp(-net.beta * energy(net, s));
    zsum += target[static_cast<std::size_t>(u)];
  }
  for (auto& t : target) t /= zsum;

  Vector s = pm.xi.col(0);
  std::vector<double> counts(1 << n, 0.0);
  const int keep = 200000;
  for (int t = 0; t < 2000; ++t) stochastic_sweep(net, s, net.beta, rng, SpinDynamics::metropolis);
  for (int t = 0; t < keep; ++t) {
    stochastic_sweep(net, s, net.beta, rng, SpinDynamics::metropolis);
    int u = 0;
    for (int i = 0; i < n; ++i) {
      if (s(i) > 0) u |= 1 << i;
    }
    counts[static_cast<std::size_t>(u)] += 1.0;
  }
  double tv = 0.0;
  for (int u = 0; u < (1 << n); ++u) {
    tv += std::abs(counts[static_cast<std::size_t>(u)] / keep - target[static_cast<std::size_t>(u)]);
  }
  CHECK(0.5 * tv < 0.02);
}

TEST_CASE("zero_diagonal clears the factor and the diagonal") {
  Rng rng(88);
  const PatternMatrix pm = testutil::random_correlated_patterns(10, 2, rng);
  HopfieldNetwork net = projection_couplings(pm);
  REQUIRE(net.has_factor());
  zero_diagonal(net);
  CHECK_FALSE(net.has_factor());
  CHECK(net.J.diagonal().cwiseAbs().maxCoeff() == 0.0);
}
