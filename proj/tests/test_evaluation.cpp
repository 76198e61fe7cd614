#include <doctest.h>

#include <cmath>

#include "hrbm/errors.hpp"
#include "hrbm/evaluation.hpp"
#include "hrbm/forward_map.hpp"
#include "hrbm/hopfield.hpp"
#include "test_util.hpp"

using namespace hrbm;

namespace {

GaussBernRBM random_rbm(int n, int p, double beta, double scale, Rng& rng,
                        bool biases = false) {
  GaussBernRBM rbm = make_rbm(n, p, beta);
  for (Eigen::Index j = 0; j < rbm.W.size(); ++j) rbm.W(j) = scale * rng.normal();
  if (biases) {
    for (int i = 0; i < n; ++i) rbm.b(i) = 0.1 * rng.normal();
    for (int mu = 0; mu < p; ++mu) rbm.c(mu) = 0.2 * rng.normal();
  }
  return rbm;
}

}  // namespace

TEST_CASE("lnZ of the zero model is N ln 2 for any beta") {
  for (double beta : {0.5, 1.0, 3.0}) {
    const GaussBernRBM rbm = make_rbm(7, 2, beta);
    CHECK(lnZ_enumerate(rbm).value == doctest::Approx(7 * M_LN2).epsilon(1e-12));
  }
}

TEST_CASE("enumeration respects the size guard") {
  const GaussBernRBM rbm = make_rbm(21, 1, 1.0);
  CHECK_THROWS_AS(lnZ_enumerate(rbm), TooLarge);
  HopfieldNetwork net;
  net.J = Matrix::Zero(21, 21);
  net.b = Vector::Zero(21);
  CHECK_THROWS_AS(lnZ_hopfield_enumerate(net), TooLarge);
}

TEST_CASE("quadrature respects the dimension guard") {
  const GaussBernRBM rbm = make_rbm(5, 4, 1.0);
  CHECK_THROWS_AS(lnZ_quadrature(rbm), TooLarge);
}

TEST_CASE("quadrature: p=1 zero model gives N ln 2 to 1e-10") {
  const GaussBernRBM rbm = make_rbm(9, 1, 2.0);
  CHECK(std::abs(lnZ_quadrature(rbm).value - 9 * M_LN2) < 1e-10);
}

TEST_CASE("quadrature agrees with enumeration on random instances") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(500 + seed);
    const int p = 1 + static_cast<int>(seed % 2);
    const GaussBernRBM rbm = random_rbm(10, p, 1.0 + 0.3 * seed, 0.4, rng, true);
    const double en = lnZ_enumerate(rbm).value;
    const double qu = lnZ_quadrature(rbm).value;
    CHECK(std::abs(en - qu) < 1e-6);
  }
}

TEST_CASE("quadrature integrand symmetry: mirrored weights give the same lnZ") {
  Rng rng(501);
  GaussBernRBM rbm = random_rbm(8, 2, 1.5, 0.5, rng);
  GaussBernRBM mirrored = rbm;
  mirrored.W = -rbm.W;
  CHECK(lnZ_quadrature(rbm).value == doctest::Approx(lnZ_quadrature(mirrored).value).epsilon(1e-9));
}

TEST_CASE("HN-mapped RBM: enumeration matches the direct spin sum to 1e-10") {
  Rng rng(502);
  const PatternMatrix pm = testutil::random_correlated_patterns(10, 2, rng);
  HopfieldNetwork net = projection_couplings(pm);
  net.beta = 2.0;
  const GaussBernRBM rbm = hn_to_rbm(pm, 2.0);
  const double a = lnZ_hopfield_enumerate(net);
  const double b = lnZ_enumerate(rbm).value;
  CHECK(std::abs(a - b) < 1e-10 * std::abs(a));
}

TEST_CASE("AIS on the zero model at beta=1: exact weights, zero stderr") {
  const GaussBernRBM rbm = make_rbm(11, 2, 1.0);
  AISConfig cfg;
  cfg.n_chains = 16;
  cfg.n_steps = 50;
  cfg.seed = 7;
  const AISResult res = lnZ_ais_detailed(rbm, cfg);
  CHECK(res.estimate.std_error == 0.0);
  CHECK(res.estimate.value == doctest::Approx(11 * M_LN2).epsilon(1e-10));
  for (double w : res.chain_log_weights) {
    CHECK(w == res.chain_log_weights.front());  // bitwise identical
  }
}

TEST_CASE("AIS lands near the enumerated lnZ on random instances") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(510 + seed);
    const GaussBernRBM rbm = random_rbm(10, 3, 1.0, 0.3, rng, true);
    const double exact = lnZ_enumerate(rbm).value;
    AISConfig cfg;
    cfg.n_chains = 100;
    cfg.n_steps = 600;
    cfg.seed = 1000 + seed;
    const LnZEstimate est = lnZ_ais(rbm, cfg);
    CHECK(std::abs(est.value - exact) < std::max(0.1, 3.0 * est.std_error));
  }
}

TEST_CASE("degenerate AIS schedules are rejected") {
  const GaussBernRBM rbm = make_rbm(4, 1, 1.0);
  AISConfig cfg;
  cfg.schedule = {0.0, 0.5, 0.5, 1.0};
  CHECK_THROWS_AS(lnZ_ais(rbm, cfg), DegenerateSchedule);
  cfg.schedule = {0.1, 0.5, 1.0};
  CHECK_THROWS_AS(lnZ_ais(rbm, cfg), DegenerateSchedule);
  cfg.schedule = {0.0, 0.5, 0.9};
  CHECK_THROWS_AS(lnZ_ais(rbm, cfg), DegenerateSchedule);
  cfg.schedule.clear();
  cfg.n_chains = 0;
  CHECK_THROWS_AS(lnZ_ais(rbm, cfg), DegenerateSchedule);
}

TEST_CASE("the fig2 preset pins 500 chains and 1000 steps") {
  const AISConfig cfg = AISConfig::fig2_preset(3);
  CHECK(cfg.n_chains == 500);
  CHECK(cfg.n_steps == 1000);
  CHECK(cfg.seed == 3);
  const auto sched = geometric_schedule(cfg.n_steps);
  CHECK(sched.front() == 0.0);
  CHECK(sched.back() == 1.0);
  CHECK(sched.size() == 1001);
  for (std::size_t j = 1; j < sched.size(); ++j) CHECK(sched[j] > sched[j - 1]);
}

TEST_CASE("log likelihood of the uniform model is -N ln 2 per sample") {
  Rng rng(520);
  const GaussBernRBM rbm = make_rbm(6, 2, 1.3);
  Matrix data = testutil::random_pm_matrix(6, 25, rng);
  const double ll = log_likelihood(rbm, data, lnZ_enumerate(rbm));
  CHECK(ll == doctest::Approx(-6 * M_LN2).epsilon(1e-12));
}

TEST_CASE("log likelihood matches direct per-state probabilities") {
  Rng rng(521);
  const GaussBernRBM rbm = random_rbm(7, 2, 1.0, 0.4, rng, true);
  Matrix data = testutil::random_pm_matrix(7, 30, rng);
  const LnZEstimate lnz = lnZ_enumerate(rbm);

  double direct = 0.0;
  for (int a = 0; a < data.cols(); ++a) {
    const Vector s = data.col(a);
    const double logw =
        rbm.beta * (rbm.b.dot(s) + 0.5 * (rbm.c + rbm.W.transpose() * s).squaredNorm() -
                    0.5 * rbm.c.squaredNorm());
    direct += logw - lnz.value;
  }
  direct /= data.cols();
  CHECK(log_likelihood(rbm, data, lnz) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("log likelihood is monotone in lnZ with slope -1") {
  Rng rng(522);
  const GaussBernRBM rbm = random_rbm(6, 2, 1.0, 0.3, rng);
  Matrix data = testutil::random_pm_matrix(6, 10, rng);
  LnZEstimate lnz = lnZ_enumerate(rbm);
  const double base = log_likelihood(rbm, data, lnz);
  lnz.value += 0.37;
  CHECK(log_likelihood(rbm, data, lnz) == doctest::Approx(base - 0.37).epsilon(1e-12));
}

TEST_CASE("method agreement across random small instances") {
  int ais_hits = 0;
  const int instances = 12;
  for (std::uint64_t seed = 0; seed < instances; ++seed) {
    Rng rng(530 + seed);
    const int p = 1 + static_cast<int>(seed % 2);
    const GaussBernRBM rbm = random_rbm(8, p, 0.8 + 0.2 * (seed % 3), 0.35, rng, true);
    const double en = lnZ_enumerate(rbm).value;
    CHECK(std::abs(en - lnZ_quadrature(rbm).value) < 1e-6);

    AISConfig cfg;
    cfg.n_chains = 80;
    cfg.n_steps = 400;
    cfg.seed = 2000 + seed;
    const LnZEstimate est = lnZ_ais(rbm, cfg);
    if (std::abs(est.value - en) < std::max(0.1, 3.0 * est.std_error)) ++ais_hits;
  }
  CHECK(ais_hits >= instances - 1);  // 3-sigma misses are allowed, rarely
}

TEST_CASE("AIS is invariant in distribution to hidden-unit permutation") {
  Rng rng(540);
  const GaussBernRBM rbm = random_rbm(9, 3, 1.0, 0.4, rng);
  GaussBernRBM permuted = rbm;
  permuted.W.col(0) = rbm.W.col(2);
  permuted.W.col(1) = rbm.W.col(0);
  permuted.W.col(2) = rbm.W.col(1);

  AISConfig cfg;
  cfg.n_chains = 200;
  cfg.n_steps = 400;
  cfg.seed = 9;
  const LnZEstimate a = lnZ_ais(rbm, cfg);
  const LnZEstimate b = lnZ_ais(permuted, cfg);
  const double joint = std::hypot(a.std_error, b.std_error);
  CHECK(std::abs(a.value - b.value) < std::max(0.05, 3.0 * joint));
}
