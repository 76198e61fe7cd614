#include <doctest.h>

#include <cmath>

#include "hrbm/errors.hpp"
#include "hrbm/forward_map.hpp"
#include "hrbm/hopfield.hpp"
#include "hrbm/reverse_map.hpp"
#include "test_util.hpp"

using namespace hrbm;

namespace {

Matrix random_gaussian(int r, int c, double scale, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < m.size(); ++j) m(j) = scale * rng.normal();
  return m;
}

}  // namespace

TEST_CASE("integrate_out_hidden undoes the forward map") {
  Rng rng(600);
  const PatternMatrix pm = testutil::random_correlated_patterns(12, 3, rng);
  const HopfieldNetwork original = projection_couplings(pm);
  const GaussBernRBM rbm = hn_to_rbm(pm, 2.0);
  const HopfieldNetwork back = integrate_out_hidden(rbm);
  CHECK((back.J - original.J).norm() < 1e-10);
  CHECK(back.b.norm() == 0.0);
}

TEST_CASE("binary weights give the unnormalized Hebbian structure") {
  Rng rng(601);
  GaussBernRBM rbm = make_rbm(8, 2, 1.0);
  rbm.W = testutil::random_pm_matrix(8, 2, rng);
  const HopfieldNetwork net = integrate_out_hidden(rbm);
  CHECK((net.J - rbm.W * rbm.W.transpose()).norm() == 0.0);
  CHECK(net.J(0, 0) == doctest::Approx(2.0));  // diagonal = p for +-1 weights
}

TEST_CASE("integrated-out Ising model matches the RBM visible marginal per state") {
  Rng rng(602);
  GaussBernRBM rbm = make_rbm(6, 2, 1.4);
  rbm.W = random_gaussian(6, 2, 0.5, rng);
  rbm.b = random_gaussian(6, 1, 0.2, rng);
  rbm.c = random_gaussian(2, 1, 0.3, rng);  // nonzero hidden bias folds to b + Wc

  const HopfieldNetwork net = integrate_out_hidden(rbm);
  for (int u = 0; u < (1 << 6); ++u) {
    Vector s(6);
    for (int i = 0; i < 6; ++i) s(i) = (u >> i) & 1 ? 1.0 : -1.0;
    // RBM marginal with the analytic hidden integral, dropping s-independent
    // constants: beta (b.s + c.W^T s + 1/2 ||W^T s||^2).
    const Vector t = rbm.W.transpose() * s;
    const double direct = rbm.beta * (rbm.b.dot(s) + rbm.c.dot(t) + 0.5 * t.squaredNorm());
    const double ising = -rbm.beta * energy(net, s);
    CHECK(direct == doctest::Approx(ising).epsilon(1e-10));
  }
}

TEST_CASE("binarization gradient vanishes at an exact solution") {
  Rng rng(603);
  const PatternMatrix pm = testutil::random_correlated_patterns(10, 3, rng);
  const OrthogonalFactorization f = qr_orthogonalize(pm.xi);
  const Matrix g = binarization_gradient(f.U, f.R, 200.0);
  CHECK(g.norm() < 1e-8);
}

TEST_CASE("binarization gradient matches finite differences") {
  Rng rng(604);
  const Matrix w = random_gaussian(7, 2, 0.8, rng);
  const Matrix x = random_gaussian(2, 2, 0.7, rng) + Matrix::Identity(2, 2);
  const double alpha = 5.0;

  auto objective = [&](const Matrix& xx) {
    const Matrix e = w * xx - (alpha * (w * xx)).array().tanh().matrix();
    return e.squaredNorm();
  };

  const Matrix g = binarization_gradient(w, x, alpha);
  const double h = 1e-6;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      Matrix xp = x, xm = x;
      xp(r, c) += h;
      xm(r, c) -= h;
      const double fd = (objective(xp) - objective(xm)) / (2.0 * h);
      CHECK(g(r, c) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("binarization gradient at alpha=0 reduces to 2 W^T W X") {
  Rng rng(605);
  const Matrix w = random_gaussian(6, 2, 1.0, rng);
  const Matrix x = random_gaussian(2, 2, 1.0, rng);
  const Matrix g = binarization_gradient(w, x, 0.0);
  CHECK((g - 2.0 * w.transpose() * w * x).norm() < 1e-12);
}

TEST_CASE("descent from the exact QR solution converges immediately") {
  Rng rng(606);
  const PatternMatrix pm = testutil::random_correlated_patterns(12, 3, rng);
  const OrthogonalFactorization f = qr_orthogonalize(pm.xi);
  const BinarizationSolution sol = binarize_descent(f.U, f.R);
  CHECK(sol.status == DescentStatus::converged);
  CHECK(sol.iterations == 0);
  CHECK(sol.objective < 1e-10);
  CHECK(sol.B == pm.xi);  // recovers the encoded patterns exactly
}

TEST_CASE("descent recovers a planted binarizable instance") {
  Rng rng(607);
  const int n = 30, p = 4;
  Matrix b = testutil::random_pm_matrix(n, p, rng);
  while (!is_full_rank(b)) b = testutil::random_pm_matrix(n, p, rng);
  const Matrix x_true = Matrix::Identity(p, p) + random_gaussian(p, p, 0.1, rng);
  const Matrix w = b * x_true.inverse();

  const Matrix x0 = x_true + random_gaussian(p, p, 0.01, rng);
  const BinarizationSolution sol = binarize_descent(w, x0);
  CHECK(sol.objective < 1e-6);
  CHECK(sign_pm(sol.B_p) == b);
}

TEST_CASE("descent aborts on a numerically singular transform") {
  Rng rng(608);
  const Matrix w = random_gaussian(8, 2, 1.0, rng);
  Matrix x0 = Matrix::Zero(2, 2);
  x0(0, 0) = 1.0;
  x0(1, 1) = 1e-14;
  const BinarizationSolution sol = binarize_descent(w, x0);
  CHECK(sol.status == DescentStatus::singular_x);
}

TEST_CASE("multistart descent returns the best objective") {
  Rng rng(609);
  const int n = 20, p = 3;
  Matrix b = testutil::random_pm_matrix(n, p, rng);
  while (!is_full_rank(b)) b = testutil::random_pm_matrix(n, p, rng);
  const Matrix w = b * (Matrix::Identity(p, p) + random_gaussian(p, p, 0.05, rng)).inverse();
  Rng starts(610);
  const BinarizationSolution sol = binarize_descent_multistart(w, 6, {}, starts);
  CHECK(sol.trace.size() > 0);
  CHECK(sol.objective >= 0.0);
}

TEST_CASE("lowdin orthogonalization fixes orthogonal matrices") {
  Rng rng(611);
  const Matrix q = qr_orthogonalize(random_gaussian(9, 3, 1.0, rng)).U;
  CHECK((lowdin_orthogonalize(q) - q).norm() < 1e-12);
}

TEST_CASE("lowdin distance has the closed form sqrt(sum (sigma-1)^2)") {
  Rng rng(612);
  const Matrix u = qr_orthogonalize(random_gaussian(8, 2, 1.0, rng)).U;
  const Matrix v = qr_orthogonalize(random_gaussian(2, 2, 1.0, rng)).U;
  Vector sigma(2);
  sigma << 1.1, 0.9;
  const Matrix w = u * sigma.asDiagonal() * v.transpose();
  const Matrix l = lowdin_orthogonalize(w);
  CHECK((l - u * v.transpose()).norm() < 1e-10);
  CHECK((w - l).norm() == doctest::Approx(std::sqrt(0.02)).epsilon(1e-10));
}

TEST_CASE("lowdin is the nearest orthogonal matrix (competitor spot check)") {
  Rng rng(613);
  const Matrix w = random_gaussian(10, 3, 1.0, rng);
  const Matrix l = lowdin_orthogonalize(w);
  const double dist = (w - l).norm();
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix competitor = qr_orthogonalize(random_gaussian(10, 3, 1.0, rng)).U;
    CHECK(dist <= (w - competitor).norm() + 1e-12);
  }
}

TEST_CASE("case1 reconstruction at an exact solution recovers W W^T") {
  Rng rng(614);
  const PatternMatrix pm = testutil::random_correlated_patterns(14, 3, rng);
  const OrthogonalFactorization f = qr_orthogonalize(pm.xi);
  const BinarizationSolution sol = binarize_descent(f.U, f.R);
  const ReconstructionResult res = reconstruct_hn(f.U, sol, ReconstructionMode::case1);
  CHECK((res.net.J - f.U * f.U.transpose()).norm() < 1e-8);
  CHECK(res.diag.sign_fixed_points);
  CHECK(res.diag.fraction_conditions_ok == doctest::Approx(1.0));
  // Candidate patterns are deterministic fixed points.
  for (int mu = 0; mu < 3; ++mu) {
    CHECK(update_deterministic(res.net, sol.B.col(mu)) == sol.B.col(mu));
  }
}

TEST_CASE("case1 with a small planted error still yields sign fixed points") {
  Rng rng(615);
  const int n = 16, p = 2;
  Matrix b = testutil::random_pm_matrix(n, p, rng);
  while (!is_full_rank(b)) b = testutil::random_pm_matrix(n, p, rng);
  const OrthogonalFactorization f = qr_orthogonalize(b);

  BinarizationSolution sol;
  sol.X = f.R + random_gaussian(p, p, 0.005, rng);
  sol.B_p = f.U * sol.X;
  sol.B = sign_pm(sol.B_p);
  sol.E = sol.B_p - sol.B;
  sol.objective = sol.E.norm();
  REQUIRE(sol.B == b);  // perturbation small enough to keep signs

  const ReconstructionResult res = reconstruct_hn(f.U, sol, ReconstructionMode::case1);
  CHECK(res.diag.fraction_conditions_ok == doctest::Approx(1.0));
  CHECK(res.diag.sign_fixed_points);
}

TEST_CASE("case1 refuses non-orthogonal weights; case2 handles them") {
  Rng rng(616);
  const int n = 12, p = 2;
  Matrix b = testutil::random_pm_matrix(n, p, rng);
  while (!is_full_rank(b)) b = testutil::random_pm_matrix(n, p, rng);
  const Matrix x_true = Matrix::Identity(p, p) + random_gaussian(p, p, 0.2, rng);
  const Matrix w = b * x_true.inverse();  // full rank, far from orthogonal

  BinarizationSolution sol;
  sol.X = x_true;
  sol.B_p = w * x_true;
  sol.B = sign_pm(sol.B_p);
  sol.E = sol.B_p - sol.B;
  sol.objective = sol.E.norm();

  CHECK_THROWS_AS(reconstruct_hn(w, sol, ReconstructionMode::case1), NotOrthogonal);

  const ReconstructionResult res = reconstruct_hn(w, sol, ReconstructionMode::case2);
  // With invertible X the correction factor collapses the expression to W W^T.
  CHECK((res.net.J - w * w.transpose()).norm() < 1e-8);
}

TEST_CASE("reverse pipeline recovers the encoded patterns at epoch zero") {
  Rng rng(617);
  const PatternMatrix pm = testutil::random_correlated_patterns(20, 4, rng);
  const OrthogonalFactorization f = qr_orthogonalize(pm.xi);
  const GaussBernRBM rbm = hn_to_rbm(pm, 2.0);
  const ReversePipelineResult res = reverse_pipeline(rbm, f.R, {}, &pm.class_of_column);
  CHECK(res.patterns.xi == pm.xi);
  CHECK(res.fixed_point_fraction == doctest::Approx(1.0));
  CHECK(res.solution.objective < 1e-10);
}

TEST_CASE("reverse pipeline survives an arbitrary RBM with a random start") {
  Rng rng(618);
  GaussBernRBM rbm = make_rbm(15, 3, 1.0);
  rbm.W = random_gaussian(15, 3, 0.4, rng);
  DescentConfig cfg;
  cfg.max_iters = 2000;  // keep the test quick; convergence is not expected
  const Matrix x0 = Matrix::Identity(3, 3) + random_gaussian(3, 3, 0.3, rng);
  const ReversePipelineResult res = reverse_pipeline(rbm, x0, cfg);
  CHECK(res.solution.objective > 0.1);  // high binarization error, reported
  CHECK(res.patterns.p() == 3);
}
