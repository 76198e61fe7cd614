#include "hrbm/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "hrbm/errors.hpp"

namespace hrbm {

const char* to_string(LnZMethod m) {
  switch (m) {
    case LnZMethod::enumeration: return "enumeration";
    case LnZMethod::quadrature: return "quadrature";
    case LnZMethod::ais: return "ais";
  }
  return "?";
}

namespace {

constexpr int kEnumerationLimit = 20;

// Streaming log-sum-exp with max shifting.
class LogSumExp {
 public:
  void add(double x) {
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ + std::log(sum_); }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

int flipped_bit(std::uint64_t u) {
  // Gray codes of u-1 and u differ exactly in bit ctz(u).
  return __builtin_ctzll(u);
}

}  // namespace

LnZEstimate lnZ_enumerate(const GaussBernRBM& rbm) {
  const int n = rbm.n_visible();
  if (n > kEnumerationLimit) {
    throw TooLarge("lnZ_enumerate: N = " + std::to_string(n) + " exceeds the 2^N guard");
  }
  // Sum over s with the gaussian hidden integral done analytically:
  //   ln Z = logsumexp_s beta (b.s + 1/2 ||c + W^T s||^2) - beta/2 ||c||^2.
  // States walk a Gray code so W^T s updates in O(p) per state.
  Vector s = Vector::Constant(n, -1.0);
  Vector t = rbm.W.transpose() * s;  // W^T s
  double bs = rbm.b.dot(s);

  LogSumExp lse;
  const std::uint64_t total = 1ULL << n;
  for (std::uint64_t u = 0;; ++u) {
    if (u > 0) {
      const int j = flipped_bit(u);
      const double delta = -2.0 * s(j);
      s(j) += delta;
      t += rbm.W.row(j).transpose() * delta;
      bs += rbm.b(j) * delta;
    }
    lse.add(rbm.beta * (bs + 0.5 * (rbm.c + t).squaredNorm()));
    if (u + 1 == total) break;
  }

  LnZEstimate est;
  est.value = lse.value() - 0.5 * rbm.beta * rbm.c.squaredNorm();
  est.method = LnZMethod::enumeration;
  return est;
}

double lnZ_hopfield_enumerate(const HopfieldNetwork& net) {
  const int n = net.n();
  if (n > kEnumerationLimit) {
    throw TooLarge("lnZ_hopfield_enumerate: N exceeds the 2^N guard");
  }
  Vector s = Vector::Constant(n, -1.0);
  double bs = net.b.dot(s);
  LogSumExp lse;
  const std::uint64_t total = 1ULL << n;

  if (net.has_factor()) {
    Vector t = net.factor.transpose() * s;
    for (std::uint64_t u = 0;; ++u) {
      if (u > 0) {
        const int j = flipped_bit(u);
        const double delta = -2.0 * s(j);
        s(j) += delta;
        t += net.factor.row(j).transpose() * delta;
        bs += net.b(j) * delta;
      }
      lse.add(net.beta * (0.5 * t.squaredNorm() + bs));
      if (u + 1 == total) break;
    }
  } else {
    Vector v = net.J * s;
    double quad = s.dot(v);
    for (std::uint64_t u = 0;; ++u) {
      if (u > 0) {
        const int j = flipped_bit(u);
        const double delta = -2.0 * s(j);
        quad += 2.0 * delta * v(j) + net.J(j, j) * delta * delta;
        v += net.J.col(j) * delta;
        s(j) += delta;
        bs += net.b(j) * delta;
      }
      lse.add(net.beta * (0.5 * quad + bs));
      if (u + 1 == total) break;
    }
  }
  return lse.value();
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
void gauss_legendre(int order, std::vector<double>& x, std::vector<double>& w) {
  x.resize(static_cast<std::size_t>(order));
  w.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(order - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[static_cast<std::size_t>(order - 1 - i)] = w[static_cast<std::size_t>(i)];
  }
}

// ln of the integral of exp(log_f) over an axis-aligned box, by composite
// Gauss-Legendre with `panels` panels per dimension.
template <typename LogF>
double log_integral_box(const LogF& log_f, const Vector& lower, const Vector& upper,
                        int panels, int order) {
  const int dim = static_cast<int>(lower.size());
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);

  const int per_dim = panels * order;
  Matrix nodes(dim, per_dim);
  Matrix logw(dim, per_dim);
  for (int d = 0; d < dim; ++d) {
    const double width = (upper(d) - lower(d)) / panels;
    for (int pa = 0; pa < panels; ++pa) {
      const double a = lower(d) + pa * width;
      const double mid = a + 0.5 * width;
      for (int q = 0; q < order; ++q) {
        nodes(d, pa * order + q) = mid + 0.5 * width * gx[static_cast<std::size_t>(q)];
        logw(d, pa * order + q) = std::log(0.5 * width * gw[static_cast<std::size_t>(q)]);
      }
    }
  }

  LogSumExp lse;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  Vector point(dim);
  for (;;) {
    double lw = 0.0;
    for (int d = 0; d < dim; ++d) {
      point(d) = nodes(d, idx[static_cast<std::size_t>(d)]);
      lw += logw(d, idx[static_cast<std::size_t>(d)]);
    }
    lse.add(lw + log_f(point));
    int d = 0;
    for (; d < dim; ++d) {
      if (++idx[static_cast<std::size_t>(d)] < per_dim) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d == dim) break;
  }
  return lse.value();
}

// Doubles the panel count until the log integral stabilizes.
template <typename LogF>
double log_integral_adaptive(const LogF& log_f, const Vector& lower, const Vector& upper,
                             double tol, int max_points_per_dim) {
  const int order = 24;
  int panels = 2;
  double prev = log_integral_box(log_f, lower, upper, panels, order);
  while (2 * panels * order <= max_points_per_dim) {
    panels *= 2;
    const double next = log_integral_box(log_f, lower, upper, panels, order);
    if (std::abs(next - prev) < tol) return next;
    prev = next;
  }
  return prev;
}

int max_points_for_dim(int dim) {
  switch (dim) {
    case 1: return 4096;
    case 2: return 1536;
    default: return 256;
  }
}

}  // namespace

LnZEstimate lnZ_quadrature(const GaussBernRBM& rbm, double tol) {
  const int p = rbm.n_hidden();
  if (p > 3) throw TooLarge("lnZ_quadrature: p = " + std::to_string(p) + " exceeds the guard");
  const int n = rbm.n_visible();
  const double beta = rbm.beta;

  // Integrand of the continuous representation:
  //   ln f(l) = N ln2 - p/2 ln(2 pi / beta) - beta/2 ||l - c||^2
  //             + sum_i ln cosh(beta (W l + b)_i).
  auto log_f = [&](const Vector& lambda) {
    double v = n * M_LN2 - 0.5 * p * std::log(2.0 * M_PI / beta) -
               0.5 * beta * (lambda - rbm.c).squaredNorm();
    const Vector x = rbm.W * lambda + rbm.b;
    for (Eigen::Index i = 0; i < x.size(); ++i) v += log_cosh(beta * x(i));
    return v;
  };

  // The conditional mean of lambda_u lies within the column 1-norm of W, and
  // fluctuations have scale 1/sqrt(beta).
  Vector lower(p), upper(p);
  for (int mu = 0; mu < p; ++mu) {
    const double reach = rbm.W.col(mu).cwiseAbs().sum() + 12.0 / std::sqrt(beta) + 1.0;
    lower(mu) = rbm.c(mu) - reach;
    upper(mu) = rbm.c(mu) + reach;
  }

  LnZEstimate est;
  est.value = log_integral_adaptive(log_f, lower, upper, tol, max_points_for_dim(p));
  est.method = LnZMethod::quadrature;
  return est;
}

LnZEstimate lnZ_quadrature(const OverlapBM& bm, double tol) {
  const int p = bm.n_hidden;
  if (p > 3) throw TooLarge("lnZ_quadrature(OverlapBM): p exceeds the guard");
  const int n = bm.n_visible;
  const double beta = bm.beta;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  // Z = sqrt(det A) (beta / 2 pi N)^{p/2} Int exp(-beta/2N l^T A l)
  //     prod_i 2 cosh(beta (xi l)_i / sqrt(N)) dl,  A = xi^T xi.
  // hidden_coupling is A/N, so the quadratic form below is beta/2N l^T A l.
  auto log_f = [&](const Vector& lambda) {
    double v = n * M_LN2 - 0.5 * beta * lambda.dot(bm.hidden_coupling * lambda);
    const Vector x = bm.visible_hidden * lambda;  // xi l / sqrt(N)
    for (Eigen::Index i = 0; i < x.size(); ++i) v += log_cosh(beta * x(i));
    return v;
  };

  // Overlap coordinates scale like sqrt(N) per unit overlap; the gaussian
  // width along the softest direction of A/N adds on top.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(bm.hidden_coupling);
  const double soft = std::sqrt(1.0 / std::max(1e-12, eig.eigenvalues()(0)));
  const double reach = sqrt_n * (1.0 + soft) + 12.0 * soft * std::sqrt(1.0 / beta) + 1.0;
  const Vector lower = Vector::Constant(p, -reach);
  const Vector upper = Vector::Constant(p, reach);

  LnZEstimate est;
  est.value = 0.5 * bm.log_det_gram - 0.5 * p * std::log(2.0 * M_PI * n / beta) +
              log_integral_adaptive(log_f, lower, upper, tol, max_points_for_dim(p));
  est.method = LnZMethod::quadrature;
  return est;
}

LnZEstimate lnZ_quadrature(const ProjectionBM& bm, double tol) {
  const int p = bm.n_hidden;
  if (p > 3) throw TooLarge("lnZ_quadrature(ProjectionBM): p exceeds the guard");
  const int n = bm.n_visible;
  const double beta = bm.beta;

  // Z = det(A)^{-1/2} (beta / 2 pi)^{p/2} Int exp(-beta/2 l^T A^{-1} l)
  //     prod_i 2 cosh(beta (xi A^{-1} l)_i) dl.
  auto log_f = [&](const Vector& lambda) {
    double v = n * M_LN2 - 0.5 * beta * lambda.dot(bm.hidden_coupling * lambda);
    const Vector x = bm.visible_hidden * lambda;
    for (Eigen::Index i = 0; i < x.size(); ++i) v += log_cosh(beta * x(i));
    return v;
  };

  // lambda lives on the scale of xi^T s, i.e. up to N per coordinate, with
  // gaussian width sqrt(eigmax(A) / beta).
  Eigen::SelfAdjointEigenSolver<Matrix> eig(bm.hidden_coupling);
  const double eigmax_a = 1.0 / std::max(1e-12, eig.eigenvalues()(0));
  const double reach = static_cast<double>(n) + 12.0 * std::sqrt(eigmax_a / beta) + 1.0;
  const Vector lower = Vector::Constant(p, -reach);
  const Vector upper = Vector::Constant(p, reach);

  LnZEstimate est;
  est.value = -0.5 * bm.log_det_gram - 0.5 * p * std::log(2.0 * M_PI / beta) +
              log_integral_adaptive(log_f, lower, upper, tol, max_points_for_dim(p));
  est.method = LnZMethod::quadrature;
  return est;
}

AISConfig AISConfig::fig2_preset(std::uint64_t seed) {
  AISConfig cfg;
  cfg.n_chains = 500;
  cfg.n_steps = 1000;
  cfg.seed = seed;
  return cfg;
}

std::vector<double> geometric_schedule(int n_steps, double t0) {
  std::vector<double> sched(static_cast<std::size_t>(n_steps) + 1);
  sched[0] = 0.0;
  if (n_steps == 1) {
    sched[1] = 1.0;
    return sched;
  }
  const double log_t0 = std::log(t0);
  for (int j = 1; j <= n_steps; ++j) {
    sched[static_cast<std::size_t>(j)] =
        std::exp(log_t0 * (1.0 - static_cast<double>(j - 1) / (n_steps - 1)));
  }
  sched[static_cast<std::size_t>(n_steps)] = 1.0;
  return sched;
}

AISResult lnZ_ais_detailed(const GaussBernRBM& rbm, const AISConfig& cfg) {
  std::vector<double> schedule =
      cfg.schedule.empty() ? geometric_schedule(cfg.n_steps) : cfg.schedule;
  if (schedule.size() < 2 || schedule.front() != 0.0 || schedule.back() != 1.0) {
    throw DegenerateSchedule("AIS schedule must run from 0 to 1");
  }
  for (std::size_t j = 1; j < schedule.size(); ++j) {
    if (schedule[j] <= schedule[j - 1]) {
      throw DegenerateSchedule("AIS schedule must be strictly increasing");
    }
  }
  if (cfg.n_chains < 1) throw DegenerateSchedule("AIS needs at least one chain");

  const int p = rbm.n_hidden();
  const int n = rbm.n_visible();
  const int chains = cfg.n_chains;
  const double beta = rbm.beta;
  const int levels = static_cast<int>(schedule.size()) - 1;

  // Target un-normalized log density of the continuous representation; the
  // proposal is the unit normal, so ln Z = E[exp(accumulated weights)].
  const double target_const = n * M_LN2 - 0.5 * p * std::log(2.0 * M_PI / beta);
  auto target_rows = [&](const Matrix& lambda_cols) -> Eigen::RowVectorXd {
    Matrix x = rbm.W * lambda_cols;
    x.colwise() += rbm.b;
    Eigen::RowVectorXd out(lambda_cols.cols());
    for (Eigen::Index a = 0; a < x.cols(); ++a) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) acc += log_cosh(beta * x(i, a));
      out(a) = target_const + acc - 0.5 * beta * (lambda_cols.col(a) - rbm.c).squaredNorm();
    }
    return out;
  };
  const double proposal_const = -0.5 * p * std::log(2.0 * M_PI);
  auto proposal_rows = [&](const Matrix& lambda_cols) -> Eigen::RowVectorXd {
    Eigen::RowVectorXd out(lambda_cols.cols());
    for (Eigen::Index a = 0; a < lambda_cols.cols(); ++a) {
      out(a) = proposal_const - 0.5 * lambda_cols.col(a).squaredNorm();
    }
    return out;
  };

  std::vector<Rng> rng;
  rng.reserve(static_cast<std::size_t>(chains));
  for (int c = 0; c < chains; ++c) rng.push_back(Rng::stream(cfg.seed, static_cast<std::uint64_t>(c)));

  Matrix lambda(p, chains);
  for (int c = 0; c < chains; ++c) {
    for (int mu = 0; mu < p; ++mu) lambda(mu, c) = rng[static_cast<std::size_t>(c)].normal();
  }

  Eigen::RowVectorXd f_target = target_rows(lambda);
  Eigen::RowVectorXd f_prop = proposal_rows(lambda);
  std::vector<double> weights(static_cast<std::size_t>(chains), 0.0);
  std::vector<double> step(static_cast<std::size_t>(chains), 1.0);
  const int preamble = std::max(1, levels / 10);

  Matrix proposal(p, chains);
  for (int level = 1; level <= levels; ++level) {
    const double t_prev = schedule[static_cast<std::size_t>(level - 1)];
    const double t = schedule[static_cast<std::size_t>(level)];
    for (int c = 0; c < chains; ++c) {
      weights[static_cast<std::size_t>(c)] += (t - t_prev) * (f_target(c) - f_prop(c));
    }

    std::vector<int> accepted(static_cast<std::size_t>(chains), 0);
    for (int mh = 0; mh < cfg.mh_steps_per_level; ++mh) {
      for (int c = 0; c < chains; ++c) {
        for (int mu = 0; mu < p; ++mu) {
          proposal(mu, c) = lambda(mu, c) + step[static_cast<std::size_t>(c)] * rng[static_cast<std::size_t>(c)].normal();
        }
      }
      const Eigen::RowVectorXd g_target = target_rows(proposal);
      const Eigen::RowVectorXd g_prop = proposal_rows(proposal);
      for (int c = 0; c < chains; ++c) {
        const double log_alpha = (1.0 - t) * (g_prop(c) - f_prop(c)) + t * (g_target(c) - f_target(c));
        if (log_alpha >= 0.0 || rng[static_cast<std::size_t>(c)].uniform() < std::exp(log_alpha)) {
          lambda.col(c) = proposal.col(c);
          f_target(c) = g_target(c);
          f_prop(c) = g_prop(c);
          ++accepted[static_cast<std::size_t>(c)];
        }
      }
    }

    // Random-walk scale adapted toward ~50% acceptance over the early levels,
    // then frozen; the scale only ever depends on past levels.
    if (level <= preamble && cfg.mh_steps_per_level > 0) {
      for (int c = 0; c < chains; ++c) {
        const double rate =
            static_cast<double>(accepted[static_cast<std::size_t>(c)]) / cfg.mh_steps_per_level;
        step[static_cast<std::size_t>(c)] =
            std::clamp(step[static_cast<std::size_t>(c)] * std::exp(0.3 * (rate - 0.5)), 1e-3, 1e2);
      }
    }
  }

  const double wmax = *std::max_element(weights.begin(), weights.end());
  double mean_u = 0.0;
  for (double w : weights) mean_u += std::exp(w - wmax);
  mean_u /= chains;

  AISResult res;
  res.estimate.value = wmax + std::log(mean_u);
  res.estimate.method = LnZMethod::ais;
  res.estimate.chains = chains;
  res.estimate.steps = levels;
  if (chains > 1) {
    double var_u = 0.0;
    for (double w : weights) {
      const double d = std::exp(w - wmax) - mean_u;
      var_u += d * d;
    }
    var_u /= (chains - 1);
    res.estimate.std_error = std::sqrt(var_u / chains) / mean_u;
  }
  res.chain_log_weights = std::move(weights);
  return res;
}

LnZEstimate lnZ_ais(const GaussBernRBM& rbm, const AISConfig& cfg) {
  return lnZ_ais_detailed(rbm, cfg).estimate;
}

double log_likelihood(const GaussBernRBM& rbm, const Matrix& samples,
                      const LnZEstimate& lnz) {
  if (samples.cols() == 0) throw TooFewSamples("log_likelihood: empty dataset");
  const double m = static_cast<double>(samples.cols());
  Matrix h = rbm.W.transpose() * samples;  // p x M
  h.colwise() += rbm.c;
  const double data_term =
      rbm.b.dot(samples.rowwise().sum()) + 0.5 * h.squaredNorm();
  return rbm.beta * (data_term / m - 0.5 * rbm.c.squaredNorm()) - lnz.value;
}

}  // namespace hrbm
