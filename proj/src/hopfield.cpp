#include "hrbm/hopfield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hrbm/errors.hpp"

namespace hrbm {

namespace {

void require_full_rank(const Matrix& xi, const char* who) {
  if (!is_full_rank(xi)) {
    throw RankDeficient(std::string(who) + ": pattern matrix is not full column rank");
  }
}

}  // namespace

HopfieldNetwork projection_couplings(const PatternMatrix& patterns) {
  require_full_rank(patterns.xi, "projection_couplings");
  Eigen::HouseholderQR<Matrix> qr(patterns.xi);
  Matrix q = qr.householderQ() * Matrix::Identity(patterns.xi.rows(), patterns.xi.cols());
  HopfieldNetwork net;
  net.J = q * q.transpose();
  net.b = Vector::Zero(patterns.xi.rows());
  net.factor = std::move(q);
  return net;
}

HopfieldNetwork hebbian_couplings(const PatternMatrix& patterns) {
  const double n = static_cast<double>(patterns.xi.rows());
  HopfieldNetwork net;
  net.J = patterns.xi * patterns.xi.transpose() / n;
  net.b = Vector::Zero(patterns.xi.rows());
  net.factor = patterns.xi / std::sqrt(n);
  return net;
}

void zero_diagonal(HopfieldNetwork& net) {
  net.J.diagonal().setZero();
  net.factor.resize(0, 0);
}

double energy(const HopfieldNetwork& net, const Vector& s) {
  double quad;
  if (net.has_factor()) {
    quad = (net.factor.transpose() * s).squaredNorm();
  } else {
    quad = s.dot(net.J * s);
  }
  return -0.5 * quad - net.b.dot(s);
}

Vector fields(const HopfieldNetwork& net, const Vector& s) {
  if (net.has_factor()) {
    return net.factor * (net.factor.transpose() * s) + net.b;
  }
  return net.J * s + net.b;
}

OverlapState overlaps(const PatternMatrix& patterns, const Vector& s) {
  OverlapState st;
  st.A = patterns.xi.transpose() * patterns.xi;
  const Vector xts = patterns.xi.transpose() * s;
  st.m = xts / static_cast<double>(patterns.n());
  st.a = st.A.ldlt().solve(xts);
  if ((st.A * st.a - xts).norm() > 1e-6 * (1.0 + xts.norm())) {
    throw RankDeficient("overlaps: xi^T xi is numerically singular");
  }
  return st;
}

Vector update_deterministic(const HopfieldNetwork& net, const Vector& s) {
  const Vector h = fields(net, s);
  Vector out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out(i) = h(i) > 0.0 ? 1.0 : (h(i) < 0.0 ? -1.0 : s(i));
  }
  return out;
}

namespace {

// Shared single-site sweep machinery. Sites are visited in uniformly random
// order; the rule sees the cavity field h_i = sum_{j != i} J_ij s_j + b_i
// (self-interactions drop out of single-spin conditionals, so this is what
// both the heat bath and Metropolis need). The field is maintained
// incrementally: through z = F^T s when a low-rank factor is available,
// otherwise through the full h = J s vector.
template <typename SiteRule>
void sweep_sites(const HopfieldNetwork& net, Vector& s, Rng& rng, SiteRule&& rule) {
  const int n = net.n();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  if (net.has_factor()) {
    const Vector jdiag = net.factor.rowwise().squaredNorm();
    Vector z = net.factor.transpose() * s;
    for (int i : order) {
      const double old = s(i);
      const double h = net.factor.row(i).dot(z) + net.b(i) - jdiag(i) * old;
      const double next = rule(h, old);
      if (next != old) {
        s(i) = next;
        z += net.factor.row(i).transpose() * (next - old);
      }
    }
  } else {
    Vector h = net.J * s + net.b;
    for (int i : order) {
      const double old = s(i);
      const double next = rule(h(i) - net.J(i, i) * old, old);
      if (next != old) {
        s(i) = next;
        h += net.J.col(i) * (next - old);
      }
    }
  }
}

}  // namespace

void stochastic_sweep(const HopfieldNetwork& net, Vector& s, double beta, Rng& rng,
                      SpinDynamics dynamics) {
  if (dynamics == SpinDynamics::glauber) {
    sweep_sites(net, s, rng, [&](double h, double) {
      const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * beta * h));
      return rng.uniform() < p_plus ? 1.0 : -1.0;
    });
  } else {
    sweep_sites(net, s, rng, [&](double h, double old) {
      const double de = 2.0 * old * h;  // flip energy
      if (de <= 0.0 || rng.uniform() < std::exp(-beta * de)) return -old;
      return old;
    });
  }
}

void update_stochastic(const HopfieldNetwork& net, Vector& s, Rng& rng) {
  stochastic_sweep(net, s, net.beta, rng);
}

void deterministic_async_sweep(const HopfieldNetwork& net, Vector& s, Rng& rng) {
  sweep_sites(net, s, rng, [](double h, double old) {
    return h > 0.0 ? 1.0 : (h < 0.0 ? -1.0 : old);
  });
}

namespace {

bool equal_state(const Vector& a, const Vector& b) {
  return (a.array() == b.array()).all();
}

int match_pattern(const Matrix& xi, const Vector& s) {
  for (Eigen::Index mu = 0; mu < xi.cols(); ++mu) {
    if (equal_state(s, xi.col(mu)) || equal_state(s, -xi.col(mu))) {
      return static_cast<int>(mu);
    }
  }
  return -1;
}

}  // namespace

RetrievalResult retrieve(const HopfieldNetwork& net, const PatternMatrix& patterns,
                         const Vector& s0, const RetrievalConfig& cfg) {
  const int n_classes =
      1 + *std::max_element(patterns.class_of_column.begin(), patterns.class_of_column.end());

  RetrievalResult res;
  res.class_weights = Vector::Zero(n_classes);

  // Deterministic synchronous stage until a fixed point or a 2-cycle.
  Vector s = s0;
  Vector prev = s0;
  bool fixed = false;
  for (int t = 0; t < cfg.max_det_sweeps; ++t) {
    Vector next = update_deterministic(net, s);
    ++res.det_sweeps;
    if (equal_state(next, s)) {
      fixed = true;
      break;
    }
    if (t > 0 && equal_state(next, prev)) break;  // 2-cycle
    prev = s;
    s = next;
  }

  const Matrix sgn_xi = sign_pm(patterns.xi);
  if (fixed) {
    const int mu = match_pattern(sgn_xi, s);
    if (mu >= 0) {
      res.retrieved = true;
      res.fixed_point_was_pattern = true;
      res.class_id = patterns.class_of_column[static_cast<std::size_t>(mu)];
      res.class_weights(res.class_id) = 1.0;
      return res;
    }
  }

  // Stochastic stage: independent trajectories from the deterministic result,
  // each halting once some pattern overlap crosses the threshold.
  const double inv_n = 1.0 / static_cast<double>(patterns.n());
  const double w = 1.0 / static_cast<double>(cfg.ensemble);
  int successes = 0;
  for (int traj = 0; traj < cfg.ensemble; ++traj) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(traj));
    Vector st = s;
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
      stochastic_sweep(net, st, cfg.beta, rng, cfg.dynamics);
      const Vector m = (sgn_xi.transpose() * st) * inv_n;
      int best = -1;
      double best_m = cfg.threshold;
      for (Eigen::Index mu = 0; mu < m.size(); ++mu) {
        if (m(mu) > best_m) {
          best_m = m(mu);
          best = static_cast<int>(mu);
        }
      }
      if (best >= 0) {
        res.class_weights(patterns.class_of_column[static_cast<std::size_t>(best)]) += w;
        ++successes;
        break;
      }
    }
  }

  if (successes == 0) {
    res.retrieved = false;
    return res;
  }
  res.retrieved = true;
  Eigen::Index argmax = 0;
  res.class_weights.maxCoeff(&argmax);
  res.class_id = static_cast<int>(argmax);
  return res;
}

}  // namespace hrbm
