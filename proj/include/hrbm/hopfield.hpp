#pragma once

#include <cstdint>
#include <optional>

#include "hrbm/patterns.hpp"
#include "hrbm/rng.hpp"
#include "hrbm/types.hpp"

namespace hrbm {

// Pairwise spin model H(s) = -1/2 s^T J s - b^T s at inverse temperature beta.
// When J has known low-rank structure J = F F^T, `factor` holds F and the
// dynamics run in O(N p) per sweep instead of O(N^2).
struct HopfieldNetwork {
  Matrix J;
  Vector b;
  double beta = 1.0;
  Matrix factor;  // optional N x r with J = factor * factor^T; empty if unknown

  int n() const { return static_cast<int>(J.rows()); }
  bool has_factor() const { return factor.size() > 0; }
};

// J = xi (xi^T xi)^{-1} xi^T. Symmetric, idempotent, trace p, J xi = xi.
HopfieldNetwork projection_couplings(const PatternMatrix& patterns);

// J = xi xi^T / N. Coincides with the projection rule for orthogonal patterns.
HopfieldNetwork hebbian_couplings(const PatternMatrix& patterns);

// Zeroes J's diagonal (capacity experiments). Drops any low-rank factor.
void zero_diagonal(HopfieldNetwork& net);

double energy(const HopfieldNetwork& net, const Vector& s);

// Local fields h = J s + b.
Vector fields(const HopfieldNetwork& net, const Vector& s);

struct OverlapState {
  Vector m;  // xi^T s / N
  Vector a;  // (xi^T xi)^{-1} xi^T s
  Matrix A;  // xi^T xi
};

OverlapState overlaps(const PatternMatrix& patterns, const Vector& s);

// Synchronous update s' = sgn(J s + b); zero net input keeps the current spin.
Vector update_deterministic(const HopfieldNetwork& net, const Vector& s);

enum class SpinDynamics { glauber, metropolis };

// One full sweep of single-site stochastic updates in uniformly random order
// at the given inverse temperature. Glauber: P(s_i=+1) = 1/(1+exp(-2 beta h_i)).
void stochastic_sweep(const HopfieldNetwork& net, Vector& s, double beta, Rng& rng,
                      SpinDynamics dynamics = SpinDynamics::glauber);

// Sweep at the network's own beta.
void update_stochastic(const HopfieldNetwork& net, Vector& s, Rng& rng);

// One asynchronous deterministic sweep (sgn of the local field, tie keeps the
// spin) in uniformly random order. Weakly decreases the energy when b = 0 and
// the diagonal of J is non-negative.
void deterministic_async_sweep(const HopfieldNetwork& net, Vector& s, Rng& rng);

struct RetrievalConfig {
  double beta = 2.0;
  int ensemble = 20;
  double threshold = 0.7;
  int max_det_sweeps = 100;
  int max_sweeps = 200;  // stochastic sweeps per trajectory
  std::uint64_t seed = 0;
  SpinDynamics dynamics = SpinDynamics::glauber;
};

struct RetrievalResult {
  bool retrieved = false;          // false means NoRetrieval
  int class_id = -1;
  Vector class_weights;            // histogram over classes, sums to <= 1
  bool fixed_point_was_pattern = false;
  int det_sweeps = 0;
};

// Deterministic sweeps to a fixed point (2-cycles fall through); an exact
// +-pattern match returns its class with weight 1, otherwise an ensemble of
// stochastic trajectories votes, each halting when some pattern overlap
// N^{-1} s . sgn(xi_mu) exceeds the threshold.
RetrievalResult retrieve(const HopfieldNetwork& net, const PatternMatrix& patterns,
                         const Vector& s0, const RetrievalConfig& cfg);

}  // namespace hrbm
