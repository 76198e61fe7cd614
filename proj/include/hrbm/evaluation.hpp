#pragma once

#include <cstdint>
#include <vector>

#include "hrbm/forward_map.hpp"
#include "hrbm/hopfield.hpp"
#include "hrbm/rbm.hpp"
#include "hrbm/types.hpp"

namespace hrbm {

enum class LnZMethod { enumeration, quadrature, ais };

const char* to_string(LnZMethod m);

struct LnZEstimate {
  double value = 0.0;  // nats
  LnZMethod method = LnZMethod::enumeration;
  int chains = 0;
  int steps = 0;
  double std_error = 0.0;  // 0 for exact methods
};

// Exact ln Z by summing the 2^N visible states with the hidden integral done
// analytically. Guarded at N <= 20.
LnZEstimate lnZ_enumerate(const GaussBernRBM& rbm);

// Exact ln Z of the spin model by direct enumeration of e^{-beta H(s)}.
double lnZ_hopfield_enumerate(const HopfieldNetwork& net);

// Adaptive quadrature over the continuous p-dimensional representation of Z,
// evaluated in log space. Guarded at p <= 3.
LnZEstimate lnZ_quadrature(const GaussBernRBM& rbm, double tol = 1e-9);

// Same continuous representation for the overlap/projection BMs, with their
// determinant prefactors carried in log space.
LnZEstimate lnZ_quadrature(const OverlapBM& bm, double tol = 1e-9);
LnZEstimate lnZ_quadrature(const ProjectionBM& bm, double tol = 1e-9);

struct AISConfig {
  int n_chains = 100;
  int n_steps = 1000;              // annealing transitions when schedule empty
  std::vector<double> schedule;    // 0 -> 1 strictly increasing; default geometric
  std::uint64_t seed = 0;
  int mh_steps_per_level = 5;

  // 500 chains for 1000 steps.
  static AISConfig fig2_preset(std::uint64_t seed = 0);
};

std::vector<double> geometric_schedule(int n_steps, double t0 = 1e-4);

struct AISResult {
  LnZEstimate estimate;
  std::vector<double> chain_log_weights;
};

// Annealed importance sampling from a unit normal proposal to the continuous
// representation of Z, with a gaussian random-walk Metropolis kernel per
// level (step size adapted toward ~50% acceptance over the early levels).
AISResult lnZ_ais_detailed(const GaussBernRBM& rbm, const AISConfig& cfg);
LnZEstimate lnZ_ais(const GaussBernRBM& rbm, const AISConfig& cfg);

// Mean log-probability per sample in nats:
//   beta/M sum_a (b.s_a + 1/2 ||c + W^T s_a||^2) - beta/2 ||c||^2 - ln Z.
double log_likelihood(const GaussBernRBM& rbm, const Matrix& samples,
                      const LnZEstimate& lnz);

}  // namespace hrbm
