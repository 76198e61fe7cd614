#pragma once

#include <cstdint>
#include <string>

#include "hrbm/rng.hpp"
#include "hrbm/types.hpp"

namespace hrbm {

enum class InitKind { hopfield_qr, hebbian, pca, random };

InitKind parse_init_kind(const std::string& name);
const char* to_string(InitKind k);

struct InitSpec {
  InitKind kind = InitKind::hopfield_qr;
  int k = 1;  // sub-patterns per class (or hidden units per expert)
  std::uint64_t seed = 0;
};

// Top-p principal directions of the (mean-centered) samples, unit norm,
// sign fixed so the largest-magnitude entry of each column is positive.
Matrix pca_init(const Matrix& samples, int p);

// W = xi / sqrt(N).
Matrix hebbian_init(const Matrix& xi);

// Entries ~ Normal(0, stddev), the usual N(0, 0.01) convention read as
// standard deviation 0.01.
Matrix random_init(int n, int p, double stddev, Rng& rng);

}  // namespace hrbm
