#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hrbm/types.hpp"

namespace hrbm {

enum class ExperimentKind {
  fig2_beta_sweep,
  fig4_generative,
  fig5_poe,
  figD1_reverse,
  figD2_retrieval,
};

ExperimentKind parse_experiment(const std::string& name);

// Desk-scale defaults: 10,000 training samples, 5 epochs, 100 AIS chains.
// The full-paper protocols are reachable by turning the knobs up.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::fig2_beta_sweep;
  std::filesystem::path data_root;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  int train_subset = 10000;   // 0 = full training set
  int test_subset = 0;        // 0 = full test set
  int epochs = 5;
  int runs = 3;
  int k = 1;                  // sub-patterns per class
  std::vector<double> betas = {0.5, 1.0, 2.0, 4.0};
  std::vector<int> ks = {1, 2};
  double beta = 2.0;
  int ais_chains = 100;
  int ais_steps = 1000;
  int batch_size = 100;
  int cd_steps = 20;
  double learning_rate = 1e-4;
  int threads = 1;
  std::vector<std::string> inits = {"hopfield", "random"};
};

// Runs the preset, writes metrics.csv (+ side files and model archives) under
// out_dir, and finishes with a manifest listing every emitted file with a
// content hash; deterministic under a fixed (seed, threads).
void run_experiment(const ExperimentConfig& cfg);

// One grayscale tile per column of W, each tile min/max normalized, written
// as a binary PGM. N must be a perfect square unless (tile_h, tile_w) are
// given explicitly.
void render_weights(const Matrix& W, const std::filesystem::path& out,
                    int tile_h = 0, int tile_w = 0);

}  // namespace hrbm
