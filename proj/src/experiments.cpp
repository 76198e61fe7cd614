#include "hrbm/experiments.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "hrbm/archive.hpp"
#include "hrbm/baselines.hpp"
#include "hrbm/dataset.hpp"
#include "hrbm/errors.hpp"
#include "hrbm/evaluation.hpp"
#include "hrbm/forward_map.hpp"
#include "hrbm/hopfield.hpp"
#include "hrbm/metrics.hpp"
#include "hrbm/patterns.hpp"
#include "hrbm/poe.hpp"
#include "hrbm/rbm.hpp"
#include "hrbm/reverse_map.hpp"

namespace hrbm {

ExperimentKind parse_experiment(const std::string& name) {
  if (name == "fig2" || name == "fig2_beta_sweep") return ExperimentKind::fig2_beta_sweep;
  if (name == "fig4" || name == "fig4_generative") return ExperimentKind::fig4_generative;
  if (name == "fig5" || name == "fig5_poe") return ExperimentKind::fig5_poe;
  if (name == "figD1" || name == "figD1_reverse") return ExperimentKind::figD1_reverse;
  if (name == "figD2" || name == "figD2_retrieval") return ExperimentKind::figD2_retrieval;
  throw SchemaMismatch("unknown experiment preset: " + name);
}

void render_weights(const Matrix& W, const std::filesystem::path& out, int tile_h,
                    int tile_w) {
  const int n = static_cast<int>(W.rows());
  if (tile_h <= 0 || tile_w <= 0) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side * side != n) {
      throw ShapeUnknown("render_weights: N is not a perfect square; pass (tile_h, tile_w)");
    }
    tile_h = tile_w = side;
  }
  if (tile_h * tile_w != n) throw ShapeUnknown("render_weights: tile shape does not match N");

  const int p = static_cast<int>(W.cols());
  const int grid_cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
  const int grid_rows = (p + grid_cols - 1) / grid_cols;
  const int img_w = grid_cols * (tile_w + 1) + 1;
  const int img_h = grid_rows * (tile_h + 1) + 1;
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(img_w) * img_h, 0);

  for (int mu = 0; mu < p; ++mu) {
    const int gr = mu / grid_cols;
    const int gc = mu % grid_cols;
    const double lo = W.col(mu).minCoeff();
    const double hi = W.col(mu).maxCoeff();
    for (int r = 0; r < tile_h; ++r) {
      for (int c2 = 0; c2 < tile_w; ++c2) {
        const double v = W(r * tile_w + c2, mu);
        const double g = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        const int y = 1 + gr * (tile_h + 1) + r;
        const int x = 1 + gc * (tile_w + 1) + c2;
        pixels[static_cast<std::size_t>(y) * img_w + x] =
            static_cast<std::uint8_t>(std::lround(255.0 * g));
      }
    }
  }

  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoError("cannot write " + out.string());
  f << "P5\n" << img_w << " " << img_h << "\n255\n";
  f.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

namespace {

struct Outputs {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> files;

  std::filesystem::path path(const std::string& name) {
    files.push_back(dir / name);
    return files.back();
  }
  void finish(bool complete) const {
    write_manifest(dir / "manifest.json", dir, files, complete);
  }
};

BinaryDataset load_train(const ExperimentConfig& cfg) {
  return head_subset(load_mnist(cfg.data_root, true), cfg.train_subset);
}
BinaryDataset load_test(const ExperimentConfig& cfg) {
  return head_subset(load_mnist(cfg.data_root, false), cfg.test_subset);
}

ModelArchive rbm_archive(const GaussBernRBM& rbm) {
  ModelArchive a;
  a.kind = ModelKind::rbm;
  a.n_visible = rbm.n_visible();
  a.n_hidden = rbm.n_hidden();
  a.beta = rbm.beta;
  a.matrices["W"] = rbm.W;
  a.matrices["b"] = rbm.b;
  a.matrices["c"] = rbm.c;
  return a;
}

std::string beta_tag(double beta) {
  std::string s = std::to_string(beta);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

// Per-index parallel map with results committed by index, so the output is
// independent of the thread count.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

void run_fig2(const ExperimentConfig& cfg, Outputs& out) {
  const BinaryDataset train_set = load_train(cfg);
  MetricsWriter metrics(out.path("metrics.csv"));

  for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
    const int k = cfg.ks[ki];
    const PatternMatrix patterns =
        k == 1 ? class_mean_patterns(train_set) : subpattern_clusters(train_set, k);
    {
      ModelArchive pa;
      pa.kind = ModelKind::hopfield;
      pa.n_visible = patterns.n();
      pa.n_hidden = patterns.p();
      pa.matrices["xi"] = patterns.xi;
      Matrix classes(1, patterns.p());
      for (int j = 0; j < patterns.p(); ++j) classes(0, j) = patterns.class_of_column[static_cast<std::size_t>(j)];
      pa.matrices["class_of_column"] = classes;
      save_model(pa, out.path("patterns_k" + std::to_string(k) + ".hrbm"));
    }

    for (std::size_t bi = 0; bi < cfg.betas.size(); ++bi) {
      const double beta = cfg.betas[bi];
      const GaussBernRBM rbm = hn_to_rbm(patterns, beta);
      for (int run = 0; run < cfg.runs; ++run) {
        AISConfig ais;
        ais.n_chains = cfg.ais_chains;
        ais.n_steps = cfg.ais_steps;
        ais.seed = mix_seed(cfg.seed, {1, ki, bi, static_cast<std::uint64_t>(run)});
        const LnZEstimate lnz = lnZ_ais(rbm, ais);
        const double lnp = log_likelihood(rbm, train_set.samples, lnz);
        metrics.write(0, run, "lnp_k" + std::to_string(k) + "_b" + beta_tag(beta), lnp);
      }
    }
  }
}

// Trains in place, reporting "epochs completed" (init = 0) to the evaluator.
template <typename Eval>
void train_rbm_with_eval(GaussBernRBM& model, const BinaryDataset& data,
                         const TrainConfig& tc, Eval&& evaluate) {
  TrainResult res = train(std::move(model), data.samples, tc,
                          [&](const EpochStats& st, const GaussBernRBM& m) {
                            evaluate(st.epoch + 1, m);
                          });
  model = std::move(res.model);
}

GaussBernRBM initial_model(InitKind kind, const PatternMatrix& patterns,
                           const BinaryDataset& train, double beta, std::uint64_t seed) {
  switch (kind) {
    case InitKind::hopfield_qr:
      return hn_to_rbm(patterns, beta);
    case InitKind::hebbian: {
      GaussBernRBM m = make_rbm(patterns.n(), patterns.p(), beta);
      m.W = hebbian_init(patterns.xi);
      return m;
    }
    case InitKind::pca: {
      GaussBernRBM m = make_rbm(train.n_visible(), patterns.p(), beta);
      m.W = pca_init(train.samples, patterns.p());
      return m;
    }
    case InitKind::random: {
      GaussBernRBM m = make_rbm(train.n_visible(), patterns.p(), beta);
      Rng rng(seed);
      m.W = random_init(train.n_visible(), patterns.p(), 0.01, rng);
      return m;
    }
  }
  throw SchemaMismatch("initial_model: bad init kind");
}

void run_fig4(const ExperimentConfig& cfg, Outputs& out) {
  const BinaryDataset train_set = load_train(cfg);
  MetricsWriter metrics(out.path("metrics.csv"));

  const PatternMatrix patterns =
      cfg.k == 1 ? class_mean_patterns(train_set) : subpattern_clusters(train_set, cfg.k);

  for (std::size_t ii = 0; ii < cfg.inits.size(); ++ii) {
    const InitKind kind = parse_init_kind(cfg.inits[ii]);
    for (int run = 0; run < cfg.runs; ++run) {
      GaussBernRBM model = initial_model(kind, patterns, train_set, cfg.beta,
                                         mix_seed(cfg.seed, {2, ii, static_cast<std::uint64_t>(run)}));
      const std::string tag = std::string(to_string(kind));

      auto evaluate = [&](int epoch, const GaussBernRBM& m) {
        AISConfig ais;
        ais.n_chains = cfg.ais_chains;
        ais.n_steps = cfg.ais_steps;
        ais.seed = mix_seed(cfg.seed, {3, ii, static_cast<std::uint64_t>(run),
                                       static_cast<std::uint64_t>(epoch)});
        const double lnp = log_likelihood(m, train_set.samples, lnZ_ais(m, ais));
        metrics.write(epoch, run, "lnp_" + tag, lnp);
        save_model(rbm_archive(m),
                   out.path(tag + "_run" + std::to_string(run) + "_epoch" +
                            std::to_string(epoch) + ".hrbm"));
      };

      evaluate(0, model);
      if (cfg.epochs > 0) {
        TrainConfig tc;
        tc.learning_rate = cfg.learning_rate;
        tc.batch_size = cfg.batch_size;
        tc.cd_steps = cfg.cd_steps;
        tc.epochs = cfg.epochs;
        tc.beta = cfg.beta;
        tc.seed = mix_seed(cfg.seed, {4, ii, static_cast<std::uint64_t>(run)});
        train_rbm_with_eval(model, train_set, tc, evaluate);
      }
    }
  }
}

void run_fig5(const ExperimentConfig& cfg, Outputs& out) {
  const BinaryDataset train_set = load_train(cfg);
  const BinaryDataset test_set = load_test(cfg);
  MetricsWriter metrics(out.path("metrics.csv"));

  for (std::size_t ii = 0; ii < cfg.inits.size(); ++ii) {
    const InitKind kind = parse_init_kind(cfg.inits[ii]);
    for (int run = 0; run < cfg.runs; ++run) {
      InitSpec spec;
      spec.kind = kind;
      spec.k = cfg.k;
      spec.seed = mix_seed(cfg.seed, {5, ii, static_cast<std::uint64_t>(run)});

      TrainConfig tc;
      tc.learning_rate = cfg.learning_rate;
      tc.batch_size = cfg.batch_size;
      tc.cd_steps = cfg.cd_steps;
      tc.beta = cfg.beta;
      tc.epochs = 0;  // initialization only; epochs advance below
      ExpertEnsemble ensemble = train_experts(train_set, spec, tc);

      const std::string metric =
          "test_error_" + std::string(to_string(kind)) + "_k" + std::to_string(cfg.k);
      auto evaluate = [&](int epoch) {
        const LogRegHead head = train_head(ensemble, train_set);
        metrics.write(epoch, run, metric, test_error(ensemble, head, test_set));
      };
      evaluate(0);

      for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (int cls = 0; cls < train_set.n_classes(); ++cls) {
          const auto& idx = train_set.class_index[static_cast<std::size_t>(cls)];
          Matrix class_samples(train_set.n_visible(), static_cast<Eigen::Index>(idx.size()));
          for (int j = 0; j < static_cast<int>(idx.size()); ++j) {
            class_samples.col(j) = train_set.samples.col(idx[static_cast<std::size_t>(j)]);
          }
          TrainConfig step = tc;
          step.epochs = 1;
          step.seed = mix_seed(cfg.seed, {6, ii, static_cast<std::uint64_t>(run),
                                          static_cast<std::uint64_t>(epoch),
                                          static_cast<std::uint64_t>(cls)});
          ensemble.experts[static_cast<std::size_t>(cls)] =
              train(std::move(ensemble.experts[static_cast<std::size_t>(cls)]), class_samples, step)
                  .model;
        }
        evaluate(epoch);
      }
    }
  }
}

void run_figD1(const ExperimentConfig& cfg, Outputs& out) {
  const BinaryDataset train_set = load_train(cfg);
  MetricsWriter metrics(out.path("metrics.csv"));

  const PatternMatrix patterns =
      cfg.k == 1 ? class_mean_patterns(train_set) : subpattern_clusters(train_set, cfg.k);
  const OrthogonalFactorization qr = qr_orthogonalize(patterns.xi);
  render_weights(patterns.xi, out.path("patterns_epoch0.pgm"));

  GaussBernRBM model = make_rbm(patterns.n(), patterns.p(), cfg.beta);
  model.W = qr.U;

  DescentConfig dc;  // alpha = 200, gamma = 0.05 presets
  auto reverse_eval = [&](int epoch, const GaussBernRBM& m) {
    const BinarizationSolution sol = binarize_descent(m.W, qr.R, dc);
    metrics.write(epoch, 0, "binarization_error", sol.objective);
    metrics.write(epoch, 0, "descent_iterations", sol.iterations);
    ReversePipelineResult pipe =
        reverse_pipeline(m, qr.R, dc, &patterns.class_of_column);
    metrics.write(epoch, 0, "fixed_point_fraction", pipe.fixed_point_fraction);
    if (epoch == cfg.epochs) {
      render_weights(pipe.solution.B_p,
                     out.path("recovered_epoch" + std::to_string(epoch) + ".pgm"));
      ModelArchive pa;
      pa.kind = ModelKind::hopfield;
      pa.n_visible = pipe.patterns.n();
      pa.n_hidden = pipe.patterns.p();
      pa.matrices["xi"] = pipe.patterns.xi;
      save_model(pa, out.path("recovered_epoch" + std::to_string(epoch) + ".hrbm"));
    }
  };

  reverse_eval(0, model);
  if (cfg.epochs > 0) {
    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.batch_size = cfg.batch_size;
    tc.cd_steps = cfg.cd_steps;
    tc.epochs = cfg.epochs;
    tc.beta = cfg.beta;
    tc.seed = mix_seed(cfg.seed, {7});
    train_rbm_with_eval(model, train_set, tc, reverse_eval);
  }
}

double retrieval_accuracy(const HopfieldNetwork& net, const PatternMatrix& patterns,
                          const BinaryDataset& test, std::uint64_t seed, int threads,
                          std::vector<double>* per_class) {
  std::vector<int> hit(static_cast<std::size_t>(test.count()), 0);
  parallel_for(test.count(), threads, [&](int a) {
    RetrievalConfig rc;
    rc.seed = mix_seed(seed, {static_cast<std::uint64_t>(a)});
    const RetrievalResult r = retrieve(net, patterns, test.samples.col(a), rc);
    hit[static_cast<std::size_t>(a)] =
        (r.retrieved && r.class_id == test.labels[static_cast<std::size_t>(a)]) ? 1 : 0;
  });

  std::vector<int> class_total(test.class_index.size(), 0);
  std::vector<int> class_hit(test.class_index.size(), 0);
  int total = 0;
  for (int a = 0; a < test.count(); ++a) {
    const int cls = test.labels[static_cast<std::size_t>(a)];
    ++class_total[static_cast<std::size_t>(cls)];
    class_hit[static_cast<std::size_t>(cls)] += hit[static_cast<std::size_t>(a)];
    total += hit[static_cast<std::size_t>(a)];
  }
  if (per_class) {
    per_class->assign(class_total.size(), 0.0);
    for (std::size_t c = 0; c < class_total.size(); ++c) {
      (*per_class)[c] = class_total[c] > 0
                            ? static_cast<double>(class_hit[c]) / class_total[c]
                            : 0.0;
    }
  }
  return static_cast<double>(total) / test.count();
}

void run_figD2(const ExperimentConfig& cfg, Outputs& out) {
  const BinaryDataset train_set = load_train(cfg);
  const BinaryDataset test_set = load_test(cfg);
  MetricsWriter metrics(out.path("metrics.csv"));

  const PatternMatrix xi0 =
      cfg.k == 1 ? class_mean_patterns(train_set) : subpattern_clusters(train_set, cfg.k);
  const HopfieldNetwork net0 = projection_couplings(xi0);

  std::vector<double> per_class;
  const double acc0 =
      retrieval_accuracy(net0, xi0, test_set, mix_seed(cfg.seed, {8}), cfg.threads, &per_class);
  metrics.write(0, 0, "retrieval_acc_xi0", acc0);
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    metrics.write(0, 0, "retrieval_acc_xi0_class" + std::to_string(c), per_class[c]);
  }

  if (cfg.epochs > 0) {
    const OrthogonalFactorization qr = qr_orthogonalize(xi0.xi);
    GaussBernRBM model = make_rbm(xi0.n(), xi0.p(), cfg.beta);
    model.W = qr.U;
    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.batch_size = cfg.batch_size;
    tc.cd_steps = cfg.cd_steps;
    tc.epochs = cfg.epochs;
    tc.beta = cfg.beta;
    tc.seed = mix_seed(cfg.seed, {9});
    model = train(std::move(model), train_set.samples, tc).model;

    ReversePipelineResult pipe = reverse_pipeline(model, qr.R, {}, &xi0.class_of_column);
    metrics.write(cfg.epochs, 0, "binarization_error", pipe.solution.objective);
    const double acc_t = retrieval_accuracy(pipe.net, pipe.patterns, test_set,
                                            mix_seed(cfg.seed, {10}), cfg.threads, &per_class);
    metrics.write(cfg.epochs, 0, "retrieval_acc_xiT", acc_t);
    for (std::size_t c = 0; c < per_class.size(); ++c) {
      metrics.write(cfg.epochs, 0, "retrieval_acc_xiT_class" + std::to_string(c), per_class[c]);
    }
  }
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  Outputs out;
  out.dir = cfg.out_dir;
  try {
    switch (cfg.experiment) {
      case ExperimentKind::fig2_beta_sweep: run_fig2(cfg, out); break;
      case ExperimentKind::fig4_generative: run_fig4(cfg, out); break;
      case ExperimentKind::fig5_poe: run_fig5(cfg, out); break;
      case ExperimentKind::figD1_reverse: run_figD1(cfg, out); break;
      case ExperimentKind::figD2_retrieval: run_figD2(cfg, out); break;
    }
  } catch (...) {
    out.finish(false);
    throw;
  }
  out.finish(true);
}

}  // namespace hrbm
