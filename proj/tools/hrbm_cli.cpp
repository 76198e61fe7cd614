// Command-line driver: pattern building, HN<->RBM mapping, CD training,
// partition-function estimation, the reverse map, retrieval, the PoE
// classifier, and the figure-style experiment presets.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hrbm/archive.hpp"
#include "hrbm/baselines.hpp"
#include "hrbm/dataset.hpp"
#include "hrbm/errors.hpp"
#include "hrbm/evaluation.hpp"
#include "hrbm/experiments.hpp"
#include "hrbm/forward_map.hpp"
#include "hrbm/hopfield.hpp"
#include "hrbm/metrics.hpp"
#include "hrbm/patterns.hpp"
#include "hrbm/poe.hpp"
#include "hrbm/rbm.hpp"
#include "hrbm/reverse_map.hpp"

namespace {

using namespace hrbm;

std::filesystem::path data_root_or_die(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("HRBM_DATA")) return env;
  throw IoError("no dataset root: pass --data-root or set HRBM_DATA");
}

ModelArchive patterns_archive(const PatternMatrix& patterns) {
  ModelArchive a;
  a.kind = ModelKind::hopfield;
  a.n_visible = patterns.n();
  a.n_hidden = patterns.p();
  a.matrices["xi"] = patterns.xi;
  Matrix classes(1, patterns.p());
  for (int j = 0; j < patterns.p(); ++j) {
    classes(0, j) = patterns.class_of_column[static_cast<std::size_t>(j)];
  }
  a.matrices["class_of_column"] = classes;
  return a;
}

PatternMatrix patterns_from_archive(const ModelArchive& a) {
  PatternMatrix p;
  p.xi = a.matrix("xi");
  p.class_of_column.resize(static_cast<std::size_t>(p.p()));
  if (a.has("class_of_column")) {
    const Matrix& c = a.matrix("class_of_column");
    for (int j = 0; j < p.p(); ++j) {
      p.class_of_column[static_cast<std::size_t>(j)] = static_cast<int>(c(0, j));
    }
  } else {
    for (int j = 0; j < p.p(); ++j) p.class_of_column[static_cast<std::size_t>(j)] = j;
  }
  return p;
}

ModelArchive rbm_to_archive(const GaussBernRBM& rbm) {
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

GaussBernRBM rbm_from_archive(const ModelArchive& a) {
  if (a.kind != ModelKind::rbm) throw SchemaMismatch("archive is not an RBM");
  GaussBernRBM rbm;
  rbm.W = a.matrix("W");
  rbm.b = a.has("b") ? Vector(a.matrix("b")) : Vector::Zero(rbm.W.rows());
  rbm.c = a.has("c") ? Vector(a.matrix("c")) : Vector::Zero(rbm.W.cols());
  rbm.beta = a.beta;
  return rbm;
}

int run(int argc, char** argv) {
  CLI::App app{"Hopfield network <-> binary-gaussian RBM toolkit"};
  app.require_subcommand(1);
  std::string data_root_flag;
  app.add_option("--data-root", data_root_flag, "MNIST directory (default: $HRBM_DATA)");

  // patterns build
  auto* patterns_cmd = app.add_subcommand("patterns", "pattern matrices");
  auto* pat_build = patterns_cmd->add_subcommand("build", "class-mean / sub-pattern matrix");
  int pat_k = 1, pat_subset = 0;
  std::string pat_out;
  pat_build->add_option("--k", pat_k, "sub-patterns per class")->default_val(1);
  pat_build->add_option("--subset", pat_subset, "use only the first N training samples");
  pat_build->add_option("--out", pat_out, "output archive")->required();

  // map hn2rbm
  auto* map_cmd = app.add_subcommand("map", "HN -> RBM mapping");
  auto* hn2rbm = map_cmd->add_subcommand("hn2rbm", "orthogonalize patterns into RBM weights");
  std::string map_patterns, map_out, map_method = "qr";
  double map_beta = 2.0;
  hn2rbm->add_option("--patterns", map_patterns, "pattern archive")->required();
  hn2rbm->add_option("--method", map_method, "qr|sqrt|svd")->default_val("qr");
  hn2rbm->add_option("--beta", map_beta)->default_val(2.0);
  hn2rbm->add_option("--out", map_out)->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "CD-K generative training");
  std::string tr_init = "hopfield", tr_out, tr_metrics;
  int tr_k = 1, tr_epochs = 50, tr_batch = 100, tr_cd = 20, tr_subset = 0;
  double tr_beta = 2.0, tr_lr = 1e-4;
  std::uint64_t tr_seed = 0;
  train_cmd->add_option("--init", tr_init, "hopfield|hebbian|pca|random")->default_val("hopfield");
  train_cmd->add_option("--k", tr_k, "sub-patterns per class")->default_val(1);
  train_cmd->add_option("--epochs", tr_epochs)->default_val(50);
  train_cmd->add_option("--batch", tr_batch)->default_val(100);
  train_cmd->add_option("--cd", tr_cd)->default_val(20);
  train_cmd->add_option("--beta", tr_beta)->default_val(2.0);
  train_cmd->add_option("--lr", tr_lr)->default_val(1e-4);
  train_cmd->add_option("--seed", tr_seed)->default_val(0);
  train_cmd->add_option("--subset", tr_subset, "first N training samples");
  train_cmd->add_option("--out", tr_out)->required();
  train_cmd->add_option("--metrics", tr_metrics, "per-epoch CSV");

  // eval ais
  auto* eval_cmd = app.add_subcommand("eval", "ln Z estimation");
  auto* eval_ais = eval_cmd->add_subcommand("ais", "annealed importance sampling");
  std::string ais_model, ais_csv;
  int ais_chains = 500, ais_steps = 1000, ais_mh = 5;
  std::uint64_t ais_seed = 0;
  eval_ais->add_option("--model", ais_model)->required();
  eval_ais->add_option("--chains", ais_chains)->default_val(500);
  eval_ais->add_option("--steps", ais_steps)->default_val(1000);
  eval_ais->add_option("--mh-steps", ais_mh)->default_val(5);
  eval_ais->add_option("--seed", ais_seed)->default_val(0);
  eval_ais->add_option("--weights-csv", ais_csv, "per-chain log weights");

  // reverse binarize
  auto* reverse_cmd = app.add_subcommand("reverse", "RBM -> HN direction");
  auto* rev_bin = reverse_cmd->add_subcommand("binarize", "approximate binarization of W");
  std::string rev_model, rev_x0 = "qr-r", rev_out;
  double rev_alpha = 200.0, rev_gamma = 0.05;
  int rev_starts = 8;
  std::uint64_t rev_seed = 0;
  rev_bin->add_option("--model", rev_model)->required();
  rev_bin->add_option("--x0", rev_x0, "qr-r|identity|random")->default_val("qr-r");
  rev_bin->add_option("--alpha", rev_alpha)->default_val(200.0);
  rev_bin->add_option("--gamma", rev_gamma)->default_val(0.05);
  rev_bin->add_option("--starts", rev_starts, "random multi-start count")->default_val(8);
  rev_bin->add_option("--seed", rev_seed)->default_val(0);
  rev_bin->add_option("--out", rev_out, "recovered pattern archive");

  // classify poe
  auto* classify_cmd = app.add_subcommand("classify", "classifiers");
  auto* poe_cmd = classify_cmd->add_subcommand("poe", "product-of-experts classifier");
  std::string poe_init = "hopfield", poe_metrics;
  int poe_k = 10, poe_epochs = 0, poe_subset = 0;
  std::uint64_t poe_seed = 0;
  poe_cmd->add_option("--init", poe_init)->default_val("hopfield");
  poe_cmd->add_option("--k", poe_k)->default_val(10);
  poe_cmd->add_option("--epochs", poe_epochs)->default_val(0);
  poe_cmd->add_option("--seed", poe_seed)->default_val(0);
  poe_cmd->add_option("--subset", poe_subset, "first N training samples");
  poe_cmd->add_option("--metrics", poe_metrics);

  // retrieve
  auto* retrieve_cmd = app.add_subcommand("retrieve", "associative-memory protocol on the test set");
  std::string ret_model, ret_patterns;
  double ret_beta = 2.0, ret_threshold = 0.7;
  int ret_ensemble = 20, ret_subset = 0, ret_threads = 1;
  std::uint64_t ret_seed = 0;
  retrieve_cmd->add_option("--model", ret_model, "hopfield archive (J or xi)")->required();
  retrieve_cmd->add_option("--patterns", ret_patterns, "pattern archive")->required();
  retrieve_cmd->add_option("--beta", ret_beta)->default_val(2.0);
  retrieve_cmd->add_option("--ensemble", ret_ensemble)->default_val(20);
  retrieve_cmd->add_option("--threshold", ret_threshold)->default_val(0.7);
  retrieve_cmd->add_option("--subset", ret_subset, "first N test samples");
  retrieve_cmd->add_option("--seed", ret_seed)->default_val(0);
  retrieve_cmd->add_option("--threads", ret_threads)->default_val(1);

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "figure-style presets");
  std::string exp_name, exp_out;
  ExperimentConfig ecfg;
  exp_cmd->add_option("preset", exp_name, "fig2|fig4|fig5|figD1|figD2")->required();
  exp_cmd->add_option("--out", exp_out)->required();
  exp_cmd->add_option("--seed", ecfg.seed)->default_val(0);
  exp_cmd->add_option("--subset", ecfg.train_subset)->default_val(10000);
  exp_cmd->add_option("--test-subset", ecfg.test_subset)->default_val(0);
  exp_cmd->add_option("--epochs", ecfg.epochs)->default_val(5);
  exp_cmd->add_option("--runs", ecfg.runs)->default_val(3);
  exp_cmd->add_option("--k", ecfg.k)->default_val(1);
  exp_cmd->add_option("--ks", ecfg.ks, "sub-pattern counts (fig2)");
  exp_cmd->add_option("--betas", ecfg.betas, "beta grid (fig2)");
  exp_cmd->add_option("--beta", ecfg.beta)->default_val(2.0);
  exp_cmd->add_option("--chains", ecfg.ais_chains)->default_val(100);
  exp_cmd->add_option("--steps", ecfg.ais_steps)->default_val(1000);
  exp_cmd->add_option("--batch", ecfg.batch_size)->default_val(100);
  exp_cmd->add_option("--cd", ecfg.cd_steps)->default_val(20);
  exp_cmd->add_option("--lr", ecfg.learning_rate)->default_val(1e-4);
  exp_cmd->add_option("--threads", ecfg.threads)->default_val(1);
  exp_cmd->add_option("--inits", ecfg.inits, "weight initializations");

  // render
  auto* render_cmd = app.add_subcommand("render", "PGM grid of W columns / patterns");
  std::string ren_model, ren_matrix = "W", ren_out;
  int ren_h = 0, ren_w = 0;
  render_cmd->add_option("--model", ren_model)->required();
  render_cmd->add_option("--matrix", ren_matrix)->default_val("W");
  render_cmd->add_option("--out", ren_out)->required();
  render_cmd->add_option("--tile-h", ren_h);
  render_cmd->add_option("--tile-w", ren_w);

  CLI11_PARSE(app, argc, argv);

  if (*pat_build) {
    const BinaryDataset train_set =
        head_subset(load_mnist(data_root_or_die(data_root_flag), true), pat_subset);
    const PatternMatrix p =
        pat_k == 1 ? class_mean_patterns(train_set) : subpattern_clusters(train_set, pat_k);
    ModelArchive a = patterns_archive(p);
    a.metadata["k"] = std::to_string(pat_k);
    a.metadata["subset"] = std::to_string(pat_subset);
    if (!is_full_rank(p.xi)) {
      std::cerr << "warning: pattern matrix is rank deficient\n";
      a.metadata["rank_deficient"] = "1";
    }
    save_model(a, pat_out);
    std::cout << "patterns: N=" << p.n() << " p=" << p.p() << " -> " << pat_out << "\n";
    return 0;
  }

  if (*hn2rbm) {
    const PatternMatrix p = patterns_from_archive(load_model(map_patterns));
    FactorizationMethod method = FactorizationMethod::qr;
    if (map_method == "sqrt") method = FactorizationMethod::sqrt;
    else if (map_method == "svd") method = FactorizationMethod::svd;
    else if (map_method != "qr") throw SchemaMismatch("unknown method " + map_method);

    const GaussBernRBM rbm = hn_to_rbm(p, map_beta, Vector(), method);
    ModelArchive a = rbm_to_archive(rbm);
    a.metadata["method"] = map_method;
    a.matrices["xi"] = p.xi;
    if (method == FactorizationMethod::qr) a.matrices["R"] = qr_orthogonalize(p.xi).R;
    save_model(a, map_out);
    std::cout << "rbm: N=" << rbm.n_visible() << " p=" << rbm.n_hidden()
              << " beta=" << rbm.beta << " -> " << map_out << "\n";
    return 0;
  }

  if (*train_cmd) {
    const BinaryDataset train_set =
        head_subset(load_mnist(data_root_or_die(data_root_flag), true), tr_subset);
    const InitKind kind = parse_init_kind(tr_init);

    PatternMatrix p;
    GaussBernRBM model;
    Matrix r_companion;
    if (kind == InitKind::hopfield_qr || kind == InitKind::hebbian) {
      p = tr_k == 1 ? class_mean_patterns(train_set) : subpattern_clusters(train_set, tr_k);
      if (kind == InitKind::hopfield_qr) {
        OrthogonalFactorization f = qr_orthogonalize(p.xi);
        model = make_rbm(p.n(), p.p(), tr_beta);
        model.W = f.U;
        r_companion = f.R;
      } else {
        model = make_rbm(p.n(), p.p(), tr_beta);
        model.W = hebbian_init(p.xi);
      }
    } else if (kind == InitKind::pca) {
      model = make_rbm(train_set.n_visible(), 10 * tr_k, tr_beta);
      model.W = pca_init(train_set.samples, 10 * tr_k);
    } else {
      model = make_rbm(train_set.n_visible(), 10 * tr_k, tr_beta);
      Rng rng(tr_seed);
      model.W = random_init(train_set.n_visible(), 10 * tr_k, 0.01, rng);
    }

    TrainConfig tc;
    tc.learning_rate = tr_lr;
    tc.batch_size = tr_batch;
    tc.cd_steps = tr_cd;
    tc.epochs = tr_epochs;
    tc.seed = tr_seed;
    tc.beta = tr_beta;

    std::unique_ptr<MetricsWriter> mw;
    if (!tr_metrics.empty()) mw = std::make_unique<MetricsWriter>(tr_metrics);
    TrainResult res = train(std::move(model), train_set.samples, tc,
                            [&](const EpochStats& st, const GaussBernRBM&) {
                              if (mw) {
                                mw->write(st.epoch + 1, 0, "mean_update_norm", st.mean_update_norm);
                                mw->write(st.epoch + 1, 0, "weight_norm", st.weight_norm);
                              }
                            });

    ModelArchive a = rbm_to_archive(res.model);
    a.metadata["init"] = tr_init;
    a.metadata["k"] = std::to_string(tr_k);
    a.metadata["epochs"] = std::to_string(tr_epochs);
    a.metadata["cd"] = std::to_string(tr_cd);
    a.metadata["lr"] = format_double(tr_lr);
    a.metadata["seed"] = std::to_string(tr_seed);
    a.metadata["random_init_convention"] = "stddev 0.01";
    if (p.p() > 0) a.matrices["xi"] = p.xi;
    if (r_companion.size() > 0) a.matrices["R"] = r_companion;
    save_model(a, tr_out);
    std::cout << "trained " << tr_init << " RBM for " << tr_epochs << " epochs -> " << tr_out
              << "\n";
    return 0;
  }

  if (*eval_ais) {
    const GaussBernRBM rbm = rbm_from_archive(load_model(ais_model));
    AISConfig cfg;
    cfg.n_chains = ais_chains;
    cfg.n_steps = ais_steps;
    cfg.mh_steps_per_level = ais_mh;
    cfg.seed = ais_seed;
    const AISResult res = lnZ_ais_detailed(rbm, cfg);
    std::cout << "lnZ = " << format_double(res.estimate.value)
              << "  stderr = " << format_double(res.estimate.std_error)
              << "  (chains=" << res.estimate.chains << ", steps=" << res.estimate.steps
              << ")\n";
    if (!ais_csv.empty()) {
      std::ofstream f(ais_csv);
      f << "chain,log_weight\n";
      for (std::size_t c = 0; c < res.chain_log_weights.size(); ++c) {
        f << c << ',' << format_double(res.chain_log_weights[c]) << '\n';
      }
    }
    return 0;
  }

  if (*rev_bin) {
    const ModelArchive arch = load_model(rev_model);
    const GaussBernRBM rbm = rbm_from_archive(arch);
    DescentConfig dc;
    dc.alpha = rev_alpha;
    dc.gamma = rev_gamma;

    BinarizationSolution sol;
    if (rev_x0 == "qr-r") {
      if (!arch.has("R")) {
        throw SchemaMismatch("model archive has no stored R; use --x0 identity or random");
      }
      sol = binarize_descent(rbm.W, arch.matrix("R"), dc);
    } else if (rev_x0 == "identity") {
      sol = binarize_descent(rbm.W, Matrix::Identity(rbm.n_hidden(), rbm.n_hidden()), dc);
    } else if (rev_x0 == "random") {
      Rng rng(rev_seed);
      sol = binarize_descent_multistart(rbm.W, rev_starts, dc, rng);
    } else {
      throw SchemaMismatch("unknown --x0 " + rev_x0);
    }

    const char* status = sol.status == DescentStatus::converged ? "converged"
                         : sol.status == DescentStatus::no_convergence ? "no-convergence"
                                                                       : "singular-x";
    std::cout << "binarization error ||E||_F = " << format_double(sol.objective) << "  ("
              << status << ", " << sol.iterations << " iterations)\n";
    if (!rev_out.empty()) {
      PatternMatrix p;
      p.xi = sol.B;
      p.class_of_column.resize(static_cast<std::size_t>(p.p()));
      for (int j = 0; j < p.p(); ++j) p.class_of_column[static_cast<std::size_t>(j)] = j;
      ModelArchive a = patterns_archive(p);
      a.metadata["binarization_error"] = format_double(sol.objective);
      a.metadata["status"] = status;
      a.matrices["X"] = sol.X;
      a.matrices["B_p"] = sol.B_p;
      save_model(a, rev_out);
    }
    return 0;
  }

  if (*poe_cmd) {
    const auto root = data_root_or_die(data_root_flag);
    const BinaryDataset train_set = head_subset(load_mnist(root, true), poe_subset);
    const BinaryDataset test_set = load_mnist(root, false);

    InitSpec spec;
    spec.kind = parse_init_kind(poe_init);
    spec.k = poe_k;
    spec.seed = poe_seed;
    TrainConfig tc;
    tc.epochs = poe_epochs;
    tc.seed = poe_seed;

    const ExpertEnsemble ensemble = train_experts(train_set, spec, tc);
    const LogRegHead head = train_head(ensemble, train_set);
    const double train_err = test_error(ensemble, head, train_set);
    const double test_err = test_error(ensemble, head, test_set);
    std::cout << "poe " << poe_init << " k=" << poe_k << " epochs=" << poe_epochs
              << ": train error = " << train_err << ", test error = " << test_err << "\n";
    if (!poe_metrics.empty()) {
      MetricsWriter mw(poe_metrics);
      mw.write(poe_epochs, 0, "train_error_" + poe_init + "_k" + std::to_string(poe_k), train_err);
      mw.write(poe_epochs, 0, "test_error_" + poe_init + "_k" + std::to_string(poe_k), test_err);
    }
    return 0;
  }

  if (*retrieve_cmd) {
    const auto root = data_root_or_die(data_root_flag);
    const BinaryDataset test_set = head_subset(load_mnist(root, false), ret_subset);
    const PatternMatrix p = patterns_from_archive(load_model(ret_patterns));

    const ModelArchive marc = load_model(ret_model);
    HopfieldNetwork net;
    if (marc.has("J")) {
      net.J = marc.matrix("J");
      net.b = marc.has("b") ? Vector(marc.matrix("b")) : Vector::Zero(net.J.rows());
    } else {
      net = projection_couplings(patterns_from_archive(marc));
    }

    RetrievalConfig rc;
    rc.beta = ret_beta;
    rc.ensemble = ret_ensemble;
    rc.threshold = ret_threshold;

    std::vector<int> class_total(static_cast<std::size_t>(test_set.n_classes()), 0);
    std::vector<int> class_hit(static_cast<std::size_t>(test_set.n_classes()), 0);
    int hits = 0, no_retrieval = 0;
    for (int a = 0; a < test_set.count(); ++a) {
      rc.seed = mix_seed(ret_seed, {static_cast<std::uint64_t>(a)});
      const RetrievalResult r = retrieve(net, p, test_set.samples.col(a), rc);
      const int cls = test_set.labels[static_cast<std::size_t>(a)];
      ++class_total[static_cast<std::size_t>(cls)];
      if (!r.retrieved) {
        ++no_retrieval;
      } else if (r.class_id == cls) {
        ++class_hit[static_cast<std::size_t>(cls)];
        ++hits;
      }
    }
    for (std::size_t c = 0; c < class_total.size(); ++c) {
      std::cout << "class " << c << ": "
                << (class_total[c] ? double(class_hit[c]) / class_total[c] : 0.0) << "\n";
    }
    std::cout << "overall accuracy " << double(hits) / test_set.count() << " ("
              << no_retrieval << " with no retrieval)\n";
    return 0;
  }

  if (*exp_cmd) {
    ecfg.experiment = parse_experiment(exp_name);
    ecfg.data_root = data_root_or_die(data_root_flag);
    ecfg.out_dir = exp_out;
    run_experiment(ecfg);
    std::cout << "experiment " << exp_name << " -> " << exp_out << "\n";
    return 0;
  }

  if (*render_cmd) {
    const ModelArchive a = load_model(ren_model);
    render_weights(a.matrix(ren_matrix), ren_out, ren_h, ren_w);
    std::cout << "rendered " << ren_matrix << " -> " << ren_out << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hrbm::Error& e) {
    nlohmann::json j{{"error", e.code()}, {"message", e.what()}};
    std::cerr << j.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json j{{"error", "Internal"}, {"message", e.what()}};
    std::cerr << j.dump() << "\n";
    return 2;
  }
}
