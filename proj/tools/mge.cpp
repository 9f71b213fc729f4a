#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mge/common.hpp"
#include "mge/eval.hpp"
#include "mge/fusion.hpp"
#include "mge/pipeline.hpp"

namespace {

struct CliState {
  std::string config_file;
  std::string out_dir = "run";
  std::vector<std::string> sets;  // KEY=VALUE overrides
  bool seed_given = false;
  uint64_t seed = 1;
  bool workers_given = false;
  int workers = 1;
};

// Stage subcommands operate on an existing run directory, so they adopt the
// recorded manifest as their base configuration and explicit flags override
// it; the run roots (synth, e2e) define a fresh configuration instead.
mge::PipelineConfig resolve_config(const CliState& st, bool manifest_base) {
  mge::PipelineConfig cfg;
  if (manifest_base) {
    const std::string manifest =
        (std::filesystem::path(st.out_dir) / mge::artifact::manifest).string();
    if (std::filesystem::exists(manifest))
      cfg = mge::config_from_kv(mge::parse_kv_file(manifest), cfg);
  }
  if (!st.config_file.empty())
    cfg = mge::config_from_kv(mge::parse_kv_file(st.config_file), cfg);
  std::map<std::string, std::string> overrides;
  for (const std::string& s : st.sets) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw mge::ValidationError("--set expects KEY=VALUE, got '" + s + "'");
    overrides[s.substr(0, eq)] = s.substr(eq + 1);
  }
  cfg = mge::config_from_kv(overrides, cfg);
  cfg.out_dir = st.out_dir;
  if (st.seed_given) cfg.seed = st.seed;
  if (st.workers_given) cfg.workers = st.workers;
  return cfg;
}

void print_report(const mge::MetricsReport& r) {
  std::cout << mge::report_summary_line(r) << '\n';
  std::cout << mge::render_report_percent(r);
}

int dispatch(CLI::App& app, const CliState& st, const std::string& task_override,
             const std::string& model_override, double threshold_override,
             bool threshold_given, const std::string& embed_role,
             const std::string& mimic_node, bool mimic_naive,
             const std::string& rfe_dataset, int rfe_step, int rfe_folds) {
  const bool manifest_base =
      !app.got_subcommand("synth") && !app.got_subcommand("e2e");
  mge::PipelineConfig cfg = resolve_config(st, manifest_base);
  if (!task_override.empty()) cfg.task = task_override;
  if (!model_override.empty()) cfg.model = model_override;
  if (threshold_given) cfg.threshold = threshold_override;

  if (app.got_subcommand("synth")) {
    mge::stage_synth(cfg);
    std::cout << "synth: graphs and labels written to " << cfg.out_dir << '\n';
  } else if (app.got_subcommand("train-embed")) {
    mge::stage_embed(cfg, embed_role);
    std::cout << "train-embed: " << embed_role << " embeddings written\n";
  } else if (app.got_subcommand("fuse")) {
    mge::stage_fuse(cfg);
    std::cout << "fuse: dataset written for task " << cfg.task << '\n';
  } else if (app.got_subcommand("mimic-train")) {
    const mge::MimicTrainResult res = mge::stage_mimic_train(cfg);
    std::cout << "mimic-train: train_mse=" << mge::format_double(res.train_mse)
              << " val_mse=" << mge::format_double(res.val_mse)
              << " train_nodes=" << res.train_nodes
              << " val_nodes=" << res.val_nodes << '\n';
  } else if (app.got_subcommand("mimic-infer")) {
    const mge::Graph g = mge::load_edge_list_file(
        mge::artifact_path(cfg, mge::artifact::friendship),
        mge::GraphKind::homogeneous);
    const mge::EmbeddingSet e = mge::load_embeddings_file(
        mge::artifact_path(cfg, mge::artifact::emb_friendship));
    std::vector<float> vec;
    if (mimic_naive) {
      vec = mge::naive_mimic(mimic_node, g, e);
    } else {
      const mge::MimicModel m = mge::load_mimic_model_file(
          mge::artifact_path(cfg, mge::artifact::mimic_model));
      vec = mge::mimic_infer(m, mimic_node, g, e);
    }
    for (size_t d = 0; d < vec.size(); ++d)
      std::cout << (d ? " " : "") << mge::format_float(vec[d]);
    std::cout << '\n';
  } else if (app.got_subcommand("classify")) {
    mge::stage_classify(cfg);
    std::cout << "classify: model and test predictions written\n";
  } else if (app.got_subcommand("evaluate")) {
    print_report(mge::stage_evaluate(cfg));
  } else if (app.got_subcommand("rfe")) {
    const std::string path = rfe_dataset.empty()
                                 ? mge::artifact_path(cfg, mge::artifact::dataset)
                                 : rfe_dataset;
    const mge::FeatureDataset ds = mge::load_dataset_file(path);
    const mge::RfeResult res =
        mge::rfe_select(ds, rfe_step, rfe_folds, mge::mix64(cfg.seed, 0xFE));
    if (res.degenerate)
      std::cout << "warning: no varying feature; all columns retained\n";
    for (const auto& pt : res.curve)
      std::cout << "size=" << pt.feature_count
                << " cv_accuracy=" << mge::format_double(pt.cv_accuracy) << '\n';
    std::cout << "selected:";
    for (int c : res.selected) std::cout << ' ' << c;
    std::cout << '\n';
  } else if (app.got_subcommand("e2e")) {
    print_report(mge::run_e2e(cfg));
  } else {
    std::cerr << app.help() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-graph node embedding toolkit"};
  app.require_subcommand(0, 1);

  CliState st;
  app.add_option("--config", st.config_file, "key=value config file");
  app.add_option("--out-dir", st.out_dir, "artifact directory")
      ->capture_default_str();
  app.add_option("--set", st.sets, "override a config key (KEY=VALUE, repeatable)");
  auto* seed_opt = app.add_option("--seed", st.seed, "global seed");
  auto* workers_opt =
      app.add_option("--workers", st.workers, "worker threads (1 = deterministic)");

  std::string task_override, model_override, embed_role = "friendship";
  std::string mimic_node, rfe_dataset;
  double threshold_override = 0.5;
  bool mimic_naive = false;
  int rfe_step = 0, rfe_folds = 5;

  app.add_subcommand("synth", "generate the synthetic benchmark graphs");
  auto* sc_embed =
      app.add_subcommand("train-embed", "train embeddings for one graph role");
  sc_embed->add_option("--role", embed_role,
                       "friendship | purchases | attributes")
      ->capture_default_str();
  auto* sc_fuse = app.add_subcommand("fuse", "build the fused feature dataset");
  sc_fuse->add_option("--task", task_override,
                      "buying | credit | credit-friends-only");
  app.add_subcommand("mimic-train", "fit the neighbor-regression embedding model");
  auto* sc_infer =
      app.add_subcommand("mimic-infer", "synthesize one node's embedding");
  sc_infer->add_option("--node", mimic_node, "node label")->required();
  sc_infer->add_flag("--naive", mimic_naive, "neighbor mean instead of the model");
  auto* sc_classify = app.add_subcommand("classify", "split, train, and predict");
  sc_classify->add_option("--model", model_override, "logreg | knn | mlp");
  auto* sc_eval = app.add_subcommand("evaluate", "score persisted predictions");
  auto* thr_opt = sc_eval->add_option("--threshold", threshold_override,
                                      "decision threshold in [0,1]");
  auto* sc_rfe = app.add_subcommand("rfe", "recursive feature elimination report");
  sc_rfe->add_option("--dataset", rfe_dataset, "dataset path (default: out-dir's)");
  sc_rfe->add_option("--step", rfe_step, "columns dropped per round (0 = F/20)");
  sc_rfe->add_option("--folds", rfe_folds, "cross-validation folds")
      ->capture_default_str();
  auto* sc_e2e = app.add_subcommand("e2e", "full pipeline: synth through report");
  sc_e2e->add_option("--task", task_override,
                     "buying | credit | credit-friends-only");

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  st.seed_given = seed_opt->count() > 0;
  st.workers_given = workers_opt->count() > 0;

  try {
    return dispatch(app, st, task_override, model_override, threshold_override,
                    thr_opt->count() > 0, embed_role, mimic_node, mimic_naive,
                    rfe_dataset, rfe_step, rfe_folds);
  } catch (const mge::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const mge::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
