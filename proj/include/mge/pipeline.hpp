#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mge/classifiers.hpp"
#include "mge/eval.hpp"
#include "mge/mimic.hpp"
#include "mge/synth.hpp"

namespace mge {

// Resolved configuration for every stage. Serialized as sorted `key=value`
// lines into the run directory's manifest so that later stages can refuse
// artifacts produced under a different configuration.
struct PipelineConfig {
  uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = "run";
  std::string task = "credit";  // buying | credit | credit-friends-only

  SynthConfig synth;

  int dim = 32;
  int chunk_size = 5;
  int permutations = 5;
  int embed_epochs = 5;
  int negatives = 5;
  double initial_lr = 0.025;
  double noise_exponent = 0.75;

  size_t max_pairs_per_class = 4000;

  std::string model = "logreg";
  LogRegConfig logreg;
  int knn_k = 3;
  MlpConfig mlp;
  double threshold = 0.5;
  double train_fraction = 0.8;

  MimicConfig mimic;

  void validate() const;
};

// Flat `key=value` file; '#' starts a comment, blank lines ignored.
std::map<std::string, std::string> parse_kv_file(const std::string& path);

// Applies kv entries over `base`; unknown keys or malformed values throw.
PipelineConfig config_from_kv(const std::map<std::string, std::string>& kv,
                              PipelineConfig base = {});

// Canonical manifest encoding (excludes out_dir; identical configs yield
// identical manifests regardless of where the run lives).
std::map<std::string, std::string> config_to_kv(const PipelineConfig& cfg);

enum class Stage { synth, embed, fuse, mimic, classify, evaluate };

// Compares the stage's upstream configuration groups against an existing
// manifest (mismatch -> error with the offending key), then merges this
// stage's own keys and rewrites the manifest.
void verify_and_update_manifest(const PipelineConfig& cfg, Stage stage);

// Canonical artifact names inside out_dir.
namespace artifact {
inline constexpr const char* manifest = "manifest.txt";
inline constexpr const char* friendship = "friendship.edges";
inline constexpr const char* purchases = "purchases.edges";
inline constexpr const char* attributes = "seller_attributes.edges";
inline constexpr const char* credit = "credit_labels.tsv";
inline constexpr const char* emb_friendship = "emb_friendship.txt";
inline constexpr const char* emb_purchases = "emb_purchases.txt";
inline constexpr const char* emb_attributes = "emb_attributes.txt";
inline constexpr const char* dataset = "dataset.tsv";
inline constexpr const char* model = "model.txt";
inline constexpr const char* predictions = "predictions.tsv";
inline constexpr const char* report = "report.txt";
inline constexpr const char* roc = "roc.csv";
inline constexpr const char* mimic_model = "mimic_model.txt";
}  // namespace artifact

std::string artifact_path(const PipelineConfig& cfg, const char* name);

// Pipeline stages. Each consumes the persisted outputs of its predecessors,
// writes its own artifacts into out_dir, and is independently re-runnable.
void stage_synth(const PipelineConfig& cfg);
// role: friendship | purchases | attributes
void stage_embed(const PipelineConfig& cfg, const std::string& role);
void stage_fuse(const PipelineConfig& cfg);
MimicTrainResult stage_mimic_train(const PipelineConfig& cfg);
void stage_classify(const PipelineConfig& cfg);
MetricsReport stage_evaluate(const PipelineConfig& cfg);

// synth -> embeddings -> fuse -> classify -> evaluate, manifest first.
MetricsReport run_e2e(const PipelineConfig& cfg);

}  // namespace mge
