#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mge/dataset.hpp"
#include "mge/nn.hpp"

namespace mge {

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

struct SplitSpec {
  double train_fraction = 0.8;
  bool stratified = true;
  uint64_t seed = 1;
};

struct SplitResult {
  FeatureDataset train;
  FeatureDataset test;
  std::vector<size_t> train_rows;  // row indices into the source dataset
  std::vector<size_t> test_rows;
};

struct RowSplit {
  std::vector<size_t> train_rows;  // sorted ascending
  std::vector<size_t> test_rows;
};

// Row-index core of the split: needs only entity ids and labels, so callers
// that know the row layout of a future dataset can compute its split before
// the feature matrix exists.
RowSplit stratified_split_rows(std::span<const std::string> entity_ids,
                               std::span<const int> labels,
                               const SplitSpec& spec);

// Partitions by entity id (an entity's rows never straddle the split). With
// stratification, per-class train counts are round(f * N_c) clamped to
// [1, N_c - 1], so both sides keep every class.
SplitResult stratified_split(const FeatureDataset& ds, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// L1-regularized logistic regression
// ---------------------------------------------------------------------------

struct LogRegConfig {
  double C = 1.0;        // objective: (1/C) * ||w||_1 + sum log-loss
  int max_epochs = 500;
  double lr = 1.0;       // initial proximal step size (backtracking shrinks it)
  double tol = 1e-6;     // max |parameter change| convergence threshold
};

struct LogRegModel {
  std::vector<double> w;  // standardized feature space
  double bias = 0.0;
  Standardizer scaler;
  int epochs_run = 0;
  bool converged = false;
};

LogRegModel logreg_train(const FeatureDataset& train, const LogRegConfig& cfg);
double logreg_predict_proba(const LogRegModel& m, std::span<const float> x);

// Class 1 iff p >= t; t must lie in [0,1].
int threshold_apply(double p, double t = 0.5);

// ---------------------------------------------------------------------------
// k-nearest neighbors
// ---------------------------------------------------------------------------

struct KnnModel {
  int k = 3;
  Standardizer scaler;
  std::vector<double> xs;  // standardized training matrix, row-major
  std::vector<int> labels;
  size_t rows = 0;
  size_t cols = 0;
};

KnnModel knn_fit(const FeatureDataset& train, int k = 3);
// Vote fraction for class 1 among the k nearest (Euclidean, distance ties
// broken by lower training-row index).
double knn_score(const KnnModel& m, std::span<const float> x);
int knn_predict(const KnnModel& m, std::span<const float> x);
// Convenience matching the one-shot call shape.
int knn_predict(const FeatureDataset& train, std::span<const float> x, int k = 3);

// ---------------------------------------------------------------------------
// Multi-layer perceptron
// ---------------------------------------------------------------------------

struct MlpConfig {
  int hidden = 100;
  double lr = 0.001;
  int max_iter = 200;
  int batch = 8;
  uint64_t seed = 1;
};

struct MlpModel {
  nn::DenseNet net;  // [F, hidden, 1], ReLU hidden, sigmoid output
  Standardizer scaler;
  std::vector<double> loss_trace;  // mean cross-entropy per epoch
};

MlpModel mlp_train(const FeatureDataset& train, const MlpConfig& cfg);
double mlp_predict_proba(const MlpModel& m, std::span<const float> x);

// ---------------------------------------------------------------------------
// Facade
// ---------------------------------------------------------------------------

enum class ModelKind { logreg, knn, mlp };
ModelKind model_kind_from_name(const std::string& name);
std::string model_kind_name(ModelKind k);

struct ClassifierConfig {
  ModelKind kind = ModelKind::logreg;
  LogRegConfig logreg;
  int knn_k = 3;
  MlpConfig mlp;
  double threshold = 0.5;
};

using AnyModel = std::variant<LogRegModel, KnnModel, MlpModel>;

AnyModel fit_classifier(const FeatureDataset& train, const ClassifierConfig& cfg);
double predict_score(const AnyModel& m, std::span<const float> x);

void save_model(const AnyModel& m, std::ostream& out);
AnyModel load_model(std::istream& in);
void save_model_file(const AnyModel& m, const std::string& path);
AnyModel load_model_file(const std::string& path);

// ---------------------------------------------------------------------------
// Predictions
// ---------------------------------------------------------------------------

struct PredictionSet {
  std::vector<std::string> entity_ids;
  std::vector<int> y_true;
  std::vector<double> scores;
};

PredictionSet predict_dataset(const AnyModel& m, const FeatureDataset& ds);
void save_predictions(const PredictionSet& p, const std::string& path);
PredictionSet load_predictions(const std::string& path);

}  // namespace mge
