#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mge/classifiers.hpp"
#include "mge/dataset.hpp"

namespace mge {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;
  // Undefined ratios (0/0) are reported as 0 with the flag cleared.
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct MetricsReport {
  size_t tn = 0, fp = 0, fn = 0, tp = 0;
  ClassMetrics cls0, cls1;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
  double accuracy = 0.0;
  bool has_auc = false;
  double auc = 0.0;
  std::vector<RocPoint> roc;

  size_t total() const { return tn + fp + fn + tp; }
};

// Threshold metrics from hard predictions.
MetricsReport classification_report(std::span<const int> y_true,
                                    std::span<const int> y_pred);

struct RocResult {
  double auc = 0.0;
  std::vector<RocPoint> points;  // starts (0,0), ends (1,1)
};

// Threshold sweep over descending unique scores (ties collapse into one
// step); AUC by the trapezoidal rule, equal to the Mann-Whitney ranking
// probability with ties counted one half.
RocResult roc_auc(std::span<const int> y_true, std::span<const double> scores);

// Full report for scored predictions: thresholded confusion metrics plus
// ROC/AUC.
MetricsReport evaluate_predictions(const PredictionSet& p, double threshold = 0.5);

struct LearningCurvePoint {
  double fraction = 0.0;
  double train_mean = 0.0, train_sd = 0.0;
  double cv_mean = 0.0, cv_sd = 0.0;
};

// For each fraction: per CV fold, trains on a stratified subsample of the
// fold's training side and reports accuracy on that subsample (train) and on
// the held-out fold (cv), aggregated as mean +- sd.
std::vector<LearningCurvePoint> learning_curve(const ClassifierConfig& cfg,
                                               const FeatureDataset& ds,
                                               std::span<const double> fractions,
                                               int folds = 5, uint64_t seed = 1);

// One `name=value` pair per line, full precision.
void write_report(const MetricsReport& r, std::ostream& out);
// Single machine-readable line: space-separated name=value pairs.
std::string report_summary_line(const MetricsReport& r);
// Table mirroring integer-percent rendering; for human consumption only.
std::string render_report_percent(const MetricsReport& r);
// CSV rows `fpr,tpr,threshold` with a header line.
void write_roc_csv(std::span<const RocPoint> points, std::ostream& out);

void write_report_file(const MetricsReport& r, const std::string& path);
void write_roc_csv_file(std::span<const RocPoint> points, const std::string& path);

}  // namespace mge
