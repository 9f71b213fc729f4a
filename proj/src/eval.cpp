#include "mge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "mge/common.hpp"

namespace mge {

namespace {

ClassMetrics class_metrics(size_t tp, size_t fp, size_t fn, size_t support) {
  ClassMetrics m;
  m.support = support;
  if (tp + fp == 0) {
    m.precision_defined = false;
  } else {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    m.recall_defined = false;
  } else {
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1 = 0.0;
    m.f1_defined = m.precision_defined || m.recall_defined;
  }
  return m;
}

}  // namespace

MetricsReport classification_report(std::span<const int> y_true,
                                    std::span<const int> y_pred) {
  if (y_true.empty()) throw ValidationError("report: empty input");
  if (y_true.size() != y_pred.size())
    throw ValidationError("report: length mismatch");
  MetricsReport r;
  for (size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1))
      throw ValidationError("report: labels must be 0 or 1");
    if (t == 1) {
      if (p == 1) ++r.tp; else ++r.fn;
    } else {
      if (p == 1) ++r.fp; else ++r.tn;
    }
  }
  const size_t n = r.total();
  // Class 0 metrics come from the same confusion matrix with roles swapped.
  r.cls1 = class_metrics(r.tp, r.fp, r.fn, r.tp + r.fn);
  r.cls0 = class_metrics(r.tn, r.fn, r.fp, r.tn + r.fp);
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(n);
  r.macro_precision = 0.5 * (r.cls0.precision + r.cls1.precision);
  r.macro_recall = 0.5 * (r.cls0.recall + r.cls1.recall);
  r.macro_f1 = 0.5 * (r.cls0.f1 + r.cls1.f1);
  const double w0 = static_cast<double>(r.cls0.support) / static_cast<double>(n);
  const double w1 = static_cast<double>(r.cls1.support) / static_cast<double>(n);
  r.weighted_precision = w0 * r.cls0.precision + w1 * r.cls1.precision;
  r.weighted_recall = w0 * r.cls0.recall + w1 * r.cls1.recall;
  r.weighted_f1 = w0 * r.cls0.f1 + w1 * r.cls1.f1;
  return r;
}

RocResult roc_auc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.empty()) throw ValidationError("roc: empty input");
  if (y_true.size() != scores.size()) throw ValidationError("roc: length mismatch");
  size_t pos = 0, neg = 0;
  for (int t : y_true) {
    if (t != 0 && t != 1) throw ValidationError("roc: labels must be 0 or 1");
    (t == 1 ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0)
    throw ValidationError("roc: both classes must be present");
  for (double s : scores)
    if (!std::isfinite(s)) throw ValidationError("roc: non-finite score");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  RocResult res;
  res.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  size_t tp = 0, fp = 0;
  double auc2 = 0.0;  // accumulated as twice the trapezoid area, unscaled
  size_t prev_tp = 0, prev_fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    // Consume the whole tie group before emitting one ROC step.
    while (i < order.size() && scores[order[i]] == s) {
      (y_true[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    res.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos), s});
    auc2 += static_cast<double>(fp - prev_fp) * static_cast<double>(tp + prev_tp);
    prev_tp = tp;
    prev_fp = fp;
  }
  res.auc = auc2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return res;
}

MetricsReport evaluate_predictions(const PredictionSet& p, double threshold) {
  if (p.scores.empty()) throw ValidationError("evaluate: empty prediction set");
  std::vector<int> y_pred(p.scores.size());
  for (size_t i = 0; i < p.scores.size(); ++i)
    y_pred[i] = threshold_apply(p.scores[i], threshold);
  MetricsReport r = classification_report(p.y_true, y_pred);
  bool has0 = false, has1 = false;
  for (int t : p.y_true) (t == 1 ? has1 : has0) = true;
  if (has0 && has1) {
    RocResult roc = roc_auc(p.y_true, p.scores);
    r.has_auc = true;
    r.auc = roc.auc;
    r.roc = std::move(roc.points);
  }
  return r;
}

std::vector<LearningCurvePoint> learning_curve(const ClassifierConfig& cfg,
                                               const FeatureDataset& ds,
                                               std::span<const double> fractions,
                                               int folds, uint64_t seed) {
  if (fractions.empty()) throw ValidationError("learning_curve: no fractions");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0))
      throw ValidationError("learning_curve: fractions must lie in (0,1]");
  ds.validate();
  const std::vector<int> fold_of = stratified_folds(ds.labels, folds, mix64(seed, 0xEC1));

  // Pre-split fold train/test row sets, each train side bucketed per class.
  std::vector<std::vector<size_t>> test_rows(folds);
  std::vector<std::vector<size_t>> train0(folds), train1(folds);
  for (size_t i = 0; i < ds.rows; ++i) {
    const int f = fold_of[i];
    test_rows[f].push_back(i);
    for (int other = 0; other < folds; ++other)
      if (other != f) (ds.labels[i] == 1 ? train1 : train0)[other].push_back(i);
  }

  auto accuracy_on = [&](const AnyModel& model, const FeatureDataset& data) {
    size_t hits = 0;
    for (size_t i = 0; i < data.rows; ++i)
      if (threshold_apply(predict_score(model, data.row(i)), cfg.threshold) ==
          data.labels[i])
        ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.rows);
  };

  std::vector<LearningCurvePoint> curve;
  for (double frac : fractions) {
    std::vector<double> train_scores, cv_scores;
    for (int f = 0; f < folds; ++f) {
      std::vector<size_t> sub;
      for (auto* bucket : {&train0[f], &train1[f]}) {
        if (bucket->empty()) continue;
        auto take = static_cast<long long>(
            std::llround(frac * static_cast<double>(bucket->size())));
        take = std::clamp<long long>(take, 1, static_cast<long long>(bucket->size()));
        std::vector<size_t> shuffled = *bucket;
        Rng rng(mix64(mix64(seed, 0xEC2), static_cast<uint64_t>(f) * 131 +
                                              static_cast<uint64_t>(frac * 1e6)));
        rng.shuffle(shuffled);
        sub.insert(sub.end(), shuffled.begin(), shuffled.begin() + take);
      }
      std::sort(sub.begin(), sub.end());
      const FeatureDataset train = ds.select_rows(sub);
      bool has0 = false, has1 = false;
      for (int t : train.labels) (t == 1 ? has1 : has0) = true;
      if (!has0 || !has1)
        throw ValidationError("learning_curve: fraction too small to keep both classes");
      const AnyModel model = fit_classifier(train, cfg);
      train_scores.push_back(accuracy_on(model, train));
      cv_scores.push_back(accuracy_on(model, ds.select_rows(test_rows[f])));
    }
    auto mean_sd = [](const std::vector<double>& v) {
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) /
                          static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      var /= static_cast<double>(v.size());
      return std::pair<double, double>(mean, std::sqrt(var));
    };
    LearningCurvePoint pt;
    pt.fraction = frac;
    std::tie(pt.train_mean, pt.train_sd) = mean_sd(train_scores);
    std::tie(pt.cv_mean, pt.cv_sd) = mean_sd(cv_scores);
    curve.push_back(pt);
  }
  return curve;
}

void write_report(const MetricsReport& r, std::ostream& out) {
  out << "tn=" << r.tn << "\nfp=" << r.fp << "\nfn=" << r.fn << "\ntp=" << r.tp << '\n';
  auto cls = [&](const char* name, const ClassMetrics& c) {
    out << name << "_precision=" << format_double(c.precision) << '\n'
        << name << "_recall=" << format_double(c.recall) << '\n'
        << name << "_f1=" << format_double(c.f1) << '\n'
        << name << "_support=" << c.support << '\n';
    if (!c.precision_defined) out << name << "_precision_undefined=1\n";
    if (!c.recall_defined) out << name << "_recall_undefined=1\n";
    if (!c.f1_defined) out << name << "_f1_undefined=1\n";
  };
  cls("class0", r.cls0);
  cls("class1", r.cls1);
  out << "macro_precision=" << format_double(r.macro_precision) << '\n'
      << "macro_recall=" << format_double(r.macro_recall) << '\n'
      << "macro_f1=" << format_double(r.macro_f1) << '\n'
      << "weighted_precision=" << format_double(r.weighted_precision) << '\n'
      << "weighted_recall=" << format_double(r.weighted_recall) << '\n'
      << "weighted_f1=" << format_double(r.weighted_f1) << '\n'
      << "accuracy=" << format_double(r.accuracy) << '\n';
  if (r.has_auc) out << "auc=" << format_double(r.auc) << '\n';
}

std::string report_summary_line(const MetricsReport& r) {
  std::ostringstream ss;
  ss << "n=" << r.total() << " accuracy=" << format_double(r.accuracy)
     << " precision1=" << format_double(r.cls1.precision)
     << " recall1=" << format_double(r.cls1.recall)
     << " f1_1=" << format_double(r.cls1.f1)
     << " weighted_precision=" << format_double(r.weighted_precision)
     << " weighted_recall=" << format_double(r.weighted_recall)
     << " weighted_f1=" << format_double(r.weighted_f1);
  if (r.has_auc) ss << " auc=" << format_double(r.auc);
  return ss.str();
}

std::string render_report_percent(const MetricsReport& r) {
  auto pct = [](double v) {
    return std::to_string(static_cast<long long>(std::llround(v * 100.0)));
  };
  std::ostringstream ss;
  ss << "class      precision(%) recall(%) f1(%) support\n";
  ss << "0          " << pct(r.cls0.precision) << ' ' << pct(r.cls0.recall) << ' '
     << pct(r.cls0.f1) << ' ' << r.cls0.support << '\n';
  ss << "1          " << pct(r.cls1.precision) << ' ' << pct(r.cls1.recall) << ' '
     << pct(r.cls1.f1) << ' ' << r.cls1.support << '\n';
  ss << "macro avg  " << pct(r.macro_precision) << ' ' << pct(r.macro_recall) << ' '
     << pct(r.macro_f1) << ' ' << r.total() << '\n';
  ss << "weighted   " << pct(r.weighted_precision) << ' ' << pct(r.weighted_recall)
     << ' ' << pct(r.weighted_f1) << ' ' << r.total() << '\n';
  ss << "accuracy   " << pct(r.accuracy) << '\n';
  if (r.has_auc) ss << "auc        " << format_double(r.auc) << '\n';
  return ss.str();
}

void write_roc_csv(std::span<const RocPoint> points, std::ostream& out) {
  out << "fpr,tpr,threshold\n";
  for (const auto& p : points)
    out << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
        << format_double(p.threshold) << '\n';
}

void write_report_file(const MetricsReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  write_report(r, out);
}

void write_roc_csv_file(std::span<const RocPoint> points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  write_roc_csv(points, out);
}

}  // namespace mge
