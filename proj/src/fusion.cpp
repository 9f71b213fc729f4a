#include "mge/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "mge/common.hpp"

namespace mge {

FusedVector fuse(const std::string& entity, std::span<const FuseSource> sources,
                 MissingPolicy policy) {
  if (sources.empty()) throw ValidationError("fuse: no sources given");
  FusedVector out;
  out.entity = entity;
  size_t total = 0;
  for (const auto& s : sources) {
    if (s.embeddings == nullptr || s.index == nullptr)
      throw ValidationError("fuse: source '" + s.name + "' not bound");
    total += s.embeddings->dim;
  }
  out.values.assign(total, 0.0f);
  out.presence.assign(sources.size(), 0);

  size_t offset = 0;
  size_t hits = 0;
  for (size_t si = 0; si < sources.size(); ++si) {
    const auto& s = sources[si];
    const size_t dim = s.embeddings->dim;
    std::span<float> dst(out.values.data() + offset, dim);
    if (auto row = s.index->find(entity)) {
      const float* src = s.embeddings->input_row(*row);
      std::copy(src, src + dim, dst.begin());
      out.presence[si] = 1;
      ++hits;
    } else if (s.fill_missing && s.fill_missing(entity, dst)) {
      out.presence[si] = 1;
      ++hits;
    } else if (policy == MissingPolicy::error) {
      throw ValidationError("fuse: entity '" + entity + "' missing from source '" +
                            s.name + "'");
    }
    offset += dim;
  }
  if (hits == 0)
    throw ValidationError("fuse: entity '" + entity + "' unknown to every source");
  return out;
}

double LinearSvmModel::decision(std::span<const float> x) const {
  if (x.size() != w.size())
    throw ValidationError("svm: expected " + std::to_string(w.size()) +
                          " features, got " + std::to_string(x.size()));
  double acc = bias;
  for (size_t j = 0; j < w.size(); ++j)
    acc += w[j] * (static_cast<double>(x[j]) - scaler.mean[j]) * scaler.inv_std[j];
  return acc;
}

LinearSvmModel linear_svm_fit(const FeatureDataset& ds, double regularization,
                              int epochs, uint64_t seed) {
  if (ds.rows == 0) throw ValidationError("svm: empty dataset");
  if (!(regularization > 0.0))
    throw ValidationError("svm: regularization must be positive");
  if (epochs <= 0) throw ValidationError("svm: epochs must be positive");
  ds.validate();

  const size_t n = ds.rows;
  const size_t f = ds.cols;
  LinearSvmModel m;
  m.scaler.fit(ds);
  m.w.assign(f, 0.0);
  m.bias = 0.0;

  // Standardize once up front; the pass count makes repeated rescaling the
  // dominant cost otherwise.
  std::vector<double> xs(n * f);
  for (size_t i = 0; i < n; ++i) {
    auto r = ds.row(i);
    for (size_t j = 0; j < f; ++j)
      xs[i * f + j] = (static_cast<double>(r[j]) - m.scaler.mean[j]) * m.scaler.inv_std[j];
  }

  Rng rng(mix64(seed, 0x5f3759df));
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);

  const double lambda = regularization;
  // Suffix averaging over the last half of the run gives a stabler final
  // iterate than the raw endpoint.
  std::vector<double> w_sum(f, 0.0);
  double b_sum = 0.0;
  size_t avg_count = 0;
  const long long total_steps = static_cast<long long>(epochs) * static_cast<long long>(n);
  const long long avg_start = total_steps / 2;

  long long t = 0;
  for (int ep = 0; ep < epochs; ++ep) {
    rng.shuffle(order);
    for (size_t k = 0; k < n; ++k) {
      ++t;
      const uint32_t i = order[k];
      const double y = ds.labels[i] == 1 ? 1.0 : -1.0;
      const double* x = xs.data() + static_cast<size_t>(i) * f;
      double margin = m.bias;
      for (size_t j = 0; j < f; ++j) margin += m.w[j] * x[j];
      margin *= y;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double shrink = 1.0 - eta * lambda;
      for (size_t j = 0; j < f; ++j) m.w[j] *= shrink;
      if (margin < 1.0) {
        for (size_t j = 0; j < f; ++j) m.w[j] += eta * y * x[j];
        m.bias += eta * y;  // bias stays unregularized
      }
      if (t > avg_start) {
        for (size_t j = 0; j < f; ++j) w_sum[j] += m.w[j];
        b_sum += m.bias;
        ++avg_count;
      }
    }
  }
  if (avg_count > 0) {
    for (size_t j = 0; j < f; ++j) m.w[j] = w_sum[j] / static_cast<double>(avg_count);
    m.bias = b_sum / static_cast<double>(avg_count);
  }
  for (double v : m.w)
    if (!std::isfinite(v)) throw NumericalError("svm: non-finite weight after training");
  if (!std::isfinite(m.bias)) throw NumericalError("svm: non-finite bias after training");
  return m;
}

namespace {

// Accuracy of the SVM over one stratified CV split of `ds` restricted to
// `cols`.
double cv_accuracy(const FeatureDataset& ds, const std::vector<int>& cols,
                   int folds, uint64_t seed, double regularization, int epochs) {
  const auto assignment = stratified_folds(ds.labels, folds, mix64(seed, 0xcf01));
  const FeatureDataset view = ds.select_cols(cols);
  size_t correct = 0, total = 0;
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<size_t> train_rows, test_rows;
    for (size_t i = 0; i < view.rows; ++i)
      (assignment[i] == fold ? test_rows : train_rows).push_back(i);
    if (train_rows.empty() || test_rows.empty()) continue;
    const FeatureDataset train = view.select_rows(train_rows);
    bool single_class = true;
    for (size_t i = 1; i < train.rows; ++i)
      if (train.labels[i] != train.labels[0]) { single_class = false; break; }
    if (single_class) {
      // Constant predictor: majority (= only) training class.
      for (size_t i : test_rows)
        if (view.labels[i] == train.labels[0]) ++correct;
      total += test_rows.size();
      continue;
    }
    const LinearSvmModel model =
        linear_svm_fit(train, regularization, epochs, mix64(seed, 0xcf02 + fold));
    for (size_t i : test_rows) {
      if (model.predict(view.row(i)) == view.labels[i]) ++correct;
      ++total;
    }
  }
  if (total == 0) throw ValidationError("rfe: cross validation produced no test rows");
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

RfeResult rfe_select(const FeatureDataset& ds, int step, int folds, uint64_t seed,
                     double regularization, int svm_epochs) {
  ds.validate();
  if (ds.cols == 0) throw ValidationError("rfe: dataset has no features");
  if (folds < 2) throw ValidationError("rfe: folds must be at least 2");
  if (ds.rows < static_cast<size_t>(folds))
    throw ValidationError("rfe: fewer rows than folds");

  RfeResult out;
  if (ds.cols == 1) {
    out.selected = {0};
    out.curve.push_back({1, cv_accuracy(ds, {0}, folds, seed, regularization, svm_epochs)});
    return out;
  }

  // A dataset with no varying column cannot be ranked; keep everything and say so.
  bool any_varying = false;
  for (size_t j = 0; j < ds.cols && !any_varying; ++j) {
    const float first = ds.matrix[j];
    for (size_t i = 1; i < ds.rows; ++i)
      if (ds.matrix[i * ds.cols + j] != first) { any_varying = true; break; }
  }
  if (!any_varying) {
    out.degenerate = true;
    out.selected.resize(ds.cols);
    std::iota(out.selected.begin(), out.selected.end(), 0);
    return out;
  }

  if (step <= 0) step = std::max<int>(1, static_cast<int>(ds.cols / 20));

  std::vector<int> remaining(ds.cols);
  std::iota(remaining.begin(), remaining.end(), 0);

  std::vector<int> best_subset;
  double best_score = -1.0;

  while (!remaining.empty()) {
    const double score =
        cv_accuracy(ds, remaining, folds, seed, regularization, svm_epochs);
    out.curve.push_back({remaining.size(), score});
    // Strict '>=' prefers the later (smaller) subset on ties.
    if (score >= best_score) {
      best_score = score;
      best_subset = remaining;
    }
    if (remaining.size() == 1) break;

    const FeatureDataset view = ds.select_cols(remaining);
    const LinearSvmModel model =
        linear_svm_fit(view, regularization, svm_epochs, mix64(seed, 0xfe11));
    // Rank by |w| in the standardized space; drop the weakest `step`.
    std::vector<size_t> rank(remaining.size());
    std::iota(rank.begin(), rank.end(), size_t{0});
    std::sort(rank.begin(), rank.end(), [&](size_t a, size_t b) {
      const double wa = std::fabs(model.w[a]), wb = std::fabs(model.w[b]);
      if (wa != wb) return wa < wb;
      return remaining[a] > remaining[b];  // equal weight: drop later column first
    });
    const size_t drop =
        std::min<size_t>(static_cast<size_t>(step), remaining.size() - 1);
    std::vector<size_t> dropped(rank.begin(), rank.begin() + drop);
    std::sort(dropped.begin(), dropped.end(), std::greater<>());
    for (size_t idx : dropped)
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(idx));
  }

  out.selected = std::move(best_subset);
  std::sort(out.selected.begin(), out.selected.end());
  return out;
}

}  // namespace mge
