#include "mge/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "mge/common.hpp"

namespace mge {

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

RowSplit stratified_split_rows(std::span<const std::string> entity_ids,
                               std::span<const int> labels,
                               const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ValidationError("split: train_fraction must lie in (0,1)");
  const size_t rows = entity_ids.size();
  if (rows == 0) throw ValidationError("split: empty dataset");
  if (labels.size() != rows)
    throw ValidationError("split: entity/label count mismatch");

  // Group rows by entity id so an entity never straddles the split.
  std::vector<std::vector<size_t>> groups;
  std::vector<int> group_label;
  {
    std::unordered_map<std::string, size_t> by_entity;
    for (size_t i = 0; i < rows; ++i) {
      auto [it, inserted] = by_entity.emplace(entity_ids[i], groups.size());
      if (inserted) {
        groups.emplace_back();
        group_label.push_back(labels[i]);
      } else if (group_label[it->second] != labels[i]) {
        throw ValidationError("split: entity '" + entity_ids[i] +
                              "' carries conflicting labels");
      }
      groups[it->second].push_back(i);
    }
  }

  const size_t g_total = groups.size();
  Rng rng(mix64(spec.seed, 0x5711));
  std::vector<size_t> train_groups, test_groups;

  auto allocate = [&](std::vector<size_t>& bucket) {
    rng.shuffle(bucket);
    const size_t n = bucket.size();
    auto want = static_cast<long long>(
        std::llround(spec.train_fraction * static_cast<double>(n)));
    want = std::clamp<long long>(want, 1, static_cast<long long>(n) - 1);
    for (size_t i = 0; i < n; ++i)
      (i < static_cast<size_t>(want) ? train_groups : test_groups).push_back(bucket[i]);
  };

  if (spec.stratified) {
    std::vector<size_t> class0, class1;
    for (size_t gi = 0; gi < g_total; ++gi)
      (group_label[gi] == 1 ? class1 : class0).push_back(gi);
    for (auto* bucket : {&class0, &class1}) {
      if (bucket->empty()) continue;
      if (bucket->size() < 2)
        throw ValidationError("split: a class has fewer than 2 entities");
      allocate(*bucket);
    }
  } else {
    if (g_total < 2) throw ValidationError("split: need at least 2 entities");
    std::vector<size_t> all(g_total);
    std::iota(all.begin(), all.end(), size_t{0});
    allocate(all);
  }

  RowSplit res;
  for (size_t gi : train_groups)
    res.train_rows.insert(res.train_rows.end(), groups[gi].begin(), groups[gi].end());
  for (size_t gi : test_groups)
    res.test_rows.insert(res.test_rows.end(), groups[gi].begin(), groups[gi].end());
  std::sort(res.train_rows.begin(), res.train_rows.end());
  std::sort(res.test_rows.begin(), res.test_rows.end());
  return res;
}

SplitResult stratified_split(const FeatureDataset& ds, const SplitSpec& spec) {
  ds.validate();
  RowSplit rows = stratified_split_rows(ds.entity_ids, ds.labels, spec);
  SplitResult res;
  res.train_rows = std::move(rows.train_rows);
  res.test_rows = std::move(rows.test_rows);
  res.train = ds.select_rows(res.train_rows);
  res.test = ds.select_rows(res.test_rows);
  return res;
}

// ---------------------------------------------------------------------------
// L1 logistic regression (FISTA with backtracking + adaptive restart)
// ---------------------------------------------------------------------------

namespace {

// Smooth part of the objective: sum_i softplus(z_i) - t_i * z_i, with the
// gradient accumulated over standardized rows. Returns the loss.
double logloss_and_grad(const std::vector<double>& xs, std::span<const int> labels,
                        size_t n, size_t f, const std::vector<double>& w, double b,
                        std::vector<double>& gw, double& gb) {
  std::fill(gw.begin(), gw.end(), 0.0);
  gb = 0.0;
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double* x = xs.data() + i * f;
    double z = b;
    for (size_t j = 0; j < f; ++j) z += w[j] * x[j];
    const double t = labels[i] == 1 ? 1.0 : 0.0;
    loss += std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))) - t * z;
    const double err = sigmoid(z) - t;
    for (size_t j = 0; j < f; ++j) gw[j] += err * x[j];
    gb += err;
  }
  return loss;
}

double logloss_only(const std::vector<double>& xs, std::span<const int> labels,
                    size_t n, size_t f, const std::vector<double>& w, double b) {
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double* x = xs.data() + i * f;
    double z = b;
    for (size_t j = 0; j < f; ++j) z += w[j] * x[j];
    const double t = labels[i] == 1 ? 1.0 : 0.0;
    loss += std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))) - t * z;
  }
  return loss;
}

double l1_norm(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += std::fabs(v);
  return s;
}

double soft_threshold(double v, double thr) {
  if (v > thr) return v - thr;
  if (v < -thr) return v + thr;
  return 0.0;
}

}  // namespace

LogRegModel logreg_train(const FeatureDataset& train, const LogRegConfig& cfg) {
  if (!(cfg.C > 0.0)) throw ValidationError("logreg: C must be positive");
  if (cfg.max_epochs <= 0) throw ValidationError("logreg: max_epochs must be positive");
  if (!(cfg.lr > 0.0)) throw ValidationError("logreg: lr must be positive");
  if (train.rows == 0) throw ValidationError("logreg: empty dataset");
  train.validate();
  bool has0 = false, has1 = false;
  for (int t : train.labels) (t == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw ValidationError("logreg: both classes must be present");

  const size_t n = train.rows, f = train.cols;
  LogRegModel m;
  m.scaler.fit(train);
  std::vector<double> xs(n * f);
  for (size_t i = 0; i < n; ++i) {
    auto r = train.row(i);
    for (size_t j = 0; j < f; ++j)
      xs[i * f + j] = (static_cast<double>(r[j]) - m.scaler.mean[j]) * m.scaler.inv_std[j];
  }

  m.w.assign(f, 0.0);
  m.bias = 0.0;
  const double inv_c = 1.0 / cfg.C;

  std::vector<double> w_prev = m.w, y_w = m.w;
  double b_prev = m.bias, y_b = m.bias;
  double tau = 1.0;
  double eta = cfg.lr;
  std::vector<double> gw(f), w_new(f);
  double objective_prev =
      logloss_only(xs, train.labels, n, f, m.w, m.bias) + inv_c * l1_norm(m.w);

  for (int ep = 0; ep < cfg.max_epochs; ++ep) {
    double gb = 0.0;
    const double loss_y = logloss_and_grad(xs, train.labels, n, f, y_w, y_b, gw, gb);
    if (!std::isfinite(loss_y)) throw NumericalError("logreg: non-finite loss");

    double b_new = 0.0;
    double loss_new = 0.0;
    while (true) {
      for (size_t j = 0; j < f; ++j)
        w_new[j] = soft_threshold(y_w[j] - eta * gw[j], eta * inv_c);
      b_new = y_b - eta * gb;
      loss_new = logloss_only(xs, train.labels, n, f, w_new, b_new);
      // Quadratic majorization check for the smooth part.
      double lin = 0.0, sq = 0.0;
      for (size_t j = 0; j < f; ++j) {
        const double d = w_new[j] - y_w[j];
        lin += gw[j] * d;
        sq += d * d;
      }
      const double db = b_new - y_b;
      lin += gb * db;
      sq += db * db;
      if (loss_new <= loss_y + lin + sq / (2.0 * eta) + 1e-12) break;
      eta *= 0.5;
      if (eta < 1e-18) throw NumericalError("logreg: backtracking collapsed");
    }

    double max_delta = std::fabs(b_new - b_prev);
    for (size_t j = 0; j < f; ++j)
      max_delta = std::max(max_delta, std::fabs(w_new[j] - w_prev[j]));

    const double objective_new = loss_new + inv_c * l1_norm(w_new);
    const double tau_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tau * tau));
    if (objective_new > objective_prev) {
      // Adaptive restart: drop momentum when the objective rises.
      y_w = w_new;
      y_b = b_new;
      tau = 1.0;
    } else {
      const double mom = (tau - 1.0) / tau_next;
      for (size_t j = 0; j < f; ++j)
        y_w[j] = w_new[j] + mom * (w_new[j] - w_prev[j]);
      y_b = b_new + mom * (b_new - b_prev);
      tau = tau_next;
    }
    w_prev = w_new;
    b_prev = b_new;
    objective_prev = std::min(objective_prev, objective_new);
    m.epochs_run = ep + 1;
    eta = std::min(eta * 1.2, cfg.lr);

    if (max_delta < cfg.tol) {
      m.converged = true;
      break;
    }
  }
  m.w = w_prev;
  m.bias = b_prev;
  return m;
}

double logreg_predict_proba(const LogRegModel& m, std::span<const float> x) {
  if (x.size() != m.w.size())
    throw ValidationError("logreg: expected " + std::to_string(m.w.size()) +
                          " features, got " + std::to_string(x.size()));
  double z = m.bias;
  for (size_t j = 0; j < m.w.size(); ++j)
    z += m.w[j] * (static_cast<double>(x[j]) - m.scaler.mean[j]) * m.scaler.inv_std[j];
  return sigmoid(z);
}

int threshold_apply(double p, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("threshold must lie in [0,1]");
  return p >= t ? 1 : 0;
}

// ---------------------------------------------------------------------------
// KNN
// ---------------------------------------------------------------------------

KnnModel knn_fit(const FeatureDataset& train, int k) {
  if (train.rows == 0) throw ValidationError("knn: empty dataset");
  if (k < 1) throw ValidationError("knn: k must be at least 1");
  if (k % 2 == 0) throw ValidationError("knn: k must be odd");
  train.validate();
  KnnModel m;
  m.k = k;
  m.rows = train.rows;
  m.cols = train.cols;
  m.labels = train.labels;
  m.scaler.fit(train);
  m.xs.resize(train.rows * train.cols);
  for (size_t i = 0; i < train.rows; ++i) {
    auto r = train.row(i);
    for (size_t j = 0; j < train.cols; ++j)
      m.xs[i * train.cols + j] =
          (static_cast<double>(r[j]) - m.scaler.mean[j]) * m.scaler.inv_std[j];
  }
  return m;
}

double knn_score(const KnnModel& m, std::span<const float> x) {
  if (x.size() != m.cols)
    throw ValidationError("knn: expected " + std::to_string(m.cols) +
                          " features, got " + std::to_string(x.size()));
  std::vector<double> q(m.cols);
  for (size_t j = 0; j < m.cols; ++j)
    q[j] = (static_cast<double>(x[j]) - m.scaler.mean[j]) * m.scaler.inv_std[j];

  std::vector<double> d2(m.rows);
  for (size_t i = 0; i < m.rows; ++i) {
    const double* row = m.xs.data() + i * m.cols;
    double acc = 0.0;
    for (size_t j = 0; j < m.cols; ++j) {
      const double d = row[j] - q[j];
      acc += d * d;
    }
    d2[i] = acc;
  }
  std::vector<uint32_t> idx(m.rows);
  std::iota(idx.begin(), idx.end(), 0u);
  const size_t k = std::min<size_t>(static_cast<size_t>(m.k), m.rows);
  auto closer = [&](uint32_t a, uint32_t b) {
    if (d2[a] != d2[b]) return d2[a] < d2[b];
    return a < b;  // distance ties go to the lower training row
  };
  if (k < m.rows)
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k) - 1,
                     idx.end(), closer);
  size_t ones = 0;
  for (size_t i = 0; i < k; ++i)
    if (m.labels[idx[i]] == 1) ++ones;
  return static_cast<double>(ones) / static_cast<double>(k);
}

int knn_predict(const KnnModel& m, std::span<const float> x) {
  return knn_score(m, x) > 0.5 ? 1 : 0;
}

int knn_predict(const FeatureDataset& train, std::span<const float> x, int k) {
  return knn_predict(knn_fit(train, k), x);
}

// ---------------------------------------------------------------------------
// MLP
// ---------------------------------------------------------------------------

MlpModel mlp_train(const FeatureDataset& train, const MlpConfig& cfg) {
  if (cfg.hidden < 1) throw ValidationError("mlp: hidden must be at least 1");
  if (!(cfg.lr > 0.0)) throw ValidationError("mlp: lr must be positive");
  if (cfg.max_iter < 0) throw ValidationError("mlp: max_iter must be non-negative");
  if (cfg.batch <= 0) throw ValidationError("mlp: batch must be positive");
  if (train.rows == 0) throw ValidationError("mlp: empty dataset");
  train.validate();
  bool has0 = false, has1 = false;
  for (int t : train.labels) (t == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw ValidationError("mlp: both classes must be present");

  const size_t n = train.rows, f = train.cols;
  MlpModel m;
  m.scaler.fit(train);
  std::vector<std::vector<double>> xs(n);
  std::vector<std::vector<double>> ts(n);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = m.scaler.transform(train.row(i));
    ts[i] = {train.labels[i] == 1 ? 1.0 : 0.0};
  }

  m.net.sizes = {static_cast<int>(f), cfg.hidden, 1};
  m.net.hidden_act = nn::Act::relu;
  m.net.output_act = nn::Act::sigmoid;
  Rng init_rng(mix64(cfg.seed, 0xB1));
  m.net.init(init_rng);

  nn::Gradients grads;
  grads.match(m.net);
  nn::Workspace ws;
  nn::AdamOptimizer opt;
  opt.lr = cfg.lr;

  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  for (int ep = 0; ep < cfg.max_iter; ++ep) {
    Rng ep_rng(mix64(mix64(cfg.seed, 0xB2), static_cast<uint64_t>(ep)));
    ep_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.batch)) {
      const size_t stop = std::min(n, start + static_cast<size_t>(cfg.batch));
      grads.zero();
      for (size_t i = start; i < stop; ++i) {
        const uint32_t s = order[i];
        epoch_loss += nn::backprop(m.net, xs[s], ts[s], nn::LossKind::bce, grads, ws);
      }
      opt.step(m.net, grads, static_cast<int>(stop - start));
    }
    const double mean_loss = epoch_loss / static_cast<double>(n);
    m.loss_trace.push_back(mean_loss);
    if (!std::isfinite(mean_loss)) {
      std::ostringstream msg;
      msg << "mlp: loss diverged at epoch " << ep + 1 << "; trace:";
      for (double v : m.loss_trace) msg << ' ' << format_double(v);
      throw NumericalError(msg.str());
    }
  }
  return m;
}

double mlp_predict_proba(const MlpModel& m, std::span<const float> x) {
  if (static_cast<int>(x.size()) != m.net.input_dim())
    throw ValidationError("mlp: expected " + std::to_string(m.net.input_dim()) +
                          " features, got " + std::to_string(x.size()));
  const std::vector<double> q = m.scaler.transform(x);
  return m.net.predict(q)[0];
}

// ---------------------------------------------------------------------------
// Facade
// ---------------------------------------------------------------------------

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "logreg") return ModelKind::logreg;
  if (name == "knn") return ModelKind::knn;
  if (name == "mlp") return ModelKind::mlp;
  throw ValidationError("unknown model kind '" + name + "'");
}

std::string model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::logreg: return "logreg";
    case ModelKind::knn: return "knn";
    case ModelKind::mlp: return "mlp";
  }
  throw ValidationError("bad model kind");
}

AnyModel fit_classifier(const FeatureDataset& train, const ClassifierConfig& cfg) {
  switch (cfg.kind) {
    case ModelKind::logreg: return logreg_train(train, cfg.logreg);
    case ModelKind::knn: return knn_fit(train, cfg.knn_k);
    case ModelKind::mlp: return mlp_train(train, cfg.mlp);
  }
  throw ValidationError("bad model kind");
}

double predict_score(const AnyModel& m, std::span<const float> x) {
  return std::visit(
      [&](const auto& model) -> double {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, LogRegModel>)
          return logreg_predict_proba(model, x);
        else if constexpr (std::is_same_v<T, KnnModel>)
          return knn_score(model, x);
        else
          return mlp_predict_proba(model, x);
      },
      m);
}

// ---------------------------------------------------------------------------
// Model persistence
// ---------------------------------------------------------------------------

void save_model(const AnyModel& m, std::ostream& out) {
  if (const auto* lr = std::get_if<LogRegModel>(&m)) {
    out << "logreg " << lr->w.size() << '\n';
    out << format_double(lr->bias) << '\n';
    for (size_t j = 0; j < lr->w.size(); ++j)
      out << format_double(lr->w[j]) << (j + 1 < lr->w.size() ? ' ' : '\n');
    if (lr->w.empty()) out << '\n';
    lr->scaler.save(out);
  } else if (const auto* knn = std::get_if<KnnModel>(&m)) {
    out << "knn " << knn->k << ' ' << knn->rows << ' ' << knn->cols << '\n';
    for (size_t i = 0; i < knn->rows; ++i) {
      out << knn->labels[i];
      for (size_t j = 0; j < knn->cols; ++j)
        out << ' ' << format_double(knn->xs[i * knn->cols + j]);
      out << '\n';
    }
    knn->scaler.save(out);
  } else if (const auto* mlp = std::get_if<MlpModel>(&m)) {
    out << "mlp\n";
    nn::save_net(mlp->net, out);
    mlp->scaler.save(out);
  }
}

AnyModel load_model(std::istream& in) {
  std::string kind;
  if (!(in >> kind)) throw ParseError("model: empty stream");
  if (kind == "logreg") {
    LogRegModel m;
    size_t f = 0;
    if (!(in >> f >> m.bias)) throw ParseError("model: bad logreg header");
    m.w.resize(f);
    for (size_t j = 0; j < f; ++j)
      if (!(in >> m.w[j])) throw ParseError("model: bad logreg weights");
    m.scaler = Standardizer::load(in);
    return m;
  }
  if (kind == "knn") {
    KnnModel m;
    if (!(in >> m.k >> m.rows >> m.cols)) throw ParseError("model: bad knn header");
    m.labels.resize(m.rows);
    m.xs.resize(m.rows * m.cols);
    for (size_t i = 0; i < m.rows; ++i) {
      if (!(in >> m.labels[i])) throw ParseError("model: bad knn row");
      for (size_t j = 0; j < m.cols; ++j)
        if (!(in >> m.xs[i * m.cols + j])) throw ParseError("model: bad knn row");
    }
    m.scaler = Standardizer::load(in);
    return m;
  }
  if (kind == "mlp") {
    MlpModel m;
    m.net = nn::load_net(in);
    m.scaler = Standardizer::load(in);
    return m;
  }
  throw ParseError("model: unknown kind '" + kind + "'");
}

void save_model_file(const AnyModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  save_model(m, out);
}

AnyModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return load_model(in);
}

// ---------------------------------------------------------------------------
// Predictions
// ---------------------------------------------------------------------------

PredictionSet predict_dataset(const AnyModel& m, const FeatureDataset& ds) {
  PredictionSet p;
  p.entity_ids = ds.entity_ids;
  p.y_true = ds.labels;
  p.scores.resize(ds.rows);
  for (size_t i = 0; i < ds.rows; ++i) p.scores[i] = predict_score(m, ds.row(i));
  return p;
}

void save_predictions(const PredictionSet& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  for (size_t i = 0; i < p.scores.size(); ++i)
    out << p.entity_ids[i] << '\t' << p.y_true[i] << '\t'
        << format_double(p.scores[i]) << '\n';
}

PredictionSet load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  PredictionSet p;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string id;
    int y = 0;
    double s = 0.0;
    if (!(ss >> id >> y >> s))
      throw ParseError("predictions line " + std::to_string(line_no) + ": expected "
                       "'entity_id true_label score'");
    if (y != 0 && y != 1)
      throw ValidationError("predictions line " + std::to_string(line_no) +
                            ": label must be 0 or 1");
    p.entity_ids.push_back(std::move(id));
    p.y_true.push_back(y);
    p.scores.push_back(s);
  }
  return p;
}

}  // namespace mge
