#include "mge/mimic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mge/common.hpp"

namespace mge {

namespace {

// Embedded neighbors of v ordered degree-descending, label ascending on ties.
void embedded_neighbors_ordered(uint32_t v, const Graph& g,
                                const EmbeddingIndex& idx,
                                std::vector<uint32_t>& rows_out) {
  std::vector<uint32_t> nbrs;
  rows_out.clear();
  for (uint32_t u : g.neighbors(v)) {
    if (auto row = idx.find(g.label(u))) {
      nbrs.push_back(u);
      rows_out.push_back(*row);
    }
  }
  std::vector<size_t> order(nbrs.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const size_t da = g.degree(nbrs[a]), db = g.degree(nbrs[b]);
    if (da != db) return da > db;
    return g.label(nbrs[a]) < g.label(nbrs[b]);
  });
  std::vector<uint32_t> rows(nbrs.size());
  for (size_t i = 0; i < order.size(); ++i) rows[i] = rows_out[order[i]];
  rows_out = std::move(rows);
}

std::vector<double> mean_of_rows(const EmbeddingSet& e,
                                 std::span<const uint32_t> rows) {
  const auto dim = static_cast<size_t>(e.dim);
  std::vector<double> mean(dim, 0.0);
  for (uint32_t r : rows) {
    const float* vec = e.input_row(r);
    for (size_t d = 0; d < dim; ++d) mean[d] += vec[d];
  }
  for (double& m : mean) m /= static_cast<double>(rows.size());
  return mean;
}

}  // namespace

std::vector<float> naive_mimic(uint32_t v, const Graph& g, const EmbeddingSet& e,
                               const EmbeddingIndex& idx) {
  std::vector<uint32_t> rows;
  for (uint32_t u : g.neighbors(v))
    if (auto row = idx.find(g.label(u))) rows.push_back(*row);
  if (rows.empty())
    throw ColdNodeError("node '" + g.label(v) + "' has no embedded neighbor");
  const std::vector<double> mean = mean_of_rows(e, rows);
  std::vector<float> out(mean.size());
  for (size_t d = 0; d < mean.size(); ++d) out[d] = static_cast<float>(mean[d]);
  return out;
}

std::vector<float> naive_mimic(const std::string& v, const Graph& g,
                               const EmbeddingSet& e) {
  const auto node = g.find(v);
  if (!node) throw ValidationError("unknown node '" + v + "'");
  EmbeddingIndex idx(e);
  return naive_mimic(*node, g, e, idx);
}

std::vector<double> assemble_mimic_input(uint32_t v, const Graph& g,
                                         const EmbeddingSet& e,
                                         const EmbeddingIndex& idx, int slots) {
  if (slots <= 0) throw ValidationError("mimic: slots must be positive");
  std::vector<uint32_t> rows;
  embedded_neighbors_ordered(v, g, idx, rows);
  if (rows.empty())
    throw ColdNodeError("node '" + g.label(v) + "' has no embedded neighbor");

  const size_t dim = e.dim;
  std::vector<double> x(static_cast<size_t>(slots) * dim, 0.0);
  const size_t filled = std::min(rows.size(), static_cast<size_t>(slots));
  for (size_t s = 0; s < filled; ++s) {
    auto vec = e.input_row(rows[s]);
    for (size_t d = 0; d < dim; ++d) x[s * dim + d] = vec[d];
  }
  if (filled < static_cast<size_t>(slots)) {
    const std::vector<double> mean = mean_of_rows(e, rows);
    for (size_t s = filled; s < static_cast<size_t>(slots); ++s)
      std::copy(mean.begin(), mean.end(), x.begin() + s * dim);
  }
  return x;
}

MimicTrainResult mimic_train(const Graph& g, const EmbeddingSet& e,
                             const MimicConfig& cfg) {
  if (e.dim == 0 || e.vocab == 0) throw ValidationError("mimic: empty embedding set");
  if (cfg.slots <= 0) throw ValidationError("mimic: slots must be positive");
  if (cfg.batch <= 0) throw ValidationError("mimic: batch must be positive");
  if (cfg.epochs < 0) throw ValidationError("mimic: epochs must be non-negative");
  if (cfg.lr < 0.0) throw ValidationError("mimic: lr must be non-negative");
  if (cfg.val_fraction < 0.0 || cfg.val_fraction >= 1.0)
    throw ValidationError("mimic: val_fraction must be in [0,1)");

  const EmbeddingIndex idx(e);
  const int dim = static_cast<int>(e.dim);
  const size_t p = static_cast<size_t>(cfg.slots) * static_cast<size_t>(dim);

  // Training pool: nodes that have their own embedding and at least one
  // embedded neighbor.
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;
  std::vector<uint32_t> pool_ids;
  for (uint32_t v = 0; v < g.node_count(); ++v) {
    const auto own = idx.find(g.label(v));
    if (!own) continue;
    bool any = false;
    for (uint32_t u : g.neighbors(v))
      if (idx.find(g.label(u))) { any = true; break; }
    if (!any) continue;
    inputs.push_back(assemble_mimic_input(v, g, e, idx, cfg.slots));
    const float* t = e.input_row(*own);
    targets.emplace_back(t, t + e.dim);
    pool_ids.push_back(v);
  }
  if (inputs.empty())
    throw ValidationError("mimic: no node has both an embedding and an embedded neighbor");

  const size_t n = inputs.size();
  Rng split_rng(mix64(cfg.seed, 0xA1));
  std::vector<uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  split_rng.shuffle(perm);
  const size_t val_count =
      static_cast<size_t>(std::floor(cfg.val_fraction * static_cast<double>(n)));
  std::vector<uint32_t> val_idx(perm.begin(), perm.begin() + val_count);
  std::vector<uint32_t> train_idx(perm.begin() + val_count, perm.end());
  if (train_idx.empty()) throw ValidationError("mimic: validation split left no training nodes");

  MimicTrainResult res;
  res.model.slots = cfg.slots;
  res.model.dim = dim;
  nn::DenseNet& net = res.model.net;
  net.sizes = {static_cast<int>(p)};
  if (cfg.hidden.empty()) {
    net.sizes.push_back(2 * dim);
  } else {
    for (int h : cfg.hidden) {
      if (h <= 0) throw ValidationError("mimic: hidden sizes must be positive");
      net.sizes.push_back(h);
    }
  }
  net.sizes.push_back(dim);
  net.hidden_act = nn::Act::tanh_fn;
  net.output_act = nn::Act::identity;
  Rng init_rng(mix64(cfg.seed, 0xA2));
  net.init(init_rng);

  nn::Gradients grads;
  grads.match(net);
  nn::Workspace ws;
  nn::SgdOptimizer opt;
  opt.lr = cfg.lr;

  std::vector<uint32_t> order = train_idx;
  for (int ep = 0; ep < cfg.epochs; ++ep) {
    Rng ep_rng(mix64(mix64(cfg.seed, 0xA3), static_cast<uint64_t>(ep)));
    ep_rng.shuffle(order);
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch)) {
      const size_t stop =
          std::min(order.size(), start + static_cast<size_t>(cfg.batch));
      grads.zero();
      for (size_t i = start; i < stop; ++i) {
        const uint32_t s = order[i];
        nn::backprop(net, inputs[s], targets[s], nn::LossKind::mse, grads, ws);
      }
      opt.step(net, grads, static_cast<int>(stop - start));
    }
  }

  auto mse_over = [&](std::span<const uint32_t> rows) {
    if (rows.empty()) return 0.0;
    double total = 0.0;
    for (uint32_t s : rows) {
      const std::vector<double> y = net.predict(inputs[s]);
      double se = 0.0;
      for (size_t d = 0; d < y.size(); ++d) {
        const double diff = y[d] - targets[s][d];
        se += diff * diff;
      }
      total += se / static_cast<double>(y.size());
    }
    return total / static_cast<double>(rows.size());
  };
  res.train_mse = mse_over(train_idx);
  res.val_mse = val_idx.empty() ? res.train_mse : mse_over(val_idx);
  res.train_nodes = train_idx.size();
  res.val_nodes = val_idx.size();
  for (uint32_t s : val_idx) res.val_node_ids.push_back(pool_ids[s]);
  std::sort(res.val_node_ids.begin(), res.val_node_ids.end());
  if (!std::isfinite(res.train_mse) || !std::isfinite(res.val_mse))
    throw NumericalError("mimic: training diverged to non-finite loss");
  return res;
}

std::vector<float> mimic_infer(const MimicModel& m, uint32_t v, const Graph& g,
                               const EmbeddingSet& e, const EmbeddingIndex& idx) {
  if (m.dim != static_cast<int>(e.dim))
    throw ValidationError("mimic: model dim " + std::to_string(m.dim) +
                          " does not match embedding dim " + std::to_string(e.dim));
  const std::vector<double> x = assemble_mimic_input(v, g, e, idx, m.slots);
  const std::vector<double> y = m.net.predict(x);
  std::vector<float> out(y.size());
  for (size_t d = 0; d < y.size(); ++d) out[d] = static_cast<float>(y[d]);
  return out;
}

std::vector<float> mimic_infer(const MimicModel& m, const std::string& v,
                               const Graph& g, const EmbeddingSet& e) {
  const auto node = g.find(v);
  if (!node) throw ValidationError("unknown node '" + v + "'");
  EmbeddingIndex idx(e);
  return mimic_infer(m, *node, g, e, idx);
}

void save_mimic_model(const MimicModel& m, std::ostream& out) {
  out << "mimic " << m.slots << ' ' << m.dim << '\n';
  nn::save_net(m.net, out);
}

MimicModel load_mimic_model(std::istream& in) {
  std::string tag;
  MimicModel m;
  if (!(in >> tag >> m.slots >> m.dim) || tag != "mimic")
    throw ParseError("mimic model: bad header");
  m.net = nn::load_net(in);
  if (m.net.sizes.front() != m.slots * m.dim || m.net.sizes.back() != m.dim)
    throw ValidationError("mimic model: layer sizes disagree with slots/dim header");
  return m;
}

void save_mimic_model_file(const MimicModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  save_mimic_model(m, out);
}

MimicModel load_mimic_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return load_mimic_model(in);
}

}  // namespace mge
