#include "mge/skipgram.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace mge {

EmbeddingSet init_embeddings(uint32_t vocab, int dim, Rng& rng) {
  if (vocab < 1) throw DomainError("vocab must be >= 1");
  if (dim < 1) throw DomainError("dim must be >= 1");
  EmbeddingSet e;
  e.vocab = vocab;
  e.dim = dim;
  const float bound = 0.5f / static_cast<float>(dim);
  e.input.resize(size_t(vocab) * dim);
  for (auto& x : e.input) x = rng.uniform_float(-bound, bound);
  e.output.assign(size_t(vocab) * dim, 0.0f);
  e.labels.resize(vocab);
  for (uint32_t v = 0; v < vocab; ++v) e.labels[v] = std::to_string(v);
  return e;
}

namespace {

double dot(const float* a, const float* b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += double(a[d]) * double(b[d]);
  return s;
}

// log(sum exp(scores)) and per-node scores for one center row.
void center_scores(const EmbeddingSet& e, uint32_t center,
                   std::vector<double>& scores, double& lse) {
  scores.resize(e.vocab);
  const float* cen = e.input_row(center);
  double mx = -HUGE_VAL;
  for (uint32_t v = 0; v < e.vocab; ++v) {
    scores[v] = dot(cen, e.output_row(v), e.dim);
    mx = std::max(mx, scores[v]);
  }
  double sum = 0.0;
  for (uint32_t v = 0; v < e.vocab; ++v) sum += std::exp(scores[v] - mx);
  lse = mx + std::log(sum);
}

}  // namespace

double softmax_prob(const EmbeddingSet& e, uint32_t center, uint32_t context) {
  if (center >= e.vocab || context >= e.vocab) {
    throw DomainError("node id out of range in softmax_prob");
  }
  std::vector<double> scores;
  double lse;
  center_scores(e, center, scores, lse);
  return std::exp(scores[context] - lse);
}

double corpus_log_likelihood(const EmbeddingSet& e, const GroupCorpus& c) {
  if (c.groups.empty()) return 0.0;
  double total = 0.0;
  std::vector<uint32_t> nodes;
  std::vector<double> scores;
  for (const auto& grp : c.groups) {
    nodes.clear();
    nodes.push_back(grp.root);
    nodes.insert(nodes.end(), grp.members.begin(), grp.members.end());
    double group_ll = 0.0;
    for (uint32_t center : nodes) {
      double lse;
      center_scores(e, center, scores, lse);
      for (uint32_t ctx : nodes) {
        if (ctx != center) group_ll += scores[ctx] - lse;
      }
    }
    total += group_ll / static_cast<double>(nodes.size());
  }
  return total / static_cast<double>(c.groups.size());
}

NoiseTable::NoiseTable(std::span<const double> weights) {
  const size_t n = weights.size();
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DomainError("noise weights must be non-negative");
    sum += w;
  }
  if (n == 0 || sum <= 0.0) {
    throw ValidationError("noise table needs at least one positive weight");
  }
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  for (size_t i = 0; i < n; ++i) scaled[i] = weights[i] * double(n) / sum;
  std::vector<uint32_t> small, large;
  for (size_t i = 0; i < n; ++i) {
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const uint32_t s = small.back();
    small.pop_back();
    const uint32_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (uint32_t i : large) prob_[i] = 1.0;
  for (uint32_t i : small) prob_[i] = 1.0;
}

uint32_t NoiseTable::sample(Rng& rng) const {
  const uint32_t i = rng.uniform_u32(static_cast<uint32_t>(prob_.size()));
  return rng.uniform() < prob_[i] ? i : alias_[i];
}

NoiseTable build_noise_table(const GroupCorpus& c, double exponent) {
  if (c.groups.empty()) throw ValidationError("cannot build noise table from an empty corpus");
  std::vector<double> counts(c.vocab, 0.0);
  for (const auto& grp : c.groups) {
    // Within a group of m nodes, each node serves as context for the other
    // m-1 nodes.
    const double uses = static_cast<double>(grp.members.size());
    counts[grp.root] += uses;
    for (uint32_t m : grp.members) counts[m] += uses;
  }
  std::vector<double> weights(c.vocab, 0.0);
  for (uint32_t v = 0; v < c.vocab; ++v) {
    if (counts[v] > 0.0) weights[v] = std::pow(counts[v], exponent);
  }
  return NoiseTable(weights);
}

double sgns_update(EmbeddingSet& e, uint32_t center, uint32_t context,
                   std::span<const uint32_t> negatives, float lr) {
  const int dim = e.dim;
  float* cen = e.input_row(center);
  float* ctx = e.output_row(context);

  // Score everything at the current point first.
  const double pos_dot = dot(cen, ctx, dim);
  const float g_pos = static_cast<float>((1.0 - sigmoid(pos_dot)) * lr);

  thread_local std::vector<float> g_neg;
  thread_local std::vector<float> cen_acc;
  g_neg.resize(negatives.size());
  for (size_t i = 0; i < negatives.size(); ++i) {
    const double neg_dot = dot(cen, e.output_row(negatives[i]), dim);
    g_neg[i] = static_cast<float>(-sigmoid(neg_dot) * lr);
  }

  cen_acc.assign(dim, 0.0f);
  for (int d = 0; d < dim; ++d) cen_acc[d] += g_pos * ctx[d];
  for (size_t i = 0; i < negatives.size(); ++i) {
    const float* neg = e.output_row(negatives[i]);
    for (int d = 0; d < dim; ++d) cen_acc[d] += g_neg[i] * neg[d];
  }

  for (int d = 0; d < dim; ++d) ctx[d] += g_pos * cen[d];
  for (size_t i = 0; i < negatives.size(); ++i) {
    float* neg = e.output_row(negatives[i]);
    for (int d = 0; d < dim; ++d) neg[d] += g_neg[i] * cen[d];
  }
  for (int d = 0; d < dim; ++d) cen[d] += cen_acc[d];
  return pos_dot;
}

double negative_sampling_step(EmbeddingSet& e, uint32_t center,
                              uint32_t context, const NoiseTable& noise,
                              int negatives, float lr, Rng& rng) {
  thread_local std::vector<uint32_t> negs;
  negs.clear();
  for (int i = 0; i < negatives; ++i) {
    uint32_t v = context;
    for (int attempt = 0; attempt < 100 && v == context; ++attempt) {
      v = noise.sample(rng);
    }
    if (v != context) negs.push_back(v);
  }
  return sgns_update(e, center, context, negs, lr);
}

namespace {

void check_tables_finite(const EmbeddingSet& e, int epoch) {
  for (float x : e.input) {
    if (!std::isfinite(x)) {
      throw NumericalError("non-finite input embedding after epoch " +
                           std::to_string(epoch));
    }
  }
  for (float x : e.output) {
    if (!std::isfinite(x)) {
      throw NumericalError("non-finite output embedding after epoch " +
                           std::to_string(epoch));
    }
  }
}

}  // namespace

EmbeddingSet train(const GroupCorpus& c, const TrainConfig& cfg) {
  if (c.vocab == 0) throw ValidationError("corpus has no vocabulary");
  Rng init_rng(mix64(cfg.seed, 1));
  EmbeddingSet e = init_embeddings(c.vocab, cfg.dim, init_rng);
  if (cfg.epochs <= 0 || c.groups.empty()) return e;

  auto pairs = corpus_to_prediction_pairs(c);
  if (pairs.empty()) return e;
  const NoiseTable noise = build_noise_table(c, cfg.noise_exponent);

  const double total_steps =
      static_cast<double>(cfg.epochs) * static_cast<double>(pairs.size());
  const float min_lr = cfg.initial_lr * 0.01f;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(mix64(mix64(cfg.seed, 2), epoch));
    shuffle_rng.shuffle(pairs);

    if (cfg.workers <= 1) {
      Rng rng(mix64(mix64(cfg.seed, 3), epoch));
      const size_t base = size_t(epoch) * pairs.size();
      for (size_t i = 0; i < pairs.size(); ++i) {
        const double progress = static_cast<double>(base + i) / total_steps;
        const float lr = std::max(
            min_lr, cfg.initial_lr * static_cast<float>(1.0 - progress));
        const double score =
            negative_sampling_step(e, pairs[i].first, pairs[i].second, noise,
                                   cfg.negatives, lr, rng);
        if (!std::isfinite(score)) {
          throw NumericalError("non-finite score at epoch " +
                               std::to_string(epoch) + ", pair " +
                               std::to_string(i));
        }
      }
    } else {
      std::atomic<uint64_t> done{size_t(epoch) * pairs.size()};
      std::vector<std::thread> threads;
      const size_t shard =
          (pairs.size() + cfg.workers - 1) / size_t(cfg.workers);
      for (int w = 0; w < cfg.workers; ++w) {
        threads.emplace_back([&, w] {
          Rng rng(mix64(mix64(cfg.seed, 4),
                        uint64_t(epoch) * cfg.workers + w));
          const size_t lo = size_t(w) * shard;
          const size_t hi = std::min(pairs.size(), lo + shard);
          float lr = cfg.initial_lr;
          for (size_t i = lo; i < hi; ++i) {
            if ((i - lo) % 512 == 0) {
              const double progress =
                  static_cast<double>(done.load(std::memory_order_relaxed)) /
                  total_steps;
              lr = std::max(min_lr, cfg.initial_lr *
                                        static_cast<float>(1.0 - progress));
            }
            negative_sampling_step(e, pairs[i].first, pairs[i].second, noise,
                                   cfg.negatives, lr, rng);
            done.fetch_add(1, std::memory_order_relaxed);
          }
        });
      }
      for (auto& t : threads) t.join();
    }
    check_tables_finite(e, epoch);
  }
  return e;
}

void save_embeddings(const EmbeddingSet& e, std::ostream& out) {
  out << e.vocab << ' ' << e.dim << '\n';
  for (uint32_t v = 0; v < e.vocab; ++v) {
    out << e.labels[v];
    const float* row = e.input_row(v);
    for (int d = 0; d < e.dim; ++d) out << ' ' << format_float(row[d]);
    out << '\n';
  }
}

EmbeddingSet load_embeddings(std::istream& in) {
  EmbeddingSet e;
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("embedding file is empty (expected '|V| D' header)");
  }
  {
    std::istringstream hs(line);
    if (!(hs >> e.vocab >> e.dim) || e.dim < 1) {
      throw ParseError("embedding header must be '|V| D', got '" + line + "'");
    }
  }
  e.input.resize(size_t(e.vocab) * e.dim);
  e.output.assign(size_t(e.vocab) * e.dim, 0.0f);
  e.labels.resize(e.vocab);
  for (uint32_t v = 0; v < e.vocab; ++v) {
    if (!std::getline(in, line)) {
      throw ParseError("embedding file truncated at row " + std::to_string(v));
    }
    std::istringstream ls(line);
    if (!(ls >> e.labels[v])) {
      throw ParseError("embedding row " + std::to_string(v) + " is empty");
    }
    float* row = e.input_row(v);
    for (int d = 0; d < e.dim; ++d) {
      std::string tok;
      if (!(ls >> tok)) {
        throw ParseError("embedding row " + std::to_string(v) +
                         " has fewer than " + std::to_string(e.dim) +
                         " values");
      }
      row[d] = std::strtof(tok.c_str(), nullptr);
    }
  }
  return e;
}

void save_embeddings_file(const EmbeddingSet& e, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write embedding file '" + path + "'");
  save_embeddings(e, out);
}

EmbeddingSet load_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open embedding file '" + path +
                          "' (expected '|V| D' header then label+floats rows)");
  }
  return load_embeddings(in);
}

}  // namespace mge
