#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mge/context.hpp"

namespace mge {

// Paired input/output embedding tables over one graph's vocabulary. The input
// table is the embedding delivered downstream; the output table exists only
// to score contexts during training. Stored as 32-bit floats, row-major.
struct EmbeddingSet {
  uint32_t vocab = 0;
  int dim = 0;
  std::vector<float> input;
  std::vector<float> output;
  std::vector<std::string> labels;  // size vocab; defaults to decimal ids
  std::string graph_id;

  float* input_row(uint32_t v) { return input.data() + size_t(v) * dim; }
  const float* input_row(uint32_t v) const {
    return input.data() + size_t(v) * dim;
  }
  float* output_row(uint32_t v) { return output.data() + size_t(v) * dim; }
  const float* output_row(uint32_t v) const {
    return output.data() + size_t(v) * dim;
  }
};

struct TrainConfig {
  int dim = 32;
  int epochs = 5;
  float initial_lr = 0.025f;
  int negatives = 5;
  double noise_exponent = 0.75;
  uint64_t seed = 1;
  int workers = 1;
};

// Input rows i.i.d. uniform in [-0.5/dim, +0.5/dim], output rows zero.
EmbeddingSet init_embeddings(uint32_t vocab, int dim, Rng& rng);

// Exact softmax probability of `context` given `center` under the current
// tables. O(|V| * dim); intended for small-vocabulary evaluation.
double softmax_prob(const EmbeddingSet& e, uint32_t center, uint32_t context);

// Mean over groups of the size-normalized sum of log softmax probabilities
// of every ordered in-group pair. Always <= 0.
double corpus_log_likelihood(const EmbeddingSet& e, const GroupCorpus& c);

// Alias-method sampler over context frequencies raised to an exponent.
class NoiseTable {
 public:
  NoiseTable() = default;
  explicit NoiseTable(std::span<const double> weights);

  uint32_t sample(Rng& rng) const;
  size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<uint32_t> alias_;
};

NoiseTable build_noise_table(const GroupCorpus& c, double exponent);

// One gradient-ascent step on log s(in_c . out_ctx) + sum log s(-in_c . out_neg)
// with the negatives given explicitly. All dot products are taken at the
// current point before any row is written, so the applied update is the exact
// simultaneous gradient even when negatives repeat. Returns the positive-pair
// score for divergence monitoring.
double sgns_update(EmbeddingSet& e, uint32_t center, uint32_t context,
                   std::span<const uint32_t> negatives, float lr);

// Draws `negatives` noise nodes (resampling collisions with the context) and
// applies sgns_update.
double negative_sampling_step(EmbeddingSet& e, uint32_t center,
                              uint32_t context, const NoiseTable& noise,
                              int negatives, float lr, Rng& rng);

// Full training loop: epochs over shuffled prediction pairs with linearly
// decaying learning rate (down to 1% of the initial rate). workers=1 is
// bit-reproducible for a fixed seed; more workers run lock-free on shards of
// the shuffled pair list and tolerate lost updates.
EmbeddingSet train(const GroupCorpus& c, const TrainConfig& cfg);

// Text format: "|V| D" header, then one "label v1 ... vD" line per node with
// decimal floats that round-trip to binary32. Only the input table is stored.
void save_embeddings(const EmbeddingSet& e, std::ostream& out);
EmbeddingSet load_embeddings(std::istream& in);
void save_embeddings_file(const EmbeddingSet& e, const std::string& path);
EmbeddingSet load_embeddings_file(const std::string& path);

}  // namespace mge
