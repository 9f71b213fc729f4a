#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mge/dataset.hpp"
#include "mge/skipgram.hpp"

namespace mge {

// Label -> row lookup over one embedding set.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;
  explicit EmbeddingIndex(const EmbeddingSet& e) {
    index_.reserve(e.vocab);
    for (uint32_t v = 0; v < e.vocab; ++v) index_.emplace(e.labels[v], v);
  }

  std::optional<uint32_t> find(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::unordered_map<std::string, uint32_t> index_;
};

// One embedding source participating in fusion. `fill_missing`, when set, is
// consulted for entities the table does not cover (embedding synthesis for
// cold nodes); it writes dim floats and returns true on success.
struct FuseSource {
  std::string name;
  const EmbeddingSet* embeddings = nullptr;
  const EmbeddingIndex* index = nullptr;
  std::function<bool(const std::string&, std::span<float>)> fill_missing;
};

enum class MissingPolicy { zero_fill, error };

struct FusedVector {
  std::string entity;
  std::vector<float> values;       // sum of source dims
  std::vector<uint8_t> presence;   // per source: 1 = found (or filled)
};

// Concatenates the entity's embedding from each source in declared order.
// Sources that do not know the entity are zero-filled (policy zero_fill) or
// raise; an entity absent from every source is always an error.
FusedVector fuse(const std::string& entity, std::span<const FuseSource> sources,
                 MissingPolicy policy = MissingPolicy::zero_fill);

// L2-regularized hinge-loss linear classifier trained by Pegasos-style
// stochastic subgradient descent on internally standardized features.
// Weights live in the standardized space; predictions rescale inputs.
struct LinearSvmModel {
  std::vector<double> w;
  double bias = 0.0;
  Standardizer scaler;

  double decision(std::span<const float> x) const;
  int predict(std::span<const float> x) const { return decision(x) >= 0.0 ? 1 : 0; }
};

LinearSvmModel linear_svm_fit(const FeatureDataset& ds, double regularization,
                              int epochs, uint64_t seed);

struct RfeCurvePoint {
  size_t feature_count;
  double cv_accuracy;
};

struct RfeResult {
  std::vector<int> selected;        // column indices, ascending
  std::vector<RfeCurvePoint> curve; // from full size down to 1
  bool degenerate = false;          // no usable signal; all columns kept
};

// Recursive feature elimination: repeatedly fits the linear SVM on the
// remaining columns, scores that size with stratified k-fold cross
// validation, and drops the `step` columns with the smallest |w|. Returns the
// subset with the best CV accuracy (ties go to the smaller subset).
RfeResult rfe_select(const FeatureDataset& ds, int step = 0, int folds = 5,
                     uint64_t seed = 0, double regularization = 0.01,
                     int svm_epochs = 50);

}  // namespace mge
