#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mge/fusion.hpp"
#include "mge/graph.hpp"
#include "mge/nn.hpp"
#include "mge/skipgram.hpp"

namespace mge {

// Neighbor-mean baseline: arithmetic mean of the input vectors of v's
// embedded neighbors. Throws ColdNodeError when none of them is embedded.
std::vector<float> naive_mimic(const std::string& v, const Graph& g,
                               const EmbeddingSet& e);
std::vector<float> naive_mimic(uint32_t v, const Graph& g, const EmbeddingSet& e,
                               const EmbeddingIndex& idx);

struct MimicConfig {
  int slots = 10;                 // neighbor slots n; input width = n * dim
  std::vector<int> hidden;        // empty = single hidden layer of width 2*dim
  double lr = 1e-3;
  int epochs = 300;
  int batch = 32;
  double val_fraction = 0.1;
  uint64_t seed = 1;
};

// Feedforward regressor F: R^{n*D} -> R^D approximating the node's own
// embedding from its neighborhood. Neighbor slots are filled in fixed order:
// degree descending, ties broken by label; deficits padded with the mean of
// the available neighbor embeddings.
struct MimicModel {
  int slots = 0;
  int dim = 0;
  nn::DenseNet net;
};

struct MimicTrainResult {
  MimicModel model;
  double train_mse = 0.0;
  double val_mse = 0.0;
  size_t train_nodes = 0;
  size_t val_nodes = 0;
  std::vector<uint32_t> val_node_ids;  // held-out graph nodes, ascending
};

MimicTrainResult mimic_train(const Graph& g, const EmbeddingSet& e,
                             const MimicConfig& cfg);

std::vector<float> mimic_infer(const MimicModel& m, const std::string& v,
                               const Graph& g, const EmbeddingSet& e);
std::vector<float> mimic_infer(const MimicModel& m, uint32_t v, const Graph& g,
                               const EmbeddingSet& e, const EmbeddingIndex& idx);

// Slot assembly shared by training and inference; exposed for tests.
// Returns the n*dim input row; throws ColdNodeError without embedded
// neighbors.
std::vector<double> assemble_mimic_input(uint32_t v, const Graph& g,
                                         const EmbeddingSet& e,
                                         const EmbeddingIndex& idx, int slots);

void save_mimic_model(const MimicModel& m, std::ostream& out);
MimicModel load_mimic_model(std::istream& in);
void save_mimic_model_file(const MimicModel& m, const std::string& path);
MimicModel load_mimic_model_file(const std::string& path);

}  // namespace mge
