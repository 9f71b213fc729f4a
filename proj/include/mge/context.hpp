#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mge/graph.hpp"

namespace mge {

// One training group: a root node plus a chunk of its shuffled neighborhood.
struct Group {
  uint32_t root = 0;
  std::vector<uint32_t> members;

  bool operator==(const Group&) const = default;
};

struct GroupCorpus {
  std::vector<Group> groups;
  int chunk_size = 5;    // k
  int permutations = 5;  // n
  uint32_t vocab = 0;
  std::string source_graph_id;
};

// For every non-isolated node, draws `permutations` independent shuffles of
// its neighbor list and splits each into consecutive chunks of `chunk_size`
// (the last chunk may be shorter). Per-node seeds are derived from the master
// seed, so the corpus is identical for any worker count.
GroupCorpus generate_groups(const Graph& g, int chunk_size, int permutations,
                            uint64_t seed, int workers = 1);

// Expands each group into ordered (center, context) pairs: the root and all
// chunk members mutually predict each other, so a group of j members yields
// j*(j+1) pairs.
std::vector<std::pair<uint32_t, uint32_t>> corpus_to_prediction_pairs(
    const GroupCorpus& c);

// Dump format: a '#' header with the parameters, then one group per line as
// "root<TAB>m1 m2 ...".
void save_corpus(const GroupCorpus& c, std::ostream& out);
GroupCorpus load_corpus(std::istream& in);

}  // namespace mge
