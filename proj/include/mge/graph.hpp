#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mge/common.hpp"

namespace mge {

enum class GraphKind { homogeneous, bipartite };

// Immutable undirected graph over dense integer ids. Node ids are assigned in
// first-appearance order while loading; the original string labels are kept
// alongside. Bipartite graphs track which side each node belongs to (side 0 =
// first column of the edge list).
class Graph {
 public:
  Graph() = default;

  GraphKind kind() const { return kind_; }
  uint32_t node_count() const { return static_cast<uint32_t>(labels_.size()); }
  uint64_t edge_count() const { return edge_count_; }
  uint32_t left_size() const { return left_size_; }
  uint32_t right_size() const { return right_size_; }

  // Sorted distinct neighbors. Empty for isolated nodes.
  std::span<const uint32_t> neighbors(uint32_t v) const;
  uint32_t degree(uint32_t v) const {
    return static_cast<uint32_t>(neighbors(v).size());
  }
  bool has_edge(uint32_t u, uint32_t v) const;

  const std::string& label(uint32_t v) const;
  std::optional<uint32_t> find(std::string_view label) const;

  // 0 or 1 for bipartite nodes; homogeneous graphs report side 0 for all.
  int side(uint32_t v) const;

  // All nodes of one bipartite side, in id order.
  std::vector<uint32_t> side_nodes(int side) const;

  friend class GraphBuilder;

 private:
  GraphKind kind_ = GraphKind::homogeneous;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, uint32_t> index_;
  std::vector<uint32_t> offsets_;  // CSR, size V+1
  std::vector<uint32_t> adjacency_;
  std::vector<uint8_t> sides_;
  uint64_t edge_count_ = 0;
  uint32_t left_size_ = 0;
  uint32_t right_size_ = 0;
};

// Accumulates labeled edges and produces a validated Graph. For bipartite
// graphs the two arguments of add_edge are the left- and right-side labels.
class GraphBuilder {
 public:
  explicit GraphBuilder(GraphKind kind) : kind_(kind) {}

  // Registers a node up front so it survives in the graph even with no edges
  // (side 1 = right bipartite partition).
  void add_node(std::string_view label, int side = 0);
  void add_edge(std::string_view a, std::string_view b);
  Graph finish();

 private:
  uint32_t intern(std::string_view label, int side);

  GraphKind kind_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, uint32_t> index_;
  std::vector<uint8_t> sides_;
  std::vector<std::pair<uint32_t, uint32_t>> edges_;
};

// One edge per line, two whitespace-separated labels; lines starting with '#'
// are comments. Duplicate edges collapse; self-loops and same-side bipartite
// edges are rejected with the offending line number.
Graph load_edge_list(std::istream& in, GraphKind kind);
Graph load_edge_list_file(const std::string& path, GraphKind kind);

void save_edge_list(const Graph& g, std::ostream& out);

// One "id<TAB>label" per line.
void save_label_map(const Graph& g, std::ostream& out);
std::vector<std::string> load_label_map(std::istream& in);

struct NegativeSample {
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  bool exhausted = false;  // complement ran out before `count` pairs
};

// Uniform distinct non-edges. Homogeneous pairs come out with u < v;
// bipartite pairs as (left, right). Rejection sampling with a bounded number
// of attempts, falling back to explicit complement enumeration on dense
// graphs.
NegativeSample complement_negative_sample(const Graph& g, size_t count,
                                          Rng& rng);

}  // namespace mge
