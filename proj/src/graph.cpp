#include "mge/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace mge {

std::span<const uint32_t> Graph::neighbors(uint32_t v) const {
  if (v >= node_count()) {
    throw DomainError("node id " + std::to_string(v) + " out of range (|V|=" +
                      std::to_string(node_count()) + ")");
  }
  return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

bool Graph::has_edge(uint32_t u, uint32_t v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

const std::string& Graph::label(uint32_t v) const {
  if (v >= node_count()) {
    throw DomainError("node id " + std::to_string(v) + " out of range");
  }
  return labels_[v];
}

std::optional<uint32_t> Graph::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Graph::side(uint32_t v) const {
  if (v >= node_count()) {
    throw DomainError("node id " + std::to_string(v) + " out of range");
  }
  return kind_ == GraphKind::bipartite ? sides_[v] : 0;
}

std::vector<uint32_t> Graph::side_nodes(int side) const {
  std::vector<uint32_t> out;
  for (uint32_t v = 0; v < node_count(); ++v) {
    if (this->side(v) == side) out.push_back(v);
  }
  return out;
}

uint32_t GraphBuilder::intern(std::string_view label, int side) {
  auto it = index_.find(std::string(label));
  if (it != index_.end()) {
    const uint32_t id = it->second;
    if (kind_ == GraphKind::bipartite && sides_[id] != side) {
      throw ValidationError("node '" + std::string(label) +
                            "' appears on both sides of a bipartite graph");
    }
    return id;
  }
  const uint32_t id = static_cast<uint32_t>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(labels_.back(), id);
  sides_.push_back(static_cast<uint8_t>(side));
  return id;
}

void GraphBuilder::add_node(std::string_view label, int side) {
  if (side != 0 && side != 1) throw ValidationError("side must be 0 or 1");
  if (kind_ == GraphKind::homogeneous && side != 0) {
    throw ValidationError("homogeneous graphs have no side-1 nodes");
  }
  intern(label, side);
}

void GraphBuilder::add_edge(std::string_view a, std::string_view b) {
  if (kind_ == GraphKind::homogeneous && a == b) {
    throw ValidationError("self-loop on node '" + std::string(a) + "'");
  }
  if (kind_ == GraphKind::bipartite && a == b) {
    throw ValidationError("node '" + std::string(a) +
                          "' appears on both sides of a bipartite graph");
  }
  const uint32_t ia = intern(a, 0);
  const uint32_t ib = intern(b, kind_ == GraphKind::bipartite ? 1 : 0);
  edges_.emplace_back(ia, ib);
}

Graph GraphBuilder::finish() {
  const uint32_t v_count = static_cast<uint32_t>(labels_.size());

  // Canonical direction, then dedup.
  std::vector<std::pair<uint32_t, uint32_t>> edges;
  edges.reserve(edges_.size());
  for (auto [a, b] : edges_) {
    if (kind_ == GraphKind::homogeneous && a > b) std::swap(a, b);
    edges.emplace_back(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g;
  g.kind_ = kind_;
  g.labels_ = std::move(labels_);
  g.index_ = std::move(index_);
  g.sides_ = std::move(sides_);
  g.edge_count_ = edges.size();

  std::vector<uint32_t> deg(v_count, 0);
  for (auto [a, b] : edges) {
    ++deg[a];
    ++deg[b];
  }
  g.offsets_.assign(v_count + 1, 0);
  for (uint32_t v = 0; v < v_count; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.adjacency_.resize(g.offsets_[v_count]);
  std::vector<uint32_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [a, b] : edges) {
    g.adjacency_[cursor[a]++] = b;
    g.adjacency_[cursor[b]++] = a;
  }
  for (uint32_t v = 0; v < v_count; ++v) {
    std::sort(g.adjacency_.begin() + g.offsets_[v],
              g.adjacency_.begin() + g.offsets_[v + 1]);
  }

  g.left_size_ = 0;
  g.right_size_ = 0;
  if (kind_ == GraphKind::bipartite) {
    for (uint32_t v = 0; v < v_count; ++v) {
      if (g.sides_[v] == 0) {
        ++g.left_size_;
      } else {
        ++g.right_size_;
      }
    }
  } else {
    g.left_size_ = v_count;
  }
  return g;
}

Graph load_edge_list(std::istream& in, GraphKind kind) {
  GraphBuilder builder(kind);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;  // whitespace-only line
    if (!(ls >> b) || (ls >> extra)) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected two whitespace-separated labels, got '" +
                       line + "'");
    }
    try {
      builder.add_edge(a, b);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return builder.finish();
}

Graph load_edge_list_file(const std::string& path, GraphKind kind) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open edge-list file '" + path +
                          "' (expected: one edge per line, two labels)");
  }
  return load_edge_list(in, kind);
}

void save_edge_list(const Graph& g, std::ostream& out) {
  for (uint32_t u = 0; u < g.node_count(); ++u) {
    for (uint32_t v : g.neighbors(u)) {
      const bool canonical =
          g.kind() == GraphKind::bipartite ? g.side(u) == 0 : u < v;
      if (canonical) out << g.label(u) << ' ' << g.label(v) << '\n';
    }
  }
}

void save_label_map(const Graph& g, std::ostream& out) {
  for (uint32_t v = 0; v < g.node_count(); ++v) {
    out << v << '\t' << g.label(v) << '\n';
  }
}

std::vector<std::string> load_label_map(std::istream& in) {
  std::vector<std::string> labels;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 'id<TAB>label'");
    }
    const uint32_t id = static_cast<uint32_t>(std::stoul(line.substr(0, tab)));
    if (id != labels.size()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": ids must be dense and in order");
    }
    labels.push_back(line.substr(tab + 1));
  }
  return labels;
}

namespace {

uint64_t pair_key(uint32_t u, uint32_t v, uint32_t v_count) {
  return static_cast<uint64_t>(u) * v_count + v;
}

// Every admissible non-edge, in deterministic order.
std::vector<std::pair<uint32_t, uint32_t>> enumerate_complement(const Graph& g) {
  std::vector<std::pair<uint32_t, uint32_t>> out;
  if (g.kind() == GraphKind::bipartite) {
    const auto lefts = g.side_nodes(0);
    const auto rights = g.side_nodes(1);
    for (uint32_t l : lefts) {
      for (uint32_t r : rights) {
        if (!g.has_edge(l, r)) out.emplace_back(l, r);
      }
    }
  } else {
    for (uint32_t u = 0; u + 1 < g.node_count(); ++u) {
      for (uint32_t v = u + 1; v < g.node_count(); ++v) {
        if (!g.has_edge(u, v)) out.emplace_back(u, v);
      }
    }
  }
  return out;
}

}  // namespace

NegativeSample complement_negative_sample(const Graph& g, size_t count,
                                          Rng& rng) {
  NegativeSample result;
  const uint32_t v_count = g.node_count();

  uint64_t admissible = 0;
  std::vector<uint32_t> lefts, rights;
  if (g.kind() == GraphKind::bipartite) {
    lefts = g.side_nodes(0);
    rights = g.side_nodes(1);
    admissible = static_cast<uint64_t>(lefts.size()) * rights.size();
  } else {
    admissible = static_cast<uint64_t>(v_count) * (v_count - (v_count ? 1 : 0)) / 2;
  }
  const uint64_t complement_size =
      admissible >= g.edge_count() ? admissible - g.edge_count() : 0;

  if (complement_size <= count) {
    result.pairs = enumerate_complement(g);
    rng.shuffle(result.pairs);
    result.exhausted = result.pairs.size() < count;
    if (result.pairs.size() > count) result.pairs.resize(count);
    return result;
  }

  std::unordered_set<uint64_t> seen;
  seen.reserve(count * 2);
  const size_t max_attempts = 100 * count;
  size_t attempts = 0;
  while (result.pairs.size() < count && attempts < max_attempts) {
    ++attempts;
    uint32_t u, v;
    if (g.kind() == GraphKind::bipartite) {
      u = lefts[rng.uniform_u32(static_cast<uint32_t>(lefts.size()))];
      v = rights[rng.uniform_u32(static_cast<uint32_t>(rights.size()))];
    } else {
      u = rng.uniform_u32(v_count);
      v = rng.uniform_u32(v_count);
      if (u == v) continue;
      if (u > v) std::swap(u, v);
    }
    if (g.has_edge(u, v)) continue;
    if (!seen.insert(pair_key(u, v, v_count)).second) continue;
    result.pairs.emplace_back(u, v);
  }

  if (result.pairs.size() < count) {
    // Dense graph starved the rejection loop; enumerate what is left.
    auto all = enumerate_complement(g);
    rng.shuffle(all);
    for (auto [u, v] : all) {
      if (result.pairs.size() >= count) break;
      if (seen.insert(pair_key(u, v, v_count)).second) {
        result.pairs.emplace_back(u, v);
      }
    }
  }
  result.exhausted = result.pairs.size() < count;
  return result;
}

}  // namespace mge
