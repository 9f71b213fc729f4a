#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mge/common.hpp"
#include "mge/graph.hpp"

using namespace mge;

namespace {

Graph from_lines(const std::string& text, GraphKind kind) {
  std::istringstream in(text);
  return load_edge_list(in, kind);
}

// All admissible non-edges of g, by brute force.
std::set<std::pair<uint32_t, uint32_t>> brute_complement(const Graph& g) {
  std::set<std::pair<uint32_t, uint32_t>> out;
  if (g.kind() == GraphKind::bipartite) {
    for (uint32_t u : g.side_nodes(0))
      for (uint32_t s : g.side_nodes(1))
        if (!g.has_edge(u, s)) out.insert({u, s});
  } else {
    for (uint32_t u = 0; u < g.node_count(); ++u)
      for (uint32_t v = u + 1; v < g.node_count(); ++v)
        if (!g.has_edge(u, v)) out.insert({u, v});
  }
  return out;
}

// Canonical label-sorted edge set, independent of id assignment.
std::set<std::pair<std::string, std::string>> canonical_edges(const Graph& g) {
  std::set<std::pair<std::string, std::string>> out;
  for (uint32_t v = 0; v < g.node_count(); ++v) {
    for (uint32_t u : g.neighbors(v)) {
      std::string a = g.label(v), b = g.label(u);
      if (g.kind() == GraphKind::homogeneous && b < a) std::swap(a, b);
      if (g.kind() == GraphKind::bipartite && g.side(v) == 1) continue;
      out.insert({a, b});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("edge list loading assigns ids in first-appearance order") {
  const Graph g = from_lines("a b\nb c\n", GraphKind::homogeneous);
  CHECK(g.node_count() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.label(0) == "a");
  CHECK(g.label(1) == "b");
  CHECK(g.label(2) == "c");
  const auto nb = g.neighbors(1);
  REQUIRE(nb.size() == 2);
  CHECK(g.label(nb[0]) == "a");
  CHECK(g.label(nb[1]) == "c");
}

TEST_CASE("duplicate edges collapse") {
  const Graph g = from_lines("a b\na b\n", GraphKind::homogeneous);
  CHECK(g.node_count() == 2);
  CHECK(g.edge_count() == 1);
  CHECK(g.degree(0) == 1);
  // Reversed duplicates collapse too.
  const Graph h = from_lines("a b\nb a\n", GraphKind::homogeneous);
  CHECK(h.edge_count() == 1);
}

TEST_CASE("empty input yields the empty graph") {
  const Graph g = from_lines("", GraphKind::homogeneous);
  CHECK(g.node_count() == 0);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("comments and blank lines are ignored") {
  const Graph g = from_lines("# header\n\na b\n  \n# tail\n", GraphKind::homogeneous);
  CHECK(g.node_count() == 2);
  CHECK(g.edge_count() == 1);
}

TEST_CASE("malformed line reports its line number") {
  std::istringstream in("a b\nonly_one_token\n");
  try {
    load_edge_list(in, GraphKind::homogeneous);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("self-loops are rejected in homogeneous graphs") {
  CHECK_THROWS_AS(from_lines("a a\n", GraphKind::homogeneous), ValidationError);
}

TEST_CASE("same-side bipartite edges are rejected") {
  // u0 appears on the left in line 1 and on the right in line 2.
  CHECK_THROWS_AS(from_lines("u0 s0\ns1 u0\n", GraphKind::bipartite),
                  ValidationError);
}

TEST_CASE("neighbors of path and star graphs") {
  const Graph path = from_lines("a b\nb c\n", GraphKind::homogeneous);
  const auto nb = path.neighbors(*path.find("b"));
  CHECK(nb.size() == 2);

  const Graph star =
      from_lines("c 1\nc 2\nc 3\nc 4\nc 5\n", GraphKind::homogeneous);
  CHECK(star.degree(*star.find("c")) == 5);
  CHECK(star.degree(*star.find("3")) == 1);
}

TEST_CASE("isolated registered nodes have empty neighborhoods") {
  GraphBuilder b(GraphKind::homogeneous);
  b.add_node("island");
  b.add_edge("a", "b");
  const Graph g = b.finish();
  CHECK(g.node_count() == 3);
  CHECK(g.degree(*g.find("island")) == 0);
  CHECK(g.neighbors(*g.find("island")).empty());
}

TEST_CASE("out-of-range node id raises a domain error") {
  const Graph g = from_lines("a b\n", GraphKind::homogeneous);
  CHECK_THROWS_AS(g.neighbors(2), DomainError);
  CHECK_THROWS_AS((void)g.label(99), DomainError);
}

TEST_CASE("find resolves labels and misses return nullopt") {
  const Graph g = from_lines("a b\n", GraphKind::homogeneous);
  REQUIRE(g.find("a").has_value());
  CHECK_FALSE(g.find("zz").has_value());
}

TEST_CASE("bipartite side bookkeeping") {
  const Graph g = from_lines("u0 s0\nu0 s1\nu1 s0\n", GraphKind::bipartite);
  CHECK(g.left_size() == 2);
  CHECK(g.right_size() == 2);
  CHECK(g.side(*g.find("u0")) == 0);
  CHECK(g.side(*g.find("s1")) == 1);
  CHECK(g.side_nodes(0).size() == 2);
  CHECK(g.side_nodes(1).size() == 2);
}

TEST_CASE("homogeneous graphs report side 0 everywhere") {
  const Graph g = from_lines("a b\n", GraphKind::homogeneous);
  CHECK(g.side(0) == 0);
  CHECK(g.side(1) == 0);
}

TEST_CASE("complement of a triangle is exhausted immediately") {
  const Graph g = from_lines("a b\nb c\na c\n", GraphKind::homogeneous);
  Rng rng(7);
  const NegativeSample s = complement_negative_sample(g, 1, rng);
  CHECK(s.exhausted);
  CHECK(s.pairs.empty());
}

TEST_CASE("complement of path a-b-c is exactly {(a,c)}") {
  const Graph g = from_lines("a b\nb c\n", GraphKind::homogeneous);
  Rng rng(11);
  const NegativeSample s = complement_negative_sample(g, 1, rng);
  REQUIRE(s.pairs.size() == 1);
  CHECK_FALSE(s.exhausted);
  const auto [u, v] = s.pairs[0];
  CHECK(g.label(std::min(u, v)) == "a");
  CHECK(g.label(std::max(u, v)) == "c");
}

TEST_CASE("complement of sparse 2x2 bipartite graph") {
  const Graph g = from_lines("u0 s0\n", GraphKind::bipartite);
  // Register the missing corner nodes so the pair space is the full 2x2.
  GraphBuilder b(GraphKind::bipartite);
  b.add_node("u0", 0);
  b.add_node("u1", 0);
  b.add_node("s0", 1);
  b.add_node("s1", 1);
  b.add_edge("u0", "s0");
  const Graph full = b.finish();
  Rng rng(3);
  const NegativeSample s = complement_negative_sample(full, 3, rng);
  REQUIRE(s.pairs.size() == 3);
  std::set<std::pair<std::string, std::string>> got;
  for (auto [u, v] : s.pairs) got.insert({full.label(u), full.label(v)});
  const std::set<std::pair<std::string, std::string>> want = {
      {"u0", "s1"}, {"u1", "s0"}, {"u1", "s1"}};
  CHECK(got == want);
}

TEST_CASE("sampled negatives are never edges and never self-pairs") {
  Rng gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    GraphBuilder b(GraphKind::homogeneous);
    const uint32_t n = 5 + gen.uniform_u32(40);
    for (uint32_t i = 0; i < n; ++i) b.add_node("n" + std::to_string(i));
    const uint32_t edges = 1 + gen.uniform_u32(2 * n);
    for (uint32_t e = 0; e < edges; ++e) {
      const uint32_t u = gen.uniform_u32(n), v = gen.uniform_u32(n);
      if (u != v)
        b.add_edge("n" + std::to_string(u), "n" + std::to_string(v));
    }
    const Graph g = b.finish();
    Rng rng(trial);
    const NegativeSample s = complement_negative_sample(g, 50, rng);
    std::set<std::pair<uint32_t, uint32_t>> seen;
    for (auto [u, v] : s.pairs) {
      CHECK(u != v);
      CHECK_FALSE(g.has_edge(u, v));
      CHECK(u < v);  // canonical order for homogeneous pairs
      CHECK(seen.insert({u, v}).second);  // distinct
    }
  }
}

TEST_CASE("complement support equals brute force on small graphs") {
  Rng gen(99);
  for (int trial = 0; trial < 10; ++trial) {
    GraphBuilder b(trial % 2 == 0 ? GraphKind::homogeneous
                                  : GraphKind::bipartite);
    const bool bip = trial % 2 != 0;
    const uint32_t n = 4 + gen.uniform_u32(10);
    for (uint32_t i = 0; i < n; ++i)
      b.add_node((bip && i % 2 ? "s" : "u") + std::to_string(i), bip && i % 2);
    for (uint32_t e = 0; e < n; ++e) {
      uint32_t u = gen.uniform_u32(n), v = gen.uniform_u32(n);
      if (bip) {
        u -= u % 2;             // left node
        v = v | 1u;             // right node
        if (v >= n) continue;
        b.add_edge("u" + std::to_string(u), "s" + std::to_string(v));
      } else if (u != v) {
        b.add_edge("u" + std::to_string(u), "u" + std::to_string(v));
      }
    }
    const Graph g = b.finish();
    const auto want = brute_complement(g);
    if (want.empty()) continue;

    std::set<std::pair<uint32_t, uint32_t>> support;
    for (int rep = 0; rep < 200; ++rep) {
      Rng rng(mix64(trial, rep));
      for (auto [u, v] : complement_negative_sample(g, want.size(), rng).pairs)
        support.insert({u, v});
    }
    CHECK(support == want);
  }
}

TEST_CASE("exhaustion returns the whole complement") {
  const Graph g = from_lines("a b\nb c\n", GraphKind::homogeneous);
  Rng rng(5);
  const NegativeSample s = complement_negative_sample(g, 10, rng);
  CHECK(s.exhausted);
  CHECK(s.pairs.size() == 1);  // only (a,c) exists
}

TEST_CASE("edge list round-trips through save and load") {
  const Graph g = from_lines("a b\nb c\nc d\na d\n", GraphKind::homogeneous);
  std::ostringstream out;
  save_edge_list(g, out);
  const Graph h = from_lines(out.str(), GraphKind::homogeneous);
  CHECK(canonical_edges(g) == canonical_edges(h));
  CHECK(g.node_count() == h.node_count());
}

TEST_CASE("line permutation changes ids but not the canonical edge set") {
  const Graph g = from_lines("a b\nb c\nc d\n", GraphKind::homogeneous);
  const Graph h = from_lines("c d\na b\nb c\n", GraphKind::homogeneous);
  CHECK(canonical_edges(g) == canonical_edges(h));
}

TEST_CASE("label map round-trips") {
  const Graph g = from_lines("x y\ny z\n", GraphKind::homogeneous);
  std::ostringstream out;
  save_label_map(g, out);
  std::istringstream in(out.str());
  const std::vector<std::string> labels = load_label_map(in);
  REQUIRE(labels.size() == 3);
  CHECK(labels[0] == "x");
  CHECK(labels[2] == "z");
}

TEST_CASE("builder rejects bad sides and bipartite self-edges") {
  GraphBuilder b(GraphKind::homogeneous);
  CHECK_THROWS_AS(b.add_node("a", 1), ValidationError);  // homogeneous: side 0
  GraphBuilder bb(GraphKind::bipartite);
  CHECK_THROWS_AS(bb.add_node("a", 2), ValidationError);
}
