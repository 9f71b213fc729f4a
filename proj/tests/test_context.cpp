#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mge/common.hpp"
#include "mge/context.hpp"
#include "mge/graph.hpp"

using namespace mge;

namespace {

Graph from_lines(const std::string& text, GraphKind kind) {
  std::istringstream in(text);
  return load_edge_list(in, kind);
}

std::vector<Group> groups_rooted_at(const GroupCorpus& c, uint32_t root) {
  std::vector<Group> out;
  for (const Group& g : c.groups)
    if (g.root == root) out.push_back(g);
  return out;
}

Graph random_graph(Rng& gen, uint32_t max_nodes) {
  GraphBuilder b(GraphKind::homogeneous);
  const uint32_t n = 2 + gen.uniform_u32(max_nodes - 1);
  for (uint32_t i = 0; i < n; ++i) b.add_node("n" + std::to_string(i));
  const uint32_t edges = gen.uniform_u32(3 * n);
  for (uint32_t e = 0; e < edges; ++e) {
    const uint32_t u = gen.uniform_u32(n), v = gen.uniform_u32(n);
    if (u != v) b.add_edge("n" + std::to_string(u), "n" + std::to_string(v));
  }
  return b.finish();
}

}  // namespace

TEST_CASE("star with three leaves, k=3, n=1: one full group at the center") {
  const Graph g = from_lines("c 1\nc 2\nc 3\n", GraphKind::homogeneous);
  const GroupCorpus corpus = generate_groups(g, 3, 1, 42);
  const uint32_t c = *g.find("c");

  const auto at_center = groups_rooted_at(corpus, c);
  REQUIRE(at_center.size() == 1);
  std::set<uint32_t> members(at_center[0].members.begin(),
                             at_center[0].members.end());
  CHECK(members == std::set<uint32_t>{*g.find("1"), *g.find("2"), *g.find("3")});

  for (const char* leaf : {"1", "2", "3"}) {
    const auto at_leaf = groups_rooted_at(corpus, *g.find(leaf));
    REQUIRE(at_leaf.size() == 1);
    CHECK(at_leaf[0].members == std::vector<uint32_t>{c});
  }
}

TEST_CASE("degree 5 with k=2 yields chunks of sizes 2,2,1") {
  const Graph g =
      from_lines("c 1\nc 2\nc 3\nc 4\nc 5\n", GraphKind::homogeneous);
  const GroupCorpus corpus = generate_groups(g, 2, 1, 7);
  const auto at_center = groups_rooted_at(corpus, *g.find("c"));
  REQUIRE(at_center.size() == 3);
  std::multiset<size_t> sizes;
  for (const Group& grp : at_center) sizes.insert(grp.members.size());
  CHECK(sizes == std::multiset<size_t>{1, 2, 2});
}

TEST_CASE("degree 4 with k=2, n=3: six groups, every neighbor thrice") {
  const Graph g = from_lines("c 1\nc 2\nc 3\nc 4\n", GraphKind::homogeneous);
  const GroupCorpus corpus = generate_groups(g, 2, 3, 123);
  const auto at_center = groups_rooted_at(corpus, *g.find("c"));
  CHECK(at_center.size() == 6);
  std::map<uint32_t, int> mult;
  for (const Group& grp : at_center)
    for (uint32_t m : grp.members) ++mult[m];
  REQUIRE(mult.size() == 4);
  for (const auto& [node, count] : mult) CHECK(count == 3);
}

TEST_CASE("chunk-count identity over random graphs") {
  Rng gen(1234);
  for (int trial = 0; trial < 25; ++trial) {
    const Graph g = random_graph(gen, 60);
    const int k = 1 + static_cast<int>(gen.uniform_u32(4));
    const int n = 1 + static_cast<int>(gen.uniform_u32(3));
    const GroupCorpus corpus = generate_groups(g, k, n, trial);
    size_t want = 0;
    for (uint32_t v = 0; v < g.node_count(); ++v) {
      const size_t d = g.degree(v);
      want += static_cast<size_t>(n) * ((d + k - 1) / k);
    }
    CHECK(corpus.groups.size() == want);
  }
}

TEST_CASE("group members are distinct neighbors of the root, 1..k of them") {
  Rng gen(55);
  const Graph g = random_graph(gen, 40);
  const GroupCorpus corpus = generate_groups(g, 3, 2, 9);
  for (const Group& grp : corpus.groups) {
    CHECK(grp.members.size() >= 1);
    CHECK(grp.members.size() <= 3);
    std::set<uint32_t> uniq(grp.members.begin(), grp.members.end());
    CHECK(uniq.size() == grp.members.size());
    for (uint32_t m : grp.members) CHECK(g.has_edge(grp.root, m));
  }
}

TEST_CASE("isolated nodes emit no groups") {
  GraphBuilder b(GraphKind::homogeneous);
  b.add_node("alone");
  b.add_edge("a", "b");
  const Graph g = b.finish();
  const GroupCorpus corpus = generate_groups(g, 2, 4, 3);
  CHECK(groups_rooted_at(corpus, *g.find("alone")).empty());
  CHECK(corpus.groups.size() == 8);  // a and b: 4 single-member groups each
}

TEST_CASE("permutation uniformity: all 6 orderings of 3 neighbors") {
  const Graph g = from_lines("c 1\nc 2\nc 3\n", GraphKind::homogeneous);
  const int reps = 10000;
  const GroupCorpus corpus = generate_groups(g, 3, reps, 2024);
  std::map<std::vector<uint32_t>, int> counts;
  for (const Group& grp : groups_rooted_at(corpus, *g.find("c")))
    ++counts[grp.members];
  REQUIRE(counts.size() == 6);
  for (const auto& [order, count] : counts) {
    const double freq = static_cast<double>(count) / reps;
    CHECK(freq == doctest::Approx(1.0 / 6.0).epsilon(0.12));  // 1/6 +- 0.02
  }
}

TEST_CASE("prediction pairs of a one-member group") {
  GroupCorpus c;
  c.vocab = 2;
  c.groups.push_back({0, {1}});
  const auto pairs = corpus_to_prediction_pairs(c);
  const std::multiset<std::pair<uint32_t, uint32_t>> got(pairs.begin(),
                                                         pairs.end());
  CHECK(got == std::multiset<std::pair<uint32_t, uint32_t>>{{0, 1}, {1, 0}});
}

TEST_CASE("prediction pairs of a two-member group: 6 ordered pairs") {
  GroupCorpus c;
  c.vocab = 3;
  c.groups.push_back({0, {1, 2}});
  const auto pairs = corpus_to_prediction_pairs(c);
  CHECK(pairs.size() == 6);
  std::set<std::pair<uint32_t, uint32_t>> got(pairs.begin(), pairs.end());
  const std::set<std::pair<uint32_t, uint32_t>> want = {
      {0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}};
  CHECK(got == want);
}

TEST_CASE("empty corpus expands to no pairs") {
  GroupCorpus c;
  CHECK(corpus_to_prediction_pairs(c).empty());
}

TEST_CASE("group of j members yields j*(j+1) ordered pairs") {
  Rng gen(77);
  const Graph g = random_graph(gen, 30);
  const GroupCorpus corpus = generate_groups(g, 4, 2, 5);
  size_t want = 0;
  for (const Group& grp : corpus.groups) {
    const size_t j = grp.members.size();
    want += j * (j + 1);
  }
  CHECK(corpus_to_prediction_pairs(corpus).size() == want);
}

TEST_CASE("with k=1 the pair multiset is the directed edge set 2n times") {
  // Each directed edge (u,v) shows up n times from u's groups and n times
  // from v's groups: 2n in total.
  const Graph g = from_lines("a b\nb c\nc d\n", GraphKind::homogeneous);
  const int n = 3;
  const GroupCorpus corpus = generate_groups(g, 1, n, 8);
  std::map<std::pair<uint32_t, uint32_t>, int> mult;
  for (auto p : corpus_to_prediction_pairs(corpus)) ++mult[p];
  size_t directed_edges = 0;
  for (uint32_t v = 0; v < g.node_count(); ++v) directed_edges += g.degree(v);
  CHECK(mult.size() == directed_edges);
  for (const auto& [pair, count] : mult) {
    CHECK(g.has_edge(pair.first, pair.second));
    CHECK(count == 2 * n);
  }
}

TEST_CASE("every prediction pair is an edge or a shared-group 2-hop") {
  Rng gen(31);
  const Graph g = random_graph(gen, 40);
  const GroupCorpus corpus = generate_groups(g, 3, 2, 6);
  // Build per-group co-membership set.
  std::set<std::pair<uint32_t, uint32_t>> allowed;
  for (const Group& grp : corpus.groups) {
    std::vector<uint32_t> all = grp.members;
    all.push_back(grp.root);
    for (uint32_t a : all)
      for (uint32_t b : all)
        if (a != b) allowed.insert({a, b});
  }
  for (auto p : corpus_to_prediction_pairs(corpus)) {
    const bool ok = g.has_edge(p.first, p.second) || allowed.count(p);
    CHECK(ok);
  }
}

TEST_CASE("same seed, same corpus; different seed, different shuffles") {
  Rng gen(404);
  const Graph g = random_graph(gen, 50);
  const GroupCorpus a = generate_groups(g, 3, 3, 99);
  const GroupCorpus b = generate_groups(g, 3, 3, 99);
  CHECK(a.groups == b.groups);
}

TEST_CASE("corpus is independent of the worker count") {
  Rng gen(505);
  const Graph g = random_graph(gen, 80);
  const GroupCorpus w1 = generate_groups(g, 3, 2, 77, 1);
  const GroupCorpus w4 = generate_groups(g, 3, 2, 77, 4);
  CHECK(w1.groups == w4.groups);
}

TEST_CASE("corpus round-trips through save and load") {
  Rng gen(606);
  const Graph g = random_graph(gen, 30);
  GroupCorpus c = generate_groups(g, 2, 2, 12);
  c.source_graph_id = "toy";
  std::ostringstream out;
  save_corpus(c, out);
  std::istringstream in(out.str());
  const GroupCorpus back = load_corpus(in);
  CHECK(back.groups == c.groups);
  CHECK(back.chunk_size == c.chunk_size);
  CHECK(back.permutations == c.permutations);
  CHECK(back.vocab == c.vocab);
  CHECK(back.source_graph_id == c.source_graph_id);
}

TEST_CASE("parameter validation") {
  const Graph g = from_lines("a b\n", GraphKind::homogeneous);
  CHECK_THROWS_AS(generate_groups(g, 0, 1, 1), DomainError);
  CHECK_THROWS_AS(generate_groups(g, 1, 0, 1), DomainError);
}
