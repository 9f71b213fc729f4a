#include "mge/context.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

namespace mge {

namespace {

void groups_for_node(const Graph& g, uint32_t v, int k, int n, uint64_t seed,
                     std::vector<Group>& out) {
  const auto nb = g.neighbors(v);
  if (nb.empty()) return;
  Rng rng(mix64(seed, v));
  std::vector<uint32_t> perm(nb.begin(), nb.end());
  for (int p = 0; p < n; ++p) {
    rng.shuffle(perm);
    for (size_t start = 0; start < perm.size(); start += k) {
      const size_t end = std::min(perm.size(), start + k);
      Group grp;
      grp.root = v;
      grp.members.assign(perm.begin() + start, perm.begin() + end);
      out.push_back(std::move(grp));
    }
  }
}

}  // namespace

GroupCorpus generate_groups(const Graph& g, int chunk_size, int permutations,
                            uint64_t seed, int workers) {
  if (chunk_size < 1) throw DomainError("chunk_size must be >= 1");
  if (permutations < 1) throw DomainError("permutations must be >= 1");
  if (workers < 1) workers = 1;

  GroupCorpus corpus;
  corpus.chunk_size = chunk_size;
  corpus.permutations = permutations;
  corpus.vocab = g.node_count();

  const uint32_t v_count = g.node_count();
  if (workers == 1 || v_count < 256) {
    for (uint32_t v = 0; v < v_count; ++v) {
      groups_for_node(g, v, chunk_size, permutations, seed, corpus.groups);
    }
    return corpus;
  }

  // Disjoint node ranges per worker; per-node seeding keeps the result
  // independent of the partitioning.
  std::vector<std::vector<Group>> parts(workers);
  std::vector<std::thread> threads;
  const uint32_t stride = (v_count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      const uint32_t lo = static_cast<uint32_t>(w) * stride;
      const uint32_t hi = std::min(v_count, lo + stride);
      for (uint32_t v = lo; v < hi; ++v) {
        groups_for_node(g, v, chunk_size, permutations, seed, parts[w]);
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& part : parts) {
    corpus.groups.insert(corpus.groups.end(),
                         std::make_move_iterator(part.begin()),
                         std::make_move_iterator(part.end()));
  }
  return corpus;
}

std::vector<std::pair<uint32_t, uint32_t>> corpus_to_prediction_pairs(
    const GroupCorpus& c) {
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  std::vector<uint32_t> nodes;
  for (const auto& grp : c.groups) {
    nodes.clear();
    nodes.push_back(grp.root);
    nodes.insert(nodes.end(), grp.members.begin(), grp.members.end());
    for (uint32_t a : nodes) {
      for (uint32_t b : nodes) {
        if (a != b) pairs.emplace_back(a, b);
      }
    }
  }
  return pairs;
}

void save_corpus(const GroupCorpus& c, std::ostream& out) {
  out << "# chunk_size=" << c.chunk_size << " permutations=" << c.permutations
      << " vocab=" << c.vocab << " graph=" << c.source_graph_id << '\n';
  for (const auto& grp : c.groups) {
    out << grp.root << '\t';
    for (size_t i = 0; i < grp.members.size(); ++i) {
      if (i) out << ' ';
      out << grp.members[i];
    }
    out << '\n';
  }
}

GroupCorpus load_corpus(std::istream& in) {
  GroupCorpus c;
  std::string line;
  size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!header_seen) {
        std::istringstream hs(line.substr(1));
        std::string tok;
        while (hs >> tok) {
          const auto eq = tok.find('=');
          if (eq == std::string::npos) continue;
          const std::string key = tok.substr(0, eq);
          const std::string val = tok.substr(eq + 1);
          if (key == "chunk_size") c.chunk_size = std::stoi(val);
          else if (key == "permutations") c.permutations = std::stoi(val);
          else if (key == "vocab") c.vocab = static_cast<uint32_t>(std::stoul(val));
          else if (key == "graph") c.source_graph_id = val;
        }
        header_seen = true;
      }
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 'root<TAB>members...'");
    }
    Group grp;
    grp.root = static_cast<uint32_t>(std::stoul(line.substr(0, tab)));
    std::istringstream ms(line.substr(tab + 1));
    uint32_t m;
    while (ms >> m) grp.members.push_back(m);
    if (grp.members.empty()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": group has no members");
    }
    c.vocab = std::max({c.vocab, grp.root + 1,
                        *std::max_element(grp.members.begin(),
                                          grp.members.end()) + 1});
    c.groups.push_back(std::move(grp));
  }
  return c;
}

}  // namespace mge
