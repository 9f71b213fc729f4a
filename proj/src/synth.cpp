#include "mge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mge/common.hpp"

namespace mge {

namespace {

struct AttributeCounts {
  uint32_t segments;
  uint32_t regions;
  uint32_t keywords;
};

// 60 attributes at 8 communities split as 8 segments, 12 regions, 40
// keywords; other budgets scale the same way.
AttributeCounts split_attributes(const SynthConfig& cfg) {
  AttributeCounts c{};
  c.segments = cfg.communities;
  c.regions = std::max<uint32_t>(1, cfg.attributes / 5);
  if (cfg.attributes < c.segments + c.regions + 1)
    throw ValidationError("synth: attributes too few for segments + regions + >=1 keyword");
  c.keywords = cfg.attributes - c.segments - c.regions;
  return c;
}

}  // namespace

void SynthConfig::validate() const {
  if (users < 2) throw ValidationError("synth: need at least 2 users");
  if (sellers < 1) throw ValidationError("synth: need at least 1 seller");
  if (communities < 2) throw ValidationError("synth: communities must be >= 2");
  auto check01 = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
      throw ValidationError(std::string("synth: ") + name + " must lie in [0,1]");
  };
  check01(intra_p, "intra_p");
  check01(inter_p, "inter_p");
  check01(purchase_homophily, "purchase_homophily");
  check01(credit_homophily, "credit_homophily");
  check01(credit_positive_rate, "credit_positive_rate");
  if (purchases_per_user < 1)
    throw ValidationError("synth: purchases_per_user must be >= 1");
  split_attributes(*this);  // throws when the attribute budget is infeasible
}

std::string user_label(uint32_t i) { return "u" + std::to_string(i); }
std::string seller_label(uint32_t j) { return "s" + std::to_string(j); }

Graph gen_friendship(const SynthConfig& cfg) {
  cfg.validate();
  GraphBuilder b(GraphKind::homogeneous);
  for (uint32_t i = 0; i < cfg.users; ++i) b.add_node(user_label(i));
  Rng rng(mix64(cfg.seed, 0x510));
  for (uint32_t i = 0; i < cfg.users; ++i) {
    const uint32_t ci = community_of(i, cfg.communities);
    for (uint32_t j = i + 1; j < cfg.users; ++j) {
      const double p =
          ci == community_of(j, cfg.communities) ? cfg.intra_p : cfg.inter_p;
      if (rng.uniform() < p) b.add_edge(user_label(i), user_label(j));
    }
  }
  return b.finish();
}

Graph gen_purchases(const SynthConfig& cfg, const Graph& friendship) {
  cfg.validate();
  if (friendship.node_count() != cfg.users)
    throw ValidationError("synth: friendship graph size disagrees with config");

  std::vector<std::vector<uint32_t>> by_community(cfg.communities);
  for (uint32_t j = 0; j < cfg.sellers; ++j)
    by_community[community_of(j, cfg.communities)].push_back(j);

  GraphBuilder b(GraphKind::bipartite);
  for (uint32_t i = 0; i < cfg.users; ++i) b.add_node(user_label(i), 0);
  for (uint32_t j = 0; j < cfg.sellers; ++j) b.add_node(seller_label(j), 1);

  Rng rng(mix64(cfg.seed, 0x520));
  for (uint32_t i = 0; i < cfg.users; ++i) {
    const uint32_t c = community_of(i, cfg.communities);
    const std::vector<uint32_t>& preferred = by_community[c];
    for (uint32_t n = 0; n < cfg.purchases_per_user; ++n) {
      uint32_t seller;
      if (!preferred.empty() && rng.uniform() < cfg.purchase_homophily) {
        seller = preferred[rng.uniform_u32(static_cast<uint32_t>(preferred.size()))];
      } else {
        seller = rng.uniform_u32(cfg.sellers);
      }
      b.add_edge(user_label(i), seller_label(seller));
    }
  }
  return b.finish();
}

Graph gen_seller_attributes(const SynthConfig& cfg) {
  cfg.validate();
  const AttributeCounts ac = split_attributes(cfg);

  GraphBuilder b(GraphKind::bipartite);
  for (uint32_t j = 0; j < cfg.sellers; ++j) b.add_node(seller_label(j), 0);
  for (uint32_t k = 0; k < ac.segments; ++k) b.add_node("seg" + std::to_string(k), 1);
  for (uint32_t k = 0; k < ac.regions; ++k) b.add_node("reg" + std::to_string(k), 1);
  for (uint32_t k = 0; k < ac.keywords; ++k) b.add_node("kw" + std::to_string(k), 1);

  Rng rng(mix64(cfg.seed, 0x530));
  for (uint32_t j = 0; j < cfg.sellers; ++j) {
    const uint32_t c = community_of(j, cfg.communities);
    const uint32_t seg = rng.uniform() < cfg.purchase_homophily
                             ? c % ac.segments
                             : rng.uniform_u32(ac.segments);
    b.add_edge(seller_label(j), "seg" + std::to_string(seg));
    b.add_edge(seller_label(j), "reg" + std::to_string(rng.uniform_u32(ac.regions)));
    const uint32_t kw_count = 1 + rng.uniform_u32(3);
    uint32_t added = 0;
    std::vector<uint32_t> chosen;
    while (added < kw_count && added < ac.keywords) {
      const uint32_t kw = rng.uniform_u32(ac.keywords);
      if (std::find(chosen.begin(), chosen.end(), kw) != chosen.end()) continue;
      chosen.push_back(kw);
      b.add_edge(seller_label(j), "kw" + std::to_string(kw));
      ++added;
    }
  }
  return b.finish();
}

CreditLabels gen_credit_labels(const SynthConfig& cfg, const Graph& friendship) {
  cfg.validate();
  if (friendship.node_count() != cfg.users)
    throw ValidationError("synth: friendship graph size disagrees with config");

  const double t = cfg.credit_positive_rate;
  const uint32_t k = cfg.communities;
  // Base rates whose community average equals t exactly: floor(t*k) ones, one
  // fractional remainder, zeros elsewhere.
  std::vector<double> rate(k, 0.0);
  const double scaled = t * static_cast<double>(k);
  const auto full = static_cast<uint32_t>(std::floor(scaled));
  for (uint32_t c = 0; c < std::min(full, k); ++c) rate[c] = 1.0;
  if (full < k) rate[full] = scaled - static_cast<double>(full);

  CreditLabels out;
  out.users.reserve(cfg.users);
  out.labels.reserve(cfg.users);
  Rng rng(mix64(cfg.seed, 0x540));
  const double h = cfg.credit_homophily;
  for (uint32_t i = 0; i < cfg.users; ++i) {
    const double p = h * rate[community_of(i, k)] + (1.0 - h) * t;
    out.users.push_back(user_label(i));
    out.labels.push_back(rng.uniform() < p ? 1 : 0);
  }
  return out;
}

void save_credit_labels(const CreditLabels& cl, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  for (size_t i = 0; i < cl.users.size(); ++i)
    out << cl.users[i] << '\t' << cl.labels[i] << '\n';
}

CreditLabels load_credit_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  CreditLabels cl;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string user;
    int label = 0;
    if (!(ss >> user >> label) || (label != 0 && label != 1))
      throw ParseError("credit labels line " + std::to_string(line_no) +
                       ": expected 'user 0|1'");
    cl.users.push_back(std::move(user));
    cl.labels.push_back(label);
  }
  return cl;
}

double planted_modularity(const Graph& g, uint32_t communities) {
  if (g.kind() != GraphKind::homogeneous)
    throw ValidationError("modularity: homogeneous graph required");
  if (communities < 1) throw ValidationError("modularity: communities must be >= 1");
  const double m = static_cast<double>(g.edge_count());
  if (m == 0.0) return 0.0;
  std::vector<double> within(communities, 0.0);
  std::vector<double> degree_sum(communities, 0.0);
  for (uint32_t v = 0; v < g.node_count(); ++v) {
    const uint32_t cv = community_of(v, communities);
    degree_sum[cv] += static_cast<double>(g.degree(v));
    for (uint32_t u : g.neighbors(v)) {
      if (u > v && community_of(u, communities) == cv) within[cv] += 1.0;
    }
  }
  double q = 0.0;
  for (uint32_t c = 0; c < communities; ++c) {
    const double frac = degree_sum[c] / (2.0 * m);
    q += within[c] / m - frac * frac;
  }
  return q;
}

}  // namespace mge
