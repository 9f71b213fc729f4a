#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mge/graph.hpp"

namespace mge {

// Desk-scale stand-in for a commerce platform: a homophilous user friendship
// graph over planted communities, community-correlated purchase and seller
// attribute graphs, and imbalanced per-user credit labels with controllable
// signal strength.
struct SynthConfig {
  uint32_t users = 2000;
  uint32_t sellers = 200;
  uint32_t attributes = 60;  // segment + region + keyword nodes
  uint32_t communities = 8;
  double intra_p = 0.05;   // same-community friendship probability
  double inter_p = 0.002;  // cross-community friendship probability
  double purchase_homophily = 0.5;
  uint32_t purchases_per_user = 10;
  double credit_homophily = 0.5;
  double credit_positive_rate = 0.16;
  uint64_t seed = 1;

  void validate() const;
};

// Community of a user or seller index: round-robin id % communities.
inline uint32_t community_of(uint32_t index, uint32_t communities) {
  return index % communities;
}

// User labels are "u<i>", sellers "s<j>", attributes "seg<k>"/"reg<k>"/"kw<k>".
std::string user_label(uint32_t i);
std::string seller_label(uint32_t j);

// Stochastic block model user-user graph: edge probability intra_p within a
// community, inter_p across. Every user node exists even when isolated.
Graph gen_friendship(const SynthConfig& cfg);

// Bipartite user-seller purchases. Each user draws purchases_per_user
// sellers: with probability purchase_homophily from the community's preferred
// subset (sellers with the same community id), otherwise uniformly.
Graph gen_purchases(const SynthConfig& cfg, const Graph& friendship);

// Bipartite seller-attribute graph: one segment, one region, and 1-3 keyword
// links per seller. Segment choice follows the seller's community with
// probability purchase_homophily, otherwise uniform.
Graph gen_seller_attributes(const SynthConfig& cfg);

struct CreditLabels {
  std::vector<std::string> users;
  std::vector<int> labels;  // 1 = default risk event (positive class)
};

// Community base rates are planted so the expected global positive rate
// equals credit_positive_rate: floor(t*K) communities at rate 1, one at the
// fractional remainder, the rest at 0. Each user's label draws from
// h * rate(community) + (1 - h) * t with h = credit_homophily.
CreditLabels gen_credit_labels(const SynthConfig& cfg, const Graph& friendship);

void save_credit_labels(const CreditLabels& cl, const std::string& path);
CreditLabels load_credit_labels(const std::string& path);

// Newman modularity of the planted partition on a homogeneous graph.
double planted_modularity(const Graph& g, uint32_t communities);

}  // namespace mge
