#include "mge/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "mge/common.hpp"
#include "mge/context.hpp"
#include "mge/fusion.hpp"
#include "mge/skipgram.hpp"

namespace mge {

namespace {

// Seed streams, one per stage concern, all derived from the global seed.
constexpr uint64_t kSeedEmbFriendship = 0xE1;
constexpr uint64_t kSeedEmbPurchases = 0xE2;
constexpr uint64_t kSeedEmbAttributes = 0xE3;
constexpr uint64_t kSeedPairPositives = 0xF1;
constexpr uint64_t kSeedPairNegatives = 0xF2;
constexpr uint64_t kSeedSplit = 0xC1;
constexpr uint64_t kSeedModel = 0xC2;
constexpr uint64_t kSeedMimic = 0xD1;

long long parse_int(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0')
    throw ParseError("config key '" + key + "': '" + value + "' is not an integer");
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0')
    throw ParseError("config key '" + key + "': '" + value + "' is not a number");
  return v;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0')
    throw ParseError("config key '" + key + "': '" + value +
                     "' is not an unsigned integer");
  return v;
}

}  // namespace

void PipelineConfig::validate() const {
  synth.validate();
  if (task != "buying" && task != "credit" && task != "credit-friends-only")
    throw ValidationError("task must be buying, credit, or credit-friends-only");
  if (dim < 1) throw ValidationError("embed.dim must be >= 1");
  if (chunk_size < 1) throw ValidationError("embed.chunk_size must be >= 1");
  if (permutations < 1) throw ValidationError("embed.permutations must be >= 1");
  if (embed_epochs < 0) throw ValidationError("embed.epochs must be >= 0");
  if (negatives < 1) throw ValidationError("embed.negatives must be >= 1");
  if (!(initial_lr > 0.0)) throw ValidationError("embed.initial_lr must be > 0");
  if (noise_exponent < 0.0) throw ValidationError("embed.noise_exponent must be >= 0");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (max_pairs_per_class < 1)
    throw ValidationError("pairs.max_per_class must be >= 1");
  model_kind_from_name(model);
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ValidationError("evaluate.threshold must lie in [0,1]");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("split.train_fraction must lie in (0,1)");
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": expected key=value");
    std::string key = line.substr(first, eq - first);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    const size_t vstart = value.find_first_not_of(" \t");
    value = vstart == std::string::npos ? "" : value.substr(vstart);
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t'))
      value.pop_back();
    if (key.empty())
      throw ParseError(path + " line " + std::to_string(line_no) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

PipelineConfig config_from_kv(const std::map<std::string, std::string>& kv,
                              PipelineConfig base) {
  PipelineConfig c = std::move(base);
  for (const auto& [key, value] : kv) {
    if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "workers") c.workers = static_cast<int>(parse_int(key, value));
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "task") c.task = value;
    else if (key == "synth.users") c.synth.users = static_cast<uint32_t>(parse_int(key, value));
    else if (key == "synth.sellers") c.synth.sellers = static_cast<uint32_t>(parse_int(key, value));
    else if (key == "synth.attributes") c.synth.attributes = static_cast<uint32_t>(parse_int(key, value));
    else if (key == "synth.communities") c.synth.communities = static_cast<uint32_t>(parse_int(key, value));
    else if (key == "synth.intra_p") c.synth.intra_p = parse_real(key, value);
    else if (key == "synth.inter_p") c.synth.inter_p = parse_real(key, value);
    else if (key == "synth.purchase_homophily") c.synth.purchase_homophily = parse_real(key, value);
    else if (key == "synth.purchases_per_user") c.synth.purchases_per_user = static_cast<uint32_t>(parse_int(key, value));
    else if (key == "synth.credit_homophily") c.synth.credit_homophily = parse_real(key, value);
    else if (key == "synth.credit_positive_rate") c.synth.credit_positive_rate = parse_real(key, value);
    else if (key == "embed.dim") c.dim = static_cast<int>(parse_int(key, value));
    else if (key == "embed.chunk_size") c.chunk_size = static_cast<int>(parse_int(key, value));
    else if (key == "embed.permutations") c.permutations = static_cast<int>(parse_int(key, value));
    else if (key == "embed.epochs") c.embed_epochs = static_cast<int>(parse_int(key, value));
    else if (key == "embed.negatives") c.negatives = static_cast<int>(parse_int(key, value));
    else if (key == "embed.initial_lr") c.initial_lr = parse_real(key, value);
    else if (key == "embed.noise_exponent") c.noise_exponent = parse_real(key, value);
    else if (key == "pairs.max_per_class") c.max_pairs_per_class = static_cast<size_t>(parse_u64(key, value));
    else if (key == "classify.model") c.model = value;
    else if (key == "classify.C") c.logreg.C = parse_real(key, value);
    else if (key == "classify.logreg_epochs") c.logreg.max_epochs = static_cast<int>(parse_int(key, value));
    else if (key == "classify.knn_k") c.knn_k = static_cast<int>(parse_int(key, value));
    else if (key == "classify.mlp_hidden") c.mlp.hidden = static_cast<int>(parse_int(key, value));
    else if (key == "classify.mlp_lr") c.mlp.lr = parse_real(key, value);
    else if (key == "classify.mlp_max_iter") c.mlp.max_iter = static_cast<int>(parse_int(key, value));
    else if (key == "classify.mlp_batch") c.mlp.batch = static_cast<int>(parse_int(key, value));
    else if (key == "evaluate.threshold") c.threshold = parse_real(key, value);
    else if (key == "split.train_fraction") c.train_fraction = parse_real(key, value);
    else if (key == "mimic.slots") c.mimic.slots = static_cast<int>(parse_int(key, value));
    else if (key == "mimic.epochs") c.mimic.epochs = static_cast<int>(parse_int(key, value));
    else if (key == "mimic.lr") c.mimic.lr = parse_real(key, value);
    else if (key == "mimic.batch") c.mimic.batch = static_cast<int>(parse_int(key, value));
    else throw ParseError("unknown config key '" + key + "'");
  }
  return c;
}

std::map<std::string, std::string> config_to_kv(const PipelineConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["seed"] = std::to_string(cfg.seed);
  kv["workers"] = std::to_string(cfg.workers);
  kv["task"] = cfg.task;
  kv["synth.users"] = std::to_string(cfg.synth.users);
  kv["synth.sellers"] = std::to_string(cfg.synth.sellers);
  kv["synth.attributes"] = std::to_string(cfg.synth.attributes);
  kv["synth.communities"] = std::to_string(cfg.synth.communities);
  kv["synth.intra_p"] = format_double(cfg.synth.intra_p);
  kv["synth.inter_p"] = format_double(cfg.synth.inter_p);
  kv["synth.purchase_homophily"] = format_double(cfg.synth.purchase_homophily);
  kv["synth.purchases_per_user"] = std::to_string(cfg.synth.purchases_per_user);
  kv["synth.credit_homophily"] = format_double(cfg.synth.credit_homophily);
  kv["synth.credit_positive_rate"] = format_double(cfg.synth.credit_positive_rate);
  kv["embed.dim"] = std::to_string(cfg.dim);
  kv["embed.chunk_size"] = std::to_string(cfg.chunk_size);
  kv["embed.permutations"] = std::to_string(cfg.permutations);
  kv["embed.epochs"] = std::to_string(cfg.embed_epochs);
  kv["embed.negatives"] = std::to_string(cfg.negatives);
  kv["embed.initial_lr"] = format_double(cfg.initial_lr);
  kv["embed.noise_exponent"] = format_double(cfg.noise_exponent);
  kv["pairs.max_per_class"] = std::to_string(cfg.max_pairs_per_class);
  kv["classify.model"] = cfg.model;
  kv["classify.C"] = format_double(cfg.logreg.C);
  kv["classify.logreg_epochs"] = std::to_string(cfg.logreg.max_epochs);
  kv["classify.knn_k"] = std::to_string(cfg.knn_k);
  kv["classify.mlp_hidden"] = std::to_string(cfg.mlp.hidden);
  kv["classify.mlp_lr"] = format_double(cfg.mlp.lr);
  kv["classify.mlp_max_iter"] = std::to_string(cfg.mlp.max_iter);
  kv["classify.mlp_batch"] = std::to_string(cfg.mlp.batch);
  kv["evaluate.threshold"] = format_double(cfg.threshold);
  kv["split.train_fraction"] = format_double(cfg.train_fraction);
  kv["mimic.slots"] = std::to_string(cfg.mimic.slots);
  kv["mimic.epochs"] = std::to_string(cfg.mimic.epochs);
  kv["mimic.lr"] = format_double(cfg.mimic.lr);
  kv["mimic.batch"] = std::to_string(cfg.mimic.batch);
  return kv;
}

std::string artifact_path(const PipelineConfig& cfg, const char* name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

namespace {

bool key_in_groups(const std::string& key, const std::vector<std::string>& groups) {
  for (const auto& g : groups) {
    if (g == key) return true;  // exact key (seed, workers)
    if (g.back() == '.' && key.size() > g.size() &&
        key.compare(0, g.size(), g) == 0)
      return true;
  }
  return false;
}

struct StageGroups {
  std::vector<std::string> upstream;  // checked against the stored manifest
  std::vector<std::string> own;       // rewritten by this stage
};

StageGroups stage_groups(Stage stage) {
  // `task`, `pairs.*`, and `split.*` belong to the embedding stage: for the
  // buying task the held-out pairs are carved out of the purchase graph
  // before embedding, so changing any of them invalidates the embeddings.
  const std::vector<std::string> through_embed = {
      "seed", "synth.", "workers", "embed.", "task", "pairs.", "split."};
  switch (stage) {
    case Stage::synth:
      return {{}, {"seed", "synth."}};
    case Stage::embed:
      return {{"seed", "synth."},
              {"workers", "embed.", "task", "pairs.", "split."}};
    case Stage::fuse:
      return {through_embed, {}};
    case Stage::mimic:
      return {through_embed, {"mimic."}};
    case Stage::classify:
      return {through_embed, {"classify."}};
    case Stage::evaluate: {
      std::vector<std::string> up = through_embed;
      up.push_back("classify.");
      return {up, {"evaluate."}};
    }
  }
  throw ValidationError("bad stage");
}

}  // namespace

void verify_and_update_manifest(const PipelineConfig& cfg, Stage stage) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = artifact_path(cfg, artifact::manifest);
  std::map<std::string, std::string> stored;
  if (std::filesystem::exists(path)) stored = parse_kv_file(path);

  const std::map<std::string, std::string> now = config_to_kv(cfg);
  const StageGroups groups = stage_groups(stage);

  // A value that changed since the upstream artifact was produced is a
  // refusal; the stage's own keys may change freely because the stage is
  // about to regenerate its artifacts.
  for (const auto& [key, value] : now) {
    if (!key_in_groups(key, groups.upstream)) continue;
    auto it = stored.find(key);
    if (it != stored.end() && it->second != value)
      throw ValidationError("manifest mismatch in '" + cfg.out_dir + "': key '" +
                            key + "' was '" + it->second + "', now '" + value +
                            "'; regenerate upstream artifacts or restore the "
                            "original configuration");
  }
  for (const auto& [key, value] : now) {
    if (key_in_groups(key, groups.upstream) || key_in_groups(key, groups.own))
      stored[key] = value;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  for (const auto& [key, value] : stored) out << key << '=' << value << '\n';
}

void stage_synth(const PipelineConfig& cfg) {
  cfg.validate();
  verify_and_update_manifest(cfg, Stage::synth);
  SynthConfig sc = cfg.synth;
  sc.seed = cfg.seed;

  const Graph friendship = gen_friendship(sc);
  {
    std::ofstream out(artifact_path(cfg, artifact::friendship));
    if (!out) throw ValidationError("cannot write friendship graph");
    save_edge_list(friendship, out);
  }
  {
    const Graph purchases = gen_purchases(sc, friendship);
    std::ofstream out(artifact_path(cfg, artifact::purchases));
    if (!out) throw ValidationError("cannot write purchase graph");
    save_edge_list(purchases, out);
  }
  {
    const Graph attributes = gen_seller_attributes(sc);
    std::ofstream out(artifact_path(cfg, artifact::attributes));
    if (!out) throw ValidationError("cannot write seller attribute graph");
    save_edge_list(attributes, out);
  }
  save_credit_labels(gen_credit_labels(sc, friendship),
                     artifact_path(cfg, artifact::credit));
}

namespace {

struct EmbedRole {
  const char* graph_file;
  const char* emb_file;
  GraphKind kind;
  uint64_t seed_tag;
};

EmbedRole embed_role(const std::string& role) {
  if (role == "friendship")
    return {artifact::friendship, artifact::emb_friendship,
            GraphKind::homogeneous, kSeedEmbFriendship};
  if (role == "purchases")
    return {artifact::purchases, artifact::emb_purchases, GraphKind::bipartite,
            kSeedEmbPurchases};
  if (role == "attributes")
    return {artifact::attributes, artifact::emb_attributes, GraphKind::bipartite,
            kSeedEmbAttributes};
  throw ValidationError("unknown embed role '" + role +
                        "' (expected friendship, purchases, or attributes)");
}

// Candidate (user, seller) pairs for the buying task together with their
// row-level train/test split. Everything here is a pure function of the
// purchase graph and the configuration, so the embedding stage can hold the
// test edges out of its training graph and every later stage recomputes the
// identical layout instead of reading a persisted split.
struct BuyingPairs {
  std::vector<std::pair<uint32_t, uint32_t>> pos;  // purchase-graph node ids
  std::vector<std::pair<uint32_t, uint32_t>> neg;
  std::vector<std::string> entities;  // "user|seller", positives first
  std::vector<int> labels;
  RowSplit split;
};

BuyingPairs sample_buying_pairs(const Graph& purchases,
                                const PipelineConfig& cfg) {
  BuyingPairs bp;
  for (uint32_t v = 0; v < purchases.node_count(); ++v) {
    if (purchases.side(v) != 0) continue;
    for (uint32_t s : purchases.neighbors(v)) bp.pos.emplace_back(v, s);
  }
  if (bp.pos.empty())
    throw ValidationError("buying task: purchase graph has no edges");
  if (bp.pos.size() > cfg.max_pairs_per_class) {
    Rng rng(mix64(cfg.seed, kSeedPairPositives));
    rng.shuffle(bp.pos);
    bp.pos.resize(cfg.max_pairs_per_class);
    std::sort(bp.pos.begin(), bp.pos.end());
  }

  Rng neg_rng(mix64(cfg.seed, kSeedPairNegatives));
  NegativeSample negatives =
      complement_negative_sample(purchases, bp.pos.size(), neg_rng);
  bp.neg = std::move(negatives.pairs);
  const size_t per_class = std::min(bp.pos.size(), bp.neg.size());
  bp.pos.resize(per_class);
  bp.neg.resize(per_class);

  bp.entities.reserve(2 * per_class);
  bp.labels.reserve(2 * per_class);
  for (const auto& [u, s] : bp.pos) {
    bp.entities.push_back(purchases.label(u) + "|" + purchases.label(s));
    bp.labels.push_back(1);
  }
  for (const auto& [u, s] : bp.neg) {
    bp.entities.push_back(purchases.label(u) + "|" + purchases.label(s));
    bp.labels.push_back(0);
  }
  bp.split = stratified_split_rows(
      bp.entities, bp.labels,
      SplitSpec{cfg.train_fraction, true, mix64(cfg.seed, kSeedSplit)});
  return bp;
}

// The purchase graph the buying task embeds: the full graph minus the
// positive pairs assigned to the test split. Leaving those edges in would
// let the embedding memorize exactly the links the classifier is later
// asked to predict.
Graph purchases_minus_test_edges(const Graph& g, const BuyingPairs& bp) {
  std::set<std::pair<uint32_t, uint32_t>> excluded;
  for (size_t row : bp.split.test_rows)
    if (row < bp.pos.size()) excluded.insert(bp.pos[row]);

  GraphBuilder b(g.kind());
  for (uint32_t v = 0; v < g.node_count(); ++v)
    b.add_node(g.label(v), g.side(v));
  for (uint32_t v = 0; v < g.node_count(); ++v) {
    if (g.side(v) != 0) continue;
    for (uint32_t s : g.neighbors(v))
      if (!excluded.count({v, s})) b.add_edge(g.label(v), g.label(s));
  }
  return b.finish();
}

}  // namespace

void stage_embed(const PipelineConfig& cfg, const std::string& role) {
  cfg.validate();
  const EmbedRole r = embed_role(role);
  verify_and_update_manifest(cfg, Stage::embed);

  Graph g = load_edge_list_file(artifact_path(cfg, r.graph_file), r.kind);
  if (role == "purchases" && cfg.task == "buying")
    g = purchases_minus_test_edges(g, sample_buying_pairs(g, cfg));
  const uint64_t embed_seed = mix64(cfg.seed, r.seed_tag);
  GroupCorpus corpus = generate_groups(g, cfg.chunk_size, cfg.permutations,
                                       mix64(embed_seed, 1), cfg.workers);
  corpus.source_graph_id = role;

  TrainConfig tc;
  tc.dim = cfg.dim;
  tc.epochs = cfg.embed_epochs;
  tc.initial_lr = static_cast<float>(cfg.initial_lr);
  tc.negatives = cfg.negatives;
  tc.noise_exponent = cfg.noise_exponent;
  tc.seed = embed_seed;
  tc.workers = cfg.workers;

  EmbeddingSet e = train(corpus, tc);
  for (uint32_t v = 0; v < e.vocab; ++v) e.labels[v] = g.label(v);
  e.graph_id = role;
  save_embeddings_file(e, artifact_path(cfg, r.emb_file));
}

namespace {

std::vector<std::string> origin_tags(const std::string& tag, int dim) {
  return std::vector<std::string>(static_cast<size_t>(dim), tag);
}

void append_origin(std::vector<std::string>& dst, const std::vector<std::string>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

FeatureDataset fuse_buying(const PipelineConfig& cfg) {
  const Graph purchases =
      load_edge_list_file(artifact_path(cfg, artifact::purchases), GraphKind::bipartite);
  const EmbeddingSet emb_f =
      load_embeddings_file(artifact_path(cfg, artifact::emb_friendship));
  const EmbeddingSet emb_p =
      load_embeddings_file(artifact_path(cfg, artifact::emb_purchases));
  const EmbeddingSet emb_a =
      load_embeddings_file(artifact_path(cfg, artifact::emb_attributes));
  const EmbeddingIndex idx_f(emb_f), idx_p(emb_p), idx_a(emb_a);

  const std::vector<FuseSource> user_sources = {
      {"user_friendship", &emb_f, &idx_f, nullptr},
      {"user_transaction", &emb_p, &idx_p, nullptr}};
  const std::vector<FuseSource> seller_sources = {
      {"seller_transaction", &emb_p, &idx_p, nullptr},
      {"seller_attribute", &emb_a, &idx_a, nullptr}};

  const BuyingPairs bp = sample_buying_pairs(purchases, cfg);

  FeatureDataset ds;
  ds.cols = static_cast<size_t>(emb_f.dim) + emb_p.dim + emb_p.dim + emb_a.dim;
  append_origin(ds.feature_origin, origin_tags("user_friendship", emb_f.dim));
  append_origin(ds.feature_origin, origin_tags("user_transaction", emb_p.dim));
  append_origin(ds.feature_origin, origin_tags("seller_transaction", emb_p.dim));
  append_origin(ds.feature_origin, origin_tags("seller_attribute", emb_a.dim));

  auto add_row = [&](uint32_t u, uint32_t s, int label) {
    const std::string& ul = purchases.label(u);
    const std::string& sl = purchases.label(s);
    const FusedVector fu = fuse(ul, user_sources);
    const FusedVector fs = fuse(sl, seller_sources);
    ds.matrix.insert(ds.matrix.end(), fu.values.begin(), fu.values.end());
    ds.matrix.insert(ds.matrix.end(), fs.values.begin(), fs.values.end());
    ds.entity_ids.push_back(ul + "|" + sl);
    ds.labels.push_back(label);
    ++ds.rows;
  };
  for (auto [u, s] : bp.pos) add_row(u, s, 1);
  for (auto [u, s] : bp.neg) add_row(u, s, 0);
  ds.validate();
  return ds;
}

FeatureDataset fuse_credit(const PipelineConfig& cfg, bool friends_only) {
  const CreditLabels credit =
      load_credit_labels(artifact_path(cfg, artifact::credit));
  const EmbeddingSet emb_f =
      load_embeddings_file(artifact_path(cfg, artifact::emb_friendship));
  const EmbeddingIndex idx_f(emb_f);

  EmbeddingSet emb_p;
  std::optional<EmbeddingIndex> idx_p;
  std::vector<FuseSource> sources = {{"user_friendship", &emb_f, &idx_f, nullptr}};
  if (!friends_only) {
    emb_p = load_embeddings_file(artifact_path(cfg, artifact::emb_purchases));
    idx_p.emplace(emb_p);
    sources.push_back({"user_transaction", &emb_p, &*idx_p, nullptr});
  }

  FeatureDataset ds;
  ds.cols = static_cast<size_t>(emb_f.dim) + (friends_only ? 0 : emb_p.dim);
  append_origin(ds.feature_origin, origin_tags("user_friendship", emb_f.dim));
  if (!friends_only)
    append_origin(ds.feature_origin, origin_tags("user_transaction", emb_p.dim));

  for (size_t i = 0; i < credit.users.size(); ++i) {
    const FusedVector fv = fuse(credit.users[i], sources);
    ds.matrix.insert(ds.matrix.end(), fv.values.begin(), fv.values.end());
    ds.entity_ids.push_back(credit.users[i]);
    ds.labels.push_back(credit.labels[i]);
    ++ds.rows;
  }
  ds.validate();
  return ds;
}

}  // namespace

void stage_fuse(const PipelineConfig& cfg) {
  cfg.validate();
  verify_and_update_manifest(cfg, Stage::fuse);
  FeatureDataset ds;
  if (cfg.task == "buying") {
    ds = fuse_buying(cfg);
  } else {
    ds = fuse_credit(cfg, cfg.task == "credit-friends-only");
  }
  save_dataset_file(ds, artifact_path(cfg, artifact::dataset));
}

MimicTrainResult stage_mimic_train(const PipelineConfig& cfg) {
  cfg.validate();
  verify_and_update_manifest(cfg, Stage::mimic);
  const Graph g =
      load_edge_list_file(artifact_path(cfg, artifact::friendship), GraphKind::homogeneous);
  const EmbeddingSet e =
      load_embeddings_file(artifact_path(cfg, artifact::emb_friendship));
  MimicConfig mc = cfg.mimic;
  mc.seed = mix64(cfg.seed, kSeedMimic);
  MimicTrainResult res = mimic_train(g, e, mc);
  save_mimic_model_file(res.model, artifact_path(cfg, artifact::mimic_model));
  return res;
}

void stage_classify(const PipelineConfig& cfg) {
  cfg.validate();
  verify_and_update_manifest(cfg, Stage::classify);
  const FeatureDataset ds = load_dataset_file(artifact_path(cfg, artifact::dataset));

  SplitSpec split_spec;
  split_spec.train_fraction = cfg.train_fraction;
  split_spec.stratified = true;
  split_spec.seed = mix64(cfg.seed, kSeedSplit);
  const SplitResult split = stratified_split(ds, split_spec);

  ClassifierConfig cc;
  cc.kind = model_kind_from_name(cfg.model);
  cc.logreg = cfg.logreg;
  cc.knn_k = cfg.knn_k;
  cc.mlp = cfg.mlp;
  cc.mlp.seed = mix64(cfg.seed, kSeedModel);
  cc.threshold = cfg.threshold;

  const AnyModel model = fit_classifier(split.train, cc);
  save_model_file(model, artifact_path(cfg, artifact::model));
  save_predictions(predict_dataset(model, split.test),
                   artifact_path(cfg, artifact::predictions));
}

MetricsReport stage_evaluate(const PipelineConfig& cfg) {
  cfg.validate();
  verify_and_update_manifest(cfg, Stage::evaluate);
  const PredictionSet p =
      load_predictions(artifact_path(cfg, artifact::predictions));
  const MetricsReport r = evaluate_predictions(p, cfg.threshold);
  write_report_file(r, artifact_path(cfg, artifact::report));
  if (r.has_auc) write_roc_csv_file(r.roc, artifact_path(cfg, artifact::roc));
  return r;
}

MetricsReport run_e2e(const PipelineConfig& cfg) {
  cfg.validate();
  // A full run owns its manifest: start from a clean slate so stale values
  // from previous experiments cannot trip the per-stage checks.
  std::filesystem::create_directories(cfg.out_dir);
  const std::string manifest = artifact_path(cfg, artifact::manifest);
  if (std::filesystem::exists(manifest)) std::filesystem::remove(manifest);

  stage_synth(cfg);
  stage_embed(cfg, "friendship");
  if (cfg.task == "buying") {
    stage_embed(cfg, "purchases");
    stage_embed(cfg, "attributes");
  } else if (cfg.task == "credit") {
    stage_embed(cfg, "purchases");
  }
  stage_fuse(cfg);
  stage_classify(cfg);
  return stage_evaluate(cfg);
}

}  // namespace mge
