#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mge/common.hpp"
#include "mge/context.hpp"
#include "mge/graph.hpp"
#include "mge/skipgram.hpp"

using namespace mge;

namespace {

EmbeddingSet zero_set(uint32_t vocab, int dim) {
  EmbeddingSet e;
  e.vocab = vocab;
  e.dim = dim;
  e.input.assign(size_t(vocab) * dim, 0.0f);
  e.output.assign(size_t(vocab) * dim, 0.0f);
  e.labels.resize(vocab);
  for (uint32_t v = 0; v < vocab; ++v) e.labels[v] = std::to_string(v);
  return e;
}

// Per-pair negative-sampling objective evaluated in double precision, with
// one coordinate of one row overridden. Matches the contract of sgns_update.
double pair_objective(const EmbeddingSet& e, uint32_t center, uint32_t context,
                      const std::vector<uint32_t>& negs, bool in_input,
                      uint32_t row, int coord, double value) {
  auto entry = [&](bool input_table, uint32_t r, int d) -> double {
    if (input_table == in_input && r == row && d == coord) return value;
    const float* p = input_table ? e.input_row(r) : e.output_row(r);
    return p[d];
  };
  auto dot_rows = [&](uint32_t cen, uint32_t out) {
    double s = 0.0;
    for (int d = 0; d < e.dim; ++d)
      s += entry(true, cen, d) * entry(false, out, d);
    return s;
  };
  double f = std::log(sigmoid(dot_rows(center, context)));
  for (uint32_t n : negs) f += std::log(sigmoid(-dot_rows(center, n)));
  return f;
}

double frand(Rng& g, double lo, double hi) { return lo + (hi - lo) * g.uniform(); }

Graph two_cliques() {
  GraphBuilder b(GraphKind::homogeneous);
  const char* a[] = {"a0", "a1", "a2", "a3"};
  const char* c[] = {"b0", "b1", "b2", "b3"};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      b.add_edge(a[i], a[j]);
      b.add_edge(c[i], c[j]);
    }
  return b.finish();
}

double cosine(const float* a, const float* b, int dim) {
  double num = 0, na = 0, nb = 0;
  for (int d = 0; d < dim; ++d) {
    num += double(a[d]) * b[d];
    na += double(a[d]) * a[d];
    nb += double(b[d]) * b[d];
  }
  return num / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("init_embeddings: bounds, zero outputs, determinism") {
  Rng r1(9), r2(9);
  const EmbeddingSet a = init_embeddings(1, 4, r1);
  CHECK(a.input.size() == 4);
  for (float x : a.input) CHECK(std::abs(x) <= 0.125f);
  for (float x : a.output) CHECK(x == 0.0f);

  const EmbeddingSet b = init_embeddings(1, 4, r2);
  CHECK(a.input == b.input);

  Rng r3(77);
  const EmbeddingSet c = init_embeddings(50, 16, r3);
  for (float x : c.input) CHECK(std::abs(x) <= 0.5f / 16.0f);
  CHECK_THROWS_AS(init_embeddings(0, 4, r3), DomainError);
  CHECK_THROWS_AS(init_embeddings(4, 0, r3), DomainError);
}

TEST_CASE("softmax over zero embeddings is uniform") {
  const EmbeddingSet e = zero_set(4, 3);
  for (uint32_t i = 0; i < 4; ++i)
    for (uint32_t j = 0; j < 4; ++j)
      CHECK(softmax_prob(e, i, j) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax of two equal scores is one half") {
  EmbeddingSet e = zero_set(2, 2);
  e.input_row(0)[0] = 5.0f;   // scores (5, 5)
  e.output_row(0)[0] = 1.0f;
  e.output_row(1)[0] = 1.0f;
  CHECK(softmax_prob(e, 0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(softmax_prob(e, 0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax of scores (1,0,0)") {
  EmbeddingSet e = zero_set(3, 1);
  e.input_row(0)[0] = 1.0f;
  e.output_row(0)[0] = 1.0f;
  // e / (e + 2), evaluated independently at high precision.
  CHECK(softmax_prob(e, 0, 0) == doctest::Approx(0.5761168847658291).epsilon(1e-9));
}

TEST_CASE("softmax rows normalize to one") {
  Rng g(31337);
  EmbeddingSet e = init_embeddings(100, 6, g);
  for (auto& x : e.output) x = float(frand(g, -1.0, 1.0));
  for (uint32_t i = 0; i < e.vocab; ++i) {
    double sum = 0.0;
    for (uint32_t j = 0; j < e.vocab; ++j) sum += softmax_prob(e, i, j);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(softmax_prob(e, 100, 0), DomainError);
}

TEST_CASE("corpus log-likelihood of one pair group under zero embeddings") {
  const EmbeddingSet e = zero_set(4, 3);
  GroupCorpus c;
  c.vocab = 4;
  c.groups.push_back({0, {1}});
  // (1/1) * (1/2) * (log 1/4 + log 1/4) = log(1/4)
  CHECK(corpus_log_likelihood(e, c) ==
        doctest::Approx(-1.3862943611198906).epsilon(1e-12));

  // Averaging identity: identical groups leave the mean unchanged.
  c.groups.push_back({0, {1}});
  c.groups.push_back({0, {1}});
  CHECK(corpus_log_likelihood(e, c) ==
        doctest::Approx(-1.3862943611198906).epsilon(1e-12));
}

TEST_CASE("corpus log-likelihood is never positive") {
  Rng g(404);
  EmbeddingSet e = init_embeddings(8, 4, g);
  for (auto& x : e.output) x = float(frand(g, -2.0, 2.0));
  for (auto& x : e.input) x = float(frand(g, -2.0, 2.0));
  GroupCorpus c;
  c.vocab = 8;
  c.groups.push_back({0, {1, 2, 3}});
  c.groups.push_back({4, {5}});
  c.groups.push_back({6, {7, 0}});
  CHECK(corpus_log_likelihood(e, c) <= 0.0);
}

TEST_CASE("noise table: uniform weights draw uniformly") {
  NoiseTable t(std::vector<double>{1.0, 1.0, 1.0, 1.0});
  Rng g(5);
  const int draws = 100000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < draws; ++i) ++counts[t.sample(g)];
  double chi2 = 0.0;
  const double expect = draws / 4.0;
  for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 11.345);  // chi-square df=3 at p=0.01
}

TEST_CASE("noise table: weights (8,1) draw 8:1") {
  NoiseTable t(std::vector<double>{8.0, 1.0});
  Rng g(6);
  const int draws = 100000;
  int n0 = 0;
  for (int i = 0; i < draws; ++i)
    if (t.sample(g) == 0) ++n0;
  const double ratio = double(n0) / double(draws - n0);
  CHECK(ratio == doctest::Approx(8.0).epsilon(0.05));
}

TEST_CASE("noise table from corpus: count^0.75 and exponent 0") {
  // Node 0 serves as context 16 times, node 1 once; then 17 bystanders once.
  GroupCorpus c;
  c.vocab = 19;
  for (uint32_t i = 0; i < 16; ++i) c.groups.push_back({0, {2 + i}});
  c.groups.push_back({1, {18}});

  NoiseTable t = build_noise_table(c, 0.75);
  Rng g(7);
  const int draws = 400000;
  std::map<uint32_t, int> counts;
  for (int i = 0; i < draws; ++i) ++counts[t.sample(g)];
  // 16^0.75 = 8, so node 0 should outdraw node 1 eight to one.
  const double ratio = double(counts[0]) / double(counts[1]);
  CHECK(ratio == doctest::Approx(8.0).epsilon(0.05));

  NoiseTable flat = build_noise_table(c, 0.0);
  counts.clear();
  for (int i = 0; i < draws; ++i) ++counts[flat.sample(g)];
  CHECK(counts.size() == 19);
  double chi2 = 0.0;
  const double expect = draws / 19.0;
  for (const auto& [node, n] : counts)
    chi2 += (n - expect) * (n - expect) / expect;
  CHECK(chi2 < 34.805);  // chi-square df=18 at p=0.01

  GroupCorpus empty;
  CHECK_THROWS_AS(build_noise_table(empty, 0.75), ValidationError);
}

TEST_CASE("sgns_update at the zero point moves rows by lr/2") {
  EmbeddingSet e = zero_set(3, 2);
  e.input_row(0)[0] = 0.2f;
  e.input_row(0)[1] = -0.4f;
  const std::vector<uint32_t> negs = {2};
  sgns_update(e, 0, 1, negs, 0.1f);
  // All dots are zero, sigmoid(0) = 0.5: the positive output moves toward
  // the center by lr*0.5, the negative away by the same amount, and the
  // center itself is unchanged because both output rows started at zero.
  CHECK(e.output_row(1)[0] == doctest::Approx(0.1 * 0.5 * 0.2).epsilon(1e-6));
  CHECK(e.output_row(1)[1] == doctest::Approx(0.1 * 0.5 * -0.4).epsilon(1e-6));
  CHECK(e.output_row(2)[0] == doctest::Approx(-0.1 * 0.5 * 0.2).epsilon(1e-6));
  CHECK(e.output_row(2)[1] == doctest::Approx(-0.1 * 0.5 * -0.4).epsilon(1e-6));
  CHECK(e.input_row(0)[0] == 0.2f);
  CHECK(e.input_row(0)[1] == -0.4f);
}

TEST_CASE("sgns_update with lr=0 changes nothing") {
  Rng g(11);
  EmbeddingSet e = init_embeddings(4, 3, g);
  for (auto& x : e.output) x = float(frand(g, -1.0, 1.0));
  const EmbeddingSet before = e;
  const std::vector<uint32_t> negs = {3, 3};
  sgns_update(e, 0, 1, negs, 0.0f);
  CHECK(e.input == before.input);
  CHECK(e.output == before.output);
}

TEST_CASE("sgns_update matches central finite differences") {
  Rng g(2718);
  int instances = 0;
  while (instances < 24) {
    const uint32_t vocab = 2 + g.uniform_u32(9);
    const int dim = 1 + int(g.uniform_u32(8));
    EmbeddingSet e = zero_set(vocab, dim);
    for (auto& x : e.input) x = float(frand(g, -1.0, 1.0));
    for (auto& x : e.output) x = float(frand(g, -1.0, 1.0));

    const uint32_t center = g.uniform_u32(vocab);
    uint32_t context = g.uniform_u32(vocab);
    const int n_negs = 1 + int(g.uniform_u32(5));
    std::vector<uint32_t> negs;
    for (int i = 0; i < n_negs; ++i) negs.push_back(g.uniform_u32(vocab));
    if (instances % 4 == 0 && negs.size() >= 2) negs[1] = negs[0];  // repeats
    bool ctx_is_neg = false;
    for (uint32_t n : negs) ctx_is_neg |= (n == context);
    if (ctx_is_neg) continue;

    const EmbeddingSet before = e;
    sgns_update(e, center, context, negs, 1.0f);  // lr=1: delta == gradient

    // Touched coordinates: center input row, context + negative output rows.
    const double h = 1e-5;
    double err2 = 0.0, norm2 = 0.0;
    auto check_row = [&](bool in_input, uint32_t row) {
      for (int d = 0; d < dim; ++d) {
        const float* bp = in_input ? before.input_row(row) : before.output_row(row);
        const float* ap = in_input ? e.input_row(row) : e.output_row(row);
        const double x0 = bp[d];
        const double fd = (pair_objective(before, center, context, negs,
                                          in_input, row, d, x0 + h) -
                           pair_objective(before, center, context, negs,
                                          in_input, row, d, x0 - h)) /
                          (2.0 * h);
        const double got = double(ap[d]) - x0;
        err2 += (got - fd) * (got - fd);
        norm2 += fd * fd;
      }
    };
    check_row(true, center);
    check_row(false, context);
    std::vector<uint32_t> uniq = negs;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (uint32_t n : uniq) check_row(false, n);
    REQUIRE(norm2 > 0.0);
    CHECK(std::sqrt(err2 / norm2) < 1e-5);

    // No other row may move.
    for (uint32_t v = 0; v < vocab; ++v) {
      if (v != center)
        for (int d = 0; d < dim; ++d)
          CHECK(e.input_row(v)[d] == before.input_row(v)[d]);
      bool touched = (v == context);
      for (uint32_t n : negs) touched |= (v == n);
      if (!touched)
        for (int d = 0; d < dim; ++d)
          CHECK(e.output_row(v)[d] == before.output_row(v)[d]);
    }
    ++instances;
  }
}

TEST_CASE("negative_sampling_step resamples context collisions") {
  // Two-node vocab: every negative for context 1 must be node 0.
  GroupCorpus c;
  c.vocab = 2;
  c.groups.push_back({0, {1}});
  const NoiseTable noise = build_noise_table(c, 1.0);

  EmbeddingSet e = zero_set(2, 2);
  e.input_row(0)[0] = 0.5f;
  Rng g(3);
  negative_sampling_step(e, 0, 1, noise, 3, 0.1f, g);
  // Three forced negatives on row 0: delta = -3 * lr * 0.5 * center.
  CHECK(e.output_row(0)[0] == doctest::Approx(-3 * 0.1 * 0.5 * 0.5).epsilon(1e-6));
  CHECK(e.output_row(1)[0] == doctest::Approx(0.1 * 0.5 * 0.5).epsilon(1e-6));
}

TEST_CASE("training separates two disconnected cliques") {
  const Graph g = two_cliques();
  const GroupCorpus corpus = generate_groups(g, 3, 5, 99);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 50;
  cfg.seed = 4;
  const EmbeddingSet e = train(corpus, cfg);

  double intra = 0, inter = 0;
  int n_intra = 0, n_inter = 0;
  for (uint32_t u = 0; u < 8; ++u)
    for (uint32_t v = u + 1; v < 8; ++v) {
      const double c = cosine(e.input_row(u), e.input_row(v), e.dim);
      const bool same = (g.label(u)[0] == g.label(v)[0]);
      (same ? intra : inter) += c;
      (same ? n_intra : n_inter) += 1;
    }
  intra /= n_intra;
  inter /= n_inter;
  CHECK(intra > inter + 0.2);  // observed margin ~2.0 at this setup
}

TEST_CASE("second-order proximity: shared neighborhoods align embeddings") {
  // x and y share their entire neighborhood {m1,m2,m3} without being
  // adjacent; the z-star is a disjoint control whose nodes share nothing
  // with x or y.
  GraphBuilder b(GraphKind::homogeneous);
  for (const char* m : {"m1", "m2", "m3"}) {
    b.add_edge("x", m);
    b.add_edge("y", m);
  }
  for (const char* w : {"w1", "w2", "w3"}) b.add_edge("z", w);
  const Graph g = b.finish();
  const GroupCorpus corpus = generate_groups(g, 3, 5, 21);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 50;
  cfg.seed = 8;
  const EmbeddingSet e = train(corpus, cfg);

  auto cos_of = [&](const char* a, const char* c) {
    return cosine(e.input_row(*g.find(a)), e.input_row(*g.find(c)), e.dim);
  };
  const double cxy = cos_of("x", "y");
  double non_sharing = 0;
  int n = 0;
  for (const char* a : {"x", "y"})
    for (const char* c : {"z", "w1", "w2", "w3"}) {
      non_sharing += cos_of(a, c);
      ++n;
    }
  CHECK(cxy > non_sharing / n + 0.2);  // observed 0.60 vs 0.13
}

TEST_CASE("per-epoch exact-softmax likelihood is non-decreasing on a tiny corpus") {
  GroupCorpus c;
  c.vocab = 2;
  c.groups.push_back({0, {1}});
  const NoiseTable noise = build_noise_table(c, 0.75);
  const auto pairs = corpus_to_prediction_pairs(c);

  Rng init_rng(12);
  EmbeddingSet e = init_embeddings(2, 4, init_rng);
  Rng g(13);
  double prev = corpus_log_likelihood(e, c);
  const double at_init = prev;
  for (int epoch = 0; epoch < 100; ++epoch) {
    for (auto [cen, ctx] : pairs)
      negative_sampling_step(e, cen, ctx, noise, 1, 0.025f, g);
    const double ll = corpus_log_likelihood(e, c);
    CHECK(ll >= prev - 1e-12);
    prev = ll;
  }
  CHECK(prev > at_init + 1e-3);  // strictly positive improvement
}

TEST_CASE("training with zero epochs returns the initialization") {
  const Graph g = two_cliques();
  const GroupCorpus corpus = generate_groups(g, 3, 2, 5);
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 0;
  cfg.seed = 10;
  const EmbeddingSet a = train(corpus, cfg);
  const EmbeddingSet b = train(corpus, cfg);
  CHECK(a.input == b.input);
  CHECK(a.input.size() == corpus.vocab * 4u);
  bool any_nonzero = false;
  for (float x : a.input) {
    CHECK(std::abs(x) <= 0.125f);
    any_nonzero |= (x != 0.0f);
  }
  CHECK(any_nonzero);
  for (float x : a.output) CHECK(x == 0.0f);
}

TEST_CASE("single-worker training is bit-reproducible; seeds matter") {
  const Graph g = two_cliques();
  const GroupCorpus corpus = generate_groups(g, 3, 2, 5);
  TrainConfig cfg;
  cfg.dim = 6;
  cfg.epochs = 3;
  cfg.seed = 20;
  const EmbeddingSet a = train(corpus, cfg);
  const EmbeddingSet b = train(corpus, cfg);
  CHECK(a.input == b.input);
  CHECK(a.output == b.output);

  cfg.seed = 21;
  const EmbeddingSet c = train(corpus, cfg);
  CHECK(a.input != c.input);
}

TEST_CASE("parallel training still separates the cliques") {
  const Graph g = two_cliques();
  const GroupCorpus corpus = generate_groups(g, 3, 5, 99);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 50;
  cfg.seed = 4;
  cfg.workers = 3;
  const EmbeddingSet e = train(corpus, cfg);
  double intra = 0, inter = 0;
  int n_intra = 0, n_inter = 0;
  for (uint32_t u = 0; u < 8; ++u)
    for (uint32_t v = u + 1; v < 8; ++v) {
      const double c = cosine(e.input_row(u), e.input_row(v), e.dim);
      const bool same = (g.label(u)[0] == g.label(v)[0]);
      (same ? intra : inter) += c;
      (same ? n_intra : n_inter) += 1;
    }
  CHECK(intra / n_intra > inter / n_inter + 0.2);
}

TEST_CASE("divergence aborts with an epoch diagnostic") {
  const Graph g = two_cliques();
  const GroupCorpus corpus = generate_groups(g, 3, 5, 99);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 5;
  cfg.initial_lr = 1e9f;
  cfg.seed = 4;
  CHECK_THROWS_WITH_AS(train(corpus, cfg),
                       doctest::Contains("epoch"), NumericalError);
}

TEST_CASE("embeddings round-trip through the text format") {
  const Graph g = two_cliques();
  const GroupCorpus corpus = generate_groups(g, 3, 2, 5);
  TrainConfig cfg;
  cfg.dim = 5;
  cfg.epochs = 2;
  cfg.seed = 30;
  EmbeddingSet e = train(corpus, cfg);
  e.graph_id = "cliques";
  for (uint32_t v = 0; v < e.vocab; ++v) e.labels[v] = g.label(v);

  std::ostringstream out;
  save_embeddings(e, out);
  std::istringstream in(out.str());
  const EmbeddingSet back = load_embeddings(in);
  CHECK(back.vocab == e.vocab);
  CHECK(back.dim == e.dim);
  CHECK(back.labels == e.labels);
  CHECK(back.input == e.input);  // exact binary32 round trip
  for (float x : back.output) CHECK(x == 0.0f);
}
