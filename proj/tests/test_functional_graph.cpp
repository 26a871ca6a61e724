#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "topogap/error.hpp"
#include "topogap/functional_graph.hpp"

using namespace topogap;
using Catch::Matchers::WithinAbs;

namespace {

ActivationMatrix from_rows(std::vector<std::vector<double>> rows) {
  ActivationMatrix m;
  m.values = Matrix(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m.values(r, c) = rows[r][c];
    m.node_ids.push_back({0, static_cast<std::uint32_t>(r)});
  }
  return m;
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("correlation distance on hand-built rows", "[functional_graph]") {
  const auto g = correlation_distance_matrix(from_rows({{1, 2, 3}, {2, 4, 6}, {3, 2, 1}}));
  CHECK(g.metric_mode == MetricMode::RawD);
  CHECK_THAT(g.dissimilarity(0, 1), WithinAbs(0.0, 1e-12));
  CHECK_THAT(g.dissimilarity(0, 2), WithinAbs(0.0, 1e-12));  // |corr| = 1 for anti-correlation

  // Centred rows (-.5,.5,-.5,.5) and (-.5,-.5,.5,.5) are orthogonal: corr = 0.
  const auto h = correlation_distance_matrix(from_rows({{1, 2, 1, 2}, {1, 1, 2, 2}}));
  CHECK_THAT(h.dissimilarity(0, 1), WithinAbs(1.0, 1e-12));
}

TEST_CASE("correlation distance preconditions", "[functional_graph]") {
  CHECK(kind_of([] { correlation_distance_matrix(from_rows({{1}, {2}})); }) == ErrorKind::TooFewInputs);
  CHECK(kind_of([] { correlation_distance_matrix(from_rows({{1, 2}, {3, 3}})); }) == ErrorKind::ZeroVarianceRow);
  CHECK(kind_of([] { reference::correlation_distance_matrix(from_rows({{1, 2}, {3, 3}})); }) ==
        ErrorKind::ZeroVarianceRow);
}

TEST_CASE("parallel correlation kernel matches the direct Pearson reference", "[functional_graph][property]") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = oracle::random_activations(2 + rng.below(40), 2 + rng.below(60), rng);
    const auto fast = correlation_distance_matrix(m);
    const auto slow = reference::correlation_distance_matrix(m);
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast.dissimilarity(i, i) == 0.0);
      for (std::size_t j = 0; j < fast.size(); ++j) {
        const double d = fast.dissimilarity(i, j);
        CHECK(d == fast.dissimilarity(j, i));
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK_THAT(d, WithinAbs(slow.dissimilarity(i, j), 1e-12));
      }
    }
  }
}

TEST_CASE("correlation distance is invariant under positive affine rescaling of a row", "[functional_graph][property]") {
  SplitMix64 rng(5);
  auto m = oracle::random_activations(8, 30, rng);
  const auto before = correlation_distance_matrix(m);
  for (std::size_t r = 0; r < m.n_nodes(); ++r) {
    const double a = 0.1 + 10.0 * rng.uniform();
    const double b = 20.0 * (rng.uniform() - 0.5);
    for (double& v : m.values.row(r)) v = a * v + b;
  }
  const auto after = correlation_distance_matrix(m);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      CHECK_THAT(after.dissimilarity(i, j), WithinAbs(before.dissimilarity(i, j), 1e-12));
}

TEST_CASE("metric correction values and mode", "[functional_graph]") {
  CHECK(metric_correction(0.0) == 0.0);
  CHECK(metric_correction(1.0) == 1.0);
  CHECK_THAT(metric_correction(0.5), WithinAbs(std::sqrt(0.75), 1e-15));
  CHECK_THAT(metric_correction(0.5), WithinAbs(0.8660254, 1e-7));

  SplitMix64 rng(8);
  const auto g = oracle::random_graph(12, rng);
  const auto c = apply_metric_correction(g);
  const auto r = reference::apply_metric_correction(g);
  CHECK(c.metric_mode == MetricMode::CorrectedDPrime);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) {
      CHECK_THAT(c.dissimilarity(i, j), WithinAbs(r.dissimilarity(i, j), 1e-15));
      for (std::size_t k = 0; k < 12; ++k)
        for (std::size_t l = 0; l < 12; l += 3)
          CHECK((g.dissimilarity(i, j) <= g.dissimilarity(k, l)) == (c.dissimilarity(i, j) <= c.dissimilarity(k, l)));
    }
  CHECK(kind_of([&] { apply_metric_correction(c); }) == ErrorKind::AlreadyCorrected);
}

TEST_CASE("importance scores count per-input argmax of |activation|", "[functional_graph]") {
  // Node 0 wins inputs 0-2 (by |value|), node 1 wins input 3, node 2 never wins.
  const auto m = from_rows({{-5, 4, 3, 0}, {1, 1, 1, 9}, {2, -3, 2.5, 1}});
  CHECK(importance_scores(m) == std::vector<std::uint64_t>{3, 1, 0});
  CHECK(reference::importance_scores(m) == std::vector<std::uint64_t>{3, 1, 0});

  CHECK(importance_scores(from_rows({{1, -2, 3, 4, 0}})) == std::vector<std::uint64_t>{5});

  // Exact ties on every input go to the lowest index.
  CHECK(importance_scores(from_rows({{2, -3, 1}, {-2, 3, 1}, {0, 0, 0}})) == std::vector<std::uint64_t>{3, 0, 0});
}

TEST_CASE("parallel importance kernel matches the reference, ties included", "[functional_graph][property]") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    ActivationMatrix m;
    const std::size_t n = 1 + rng.below(30), cols = 1 + rng.below(700);
    m.values = Matrix(n, cols);
    for (double& v : m.values.data()) v = static_cast<double>(static_cast<int>(rng.below(7)) - 3);
    m.node_ids.resize(n);
    const auto fast = importance_scores(m);
    CHECK(fast == reference::importance_scores(m));
    CHECK(std::accumulate(fast.begin(), fast.end(), std::uint64_t{0}) == cols);
  }
}

TEST_CASE("importance distribution inflates zero-score nodes", "[functional_graph]") {
  const std::vector<std::uint64_t> scores{3, 1, 0};
  const auto d = importance_distribution(scores, 4);
  CHECK_THAT(d.probabilities[0], WithinAbs(3.0 / 5.0, 1e-15));
  CHECK_THAT(d.probabilities[1], WithinAbs(1.0 / 5.0, 1e-15));
  CHECK_THAT(d.probabilities[2], WithinAbs(1.0 / 5.0, 1e-15));
  CHECK(d.scores == scores);

  const auto single = importance_distribution(std::vector<std::uint64_t>{4}, 4);
  CHECK(single.probabilities == std::vector<double>{1.0});

  const auto none_zero = importance_distribution(std::vector<std::uint64_t>{2, 2}, 4);
  CHECK_THAT(none_zero.probabilities[0] + none_zero.probabilities[1], WithinAbs(1.0, 1e-15));

  CHECK(kind_of([] { importance_distribution(std::vector<std::uint64_t>{0, 0}, 4); }) == ErrorKind::InconsistentScores);
  CHECK(kind_of([] { importance_distribution(std::vector<std::uint64_t>{0, 0}, 0); }) == ErrorKind::InconsistentScores);
  CHECK(kind_of([] { importance_distribution(std::vector<std::uint64_t>{1, 2}, 4); }) == ErrorKind::InconsistentScores);
}

TEST_CASE("importance probabilities are positive and normalized on fuzzed matrices", "[functional_graph][property]") {
  SplitMix64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = oracle::random_activations(1 + rng.below(50), 1 + rng.below(80), rng);
    const auto d = importance_distribution(importance_scores(m), m.n_inputs());
    double sum = 0.0;
    for (double p : d.probabilities) {
      CHECK(p > 0.0);
      sum += p;
    }
    CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("sample_nodes draws distinct nodes deterministically", "[functional_graph]") {
  ImportanceDistribution d{{0.1, 0.2, 0.3, 0.4}, {1, 2, 3, 4}};
  auto all = sample_nodes(d, 4, 9);
  std::ranges::sort(all);
  CHECK(all == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(sample_nodes(d, 2, 42) == sample_nodes(d, 2, 42));
  const auto two = sample_nodes(d, 3, 5);
  CHECK(std::set<std::size_t>(two.begin(), two.end()).size() == 3);
  CHECK(kind_of([&] { sample_nodes(d, 5, 1); }) == ErrorKind::SizeTooLarge);
}

TEST_CASE("sample_nodes follows a concentrated distribution", "[functional_graph]") {
  ImportanceDistribution d{{0.998, 0.001, 0.001}, {}};
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) hits += sample_nodes(d, 1, seed)[0] == 0;
  CHECK(hits >= 9900);
}

TEST_CASE("sample_nodes matches sequential draw-and-remove probabilities", "[functional_graph]") {
  // Exact P({i, j}) for two sequential renormalized draws, against 40k trials.
  const std::vector<double> p{0.5, 0.25, 0.15, 0.1};
  ImportanceDistribution d{p, {}};
  std::map<std::pair<std::size_t, std::size_t>, int> counts;
  constexpr int kTrials = 40000;
  for (int t = 0; t < kTrials; ++t) {
    auto s = sample_nodes(d, 2, static_cast<std::uint64_t>(t) * 7919);
    counts[{std::min(s[0], s[1]), std::max(s[0], s[1])}]++;
  }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      const double exact = p[i] * p[j] / (1 - p[i]) + p[j] * p[i] / (1 - p[j]);
      const double observed = static_cast<double>(counts[{i, j}]) / kTrials;
      const double sigma = std::sqrt(exact * (1 - exact) / kTrials);
      CHECK(std::abs(observed - exact) <= 5 * sigma);
    }
}

TEST_CASE("subgraph extracts principal submatrices", "[functional_graph]") {
  SplitMix64 rng(2);
  const auto g = oracle::random_graph(3, rng);
  const std::vector<std::size_t> all{0, 1, 2};
  CHECK(subgraph(g, all).dissimilarity == g.dissimilarity);

  const std::vector<std::size_t> one{1};
  const auto s1 = subgraph(g, one);
  CHECK(s1.size() == 1);
  CHECK(s1.dissimilarity(0, 0) == 0.0);

  const std::vector<std::size_t> ends{0, 2};
  const auto s2 = subgraph(g, ends);
  CHECK(s2.dissimilarity(0, 1) == g.dissimilarity(0, 2));
  CHECK(s2.dissimilarity(1, 0) == g.dissimilarity(2, 0));
  CHECK(s2.node_ids == std::vector<NodeId>{g.node_ids[0], g.node_ids[2]});

  const std::vector<std::size_t> bad{0, 3};
  CHECK(kind_of([&] { subgraph(g, bad); }) == ErrorKind::IndexOutOfRange);
}

TEST_CASE("lower-triangular CSV export", "[functional_graph]") {
  FunctionalGraph g;
  g.dissimilarity = Matrix(3, 3, std::vector<double>{0, 0.5, 0.25, 0.5, 0, 1, 0.25, 1, 0});
  const auto path = std::filesystem::temp_directory_path() / "topogap_lower.csv";
  write_lower_triangular_csv(path, g);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text == "\n0.5\n0.25,1\n");
}
