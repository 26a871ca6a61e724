#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace topogap::oracle {

FunctionalGraph random_graph(std::size_t n, SplitMix64& rng, int levels) {
  FunctionalGraph g;
  g.dissimilarity = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      double w = rng.uniform();
      if (levels > 0) w = std::round(w * levels) / levels;
      g.dissimilarity(i, j) = g.dissimilarity(j, i) = w;
    }
  for (std::uint32_t i = 0; i < n; ++i) g.node_ids.push_back({0, i});
  return g;
}

std::vector<double> kruskal_positive_weights(const FunctionalGraph& g) {
  const std::size_t n = g.size();
  struct E {
    double w;
    std::size_t a, b;
  };
  std::vector<E> edges;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) edges.push_back({g.dissimilarity(a, b), a, b});
  std::ranges::sort(edges, {}, &E::w);

  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i;
  std::vector<double> out;
  for (const auto& e : edges) {
    const std::size_t la = label[e.a], lb = label[e.b];
    if (la == lb) continue;
    for (auto& l : label)
      if (l == lb) l = la;
    if (e.w > 0.0) out.push_back(e.w);
  }
  std::ranges::sort(out);
  return out;
}

bool same_points(const PersistenceDiagram& a, const PersistenceDiagram& b, double tol) {
  if (a.size() != b.size()) return false;
  auto pa = a.points, pb = b.points;
  std::ranges::sort(pa);
  std::ranges::sort(pb);
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (std::abs(pa[i].birth - pb[i].birth) > tol || std::abs(pa[i].death - pb[i].death) > tol) return false;
  return true;
}

ActivationMatrix random_activations(std::size_t nodes, std::size_t inputs, SplitMix64& rng) {
  ActivationMatrix m;
  m.model_id = "random";
  m.values = Matrix(nodes, inputs);
  for (std::size_t r = 0; r < nodes; ++r) {
    // Mix of spreads and offsets, some nodes large so importance is uneven.
    const double scale = 0.1 + 3.0 * rng.uniform();
    const double offset = rng.uniform() - 0.5;
    for (std::size_t c = 0; c < inputs; ++c) m.values(r, c) = offset + scale * (rng.uniform() - 0.5);
    m.node_ids.push_back({static_cast<std::uint32_t>(r / 64), static_cast<std::uint32_t>(r % 64)});
  }
  return m;
}

}  // namespace topogap::oracle
