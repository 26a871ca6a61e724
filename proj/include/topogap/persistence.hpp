#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "topogap/functional_graph.hpp"

namespace topogap {

struct PersistencePair {
  double birth = 0.0;
  double death = 0.0;

  double lifetime() const { return death - birth; }
  double midlife() const { return 0.5 * (birth + death); }
  auto operator<=>(const PersistencePair&) const = default;
};

/// Finite, positive-persistence points of one homological dimension.
/// Points are kept sorted by (birth, death).
struct PersistenceDiagram {
  int dimension = 0;
  std::vector<PersistencePair> points;
  std::size_t n_vertices = 0;

  bool empty() const noexcept { return points.empty(); }
  std::size_t size() const noexcept { return points.size(); }
  bool operator==(const PersistenceDiagram&) const = default;
};

inline constexpr std::size_t kDefaultDim1VertexCap = 3000;

/// H0 of the Vietoris-Rips filtration: one point (0, w) per positive edge weight
/// of a minimum spanning forest (Kruskal with union-find).
PersistenceDiagram persistence_dim0(const FunctionalGraph& g);

/// H1 of the Vietoris-Rips filtration over the 2-skeleton, F2 coefficients.
/// Reduces the coboundary matrix implicitly (edges as columns, triangles as
/// rows, enumerated on demand) with clearing of the H0 death edges.
PersistenceDiagram persistence_dim1(const FunctionalGraph& g, std::size_t vertex_cap = kDefaultDim1VertexCap);

inline constexpr std::size_t kBruteForceVertexCap = 10;

/// Enumerates every simplex up to dimension `dimension + 1`, orders them by
/// (diameter, dimension, lexicographic vertices) and reduces the dense F2
/// boundary matrix. Testing oracle; limited to 10 vertices.
PersistenceDiagram brute_force_persistence(const FunctionalGraph& g, int dimension);

/// Rows `dimension,birth,death` under that header, 17 significant digits.
void write_diagram_csv(const std::filesystem::path& path, const PersistenceDiagram& d);
/// Throws MalformedFile when a row's dimension differs from `dimension`.
PersistenceDiagram read_diagram_csv(const std::filesystem::path& path, int dimension);

}  // namespace topogap
