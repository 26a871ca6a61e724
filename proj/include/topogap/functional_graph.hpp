#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "topogap/activation_io.hpp"
#include "topogap/matrix.hpp"

namespace topogap {

enum class MetricMode { RawD, CorrectedDPrime };

/// Complete weighted graph on nodes; edge weight = dissimilarity in [0, 1].
struct FunctionalGraph {
  Matrix dissimilarity;
  std::vector<NodeId> node_ids;
  MetricMode metric_mode = MetricMode::RawD;

  std::size_t size() const noexcept { return dissimilarity.rows(); }
};

/// Importance-weighted distribution over nodes.
struct ImportanceDistribution {
  std::vector<double> probabilities;
  std::vector<std::uint64_t> scores;
};

/// d(i, j) = 1 - |pearson(row i, row j)|. OpenMP over rows; every entry is
/// computed independently, so the result does not depend on thread count.
FunctionalGraph correlation_distance_matrix(const ActivationMatrix& m);

/// gamma(t) = sqrt(1 - (1 - t)^2), the triangle-inequality-restoring transform.
double metric_correction(double d);

FunctionalGraph apply_metric_correction(const FunctionalGraph& g);

/// For each input column the node with the largest |activation| (lowest index
/// on ties) scores one point.
std::vector<std::uint64_t> importance_scores(const ActivationMatrix& m);

/// Inflated importance distribution: I_v / (n + 1) for scored nodes, the
/// remaining 1 / (n + 1) split evenly over unscored nodes. With no unscored
/// node the probabilities are renormalized to sum to one.
ImportanceDistribution importance_distribution(std::span<const std::uint64_t> scores, std::uint64_t n_inputs);

/// `size` distinct node indices drawn one at a time, each draw proportional to
/// the remaining probability mass. Returned in draw order.
std::vector<std::size_t> sample_nodes(const ImportanceDistribution& dist, std::size_t size, std::uint64_t seed);

/// Principal submatrix on `nodes`, in the order given.
FunctionalGraph subgraph(const FunctionalGraph& g, std::span<const std::size_t> nodes);

/// Lower-triangular distance CSV (row i holds d(i, 0..i-1)), as read by Ripser-style tools.
void write_lower_triangular_csv(const std::filesystem::path& path, const FunctionalGraph& g);

namespace reference {

// Single-threaded direct-formula kernels kept to cross-check the parallel paths.
FunctionalGraph correlation_distance_matrix(const ActivationMatrix& m);
std::vector<std::uint64_t> importance_scores(const ActivationMatrix& m);
FunctionalGraph apply_metric_correction(const FunctionalGraph& g);

}  // namespace reference

}  // namespace topogap
