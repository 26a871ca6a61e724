#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "topogap/activation_io.hpp"

namespace topogap {

/// Synthetic model zoo with a planted relation between correlation structure
/// and generalization gap.
///
/// Every node of model m is the shared input factor plus independent noise,
/// x_v = f + s_m * e_v, so the population correlation distance between any two
/// nodes is s_m^2 / (1 + s_m^2). That distance is set to
/// base_distance + distance_slope * gap_m, making typical H0 deaths (MST edge
/// weights) move linearly with the gap.
struct SyntheticSuiteOptions {
  std::size_t n_models = 40;
  std::size_t n_nodes = 300;
  std::size_t n_inputs = 500;
  std::uint32_t n_labels = 10;
  double gap_min = 0.02;
  double gap_max = 0.40;
  double base_distance = 0.05;
  double distance_slope = 1.0;
  double train_accuracy = 0.98;
  std::uint64_t seed = 1;
};

ActivationMatrix synthetic_activations(const std::string& model_id, double distance, const SyntheticSuiteOptions& o,
                                       std::uint64_t seed);

/// Gaussian draws come from Box-Muller on SplitMix64, so suites reproduce exactly.
/// Writes `<id>.actv` and `<id>.meta.json` per model into `dir`; returns the records.
std::vector<ModelRecord> write_synthetic_suite(const std::filesystem::path& dir, const SyntheticSuiteOptions& o);

}  // namespace topogap
