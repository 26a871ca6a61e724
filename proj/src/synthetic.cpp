#include "topogap/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "topogap/random.hpp"

namespace topogap {

class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = rng_.uniform();
    while (u1 <= 0.0) u1 = rng_.uniform();
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  SplitMix64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

ActivationMatrix synthetic_activations(const std::string& model_id, double distance, const SyntheticSuiteOptions& o,
                                       std::uint64_t seed) {
  GaussianSource normal(seed);
  const double noise = std::sqrt(distance / (1.0 - distance));
  std::vector<double> factor(o.n_inputs);
  for (double& f : factor) f = normal();

  ActivationMatrix m;
  m.model_id = model_id;
  m.values = Matrix(o.n_nodes, o.n_inputs);
  for (std::size_t v = 0; v < o.n_nodes; ++v) {
    m.node_ids.push_back({static_cast<std::uint32_t>(v / 100), static_cast<std::uint32_t>(v % 100)});
    auto row = m.values.row(v);
    for (std::size_t c = 0; c < o.n_inputs; ++c) row[c] = factor[c] + noise * normal();
  }
  std::vector<std::uint32_t> labels(o.n_inputs);
  for (std::size_t c = 0; c < o.n_inputs; ++c) labels[c] = static_cast<std::uint32_t>(c % o.n_labels);
  m.input_labels = std::move(labels);
  return m;
}

std::vector<ModelRecord> write_synthetic_suite(const std::filesystem::path& dir, const SyntheticSuiteOptions& o) {
  std::filesystem::create_directories(dir);
  SplitMix64 rng(derive_seed(o.seed, "synthetic-gaps", 0));
  std::vector<ModelRecord> records;
  for (std::size_t k = 0; k < o.n_models; ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "model_%03zu", k);
    const double gap = o.gap_min + (o.gap_max - o.gap_min) * rng.uniform();
    const double distance = o.base_distance + o.distance_slope * gap;
    const ActivationMatrix m = synthetic_activations(id, distance, o, derive_seed(o.seed, id, 1));

    ModelRecord record{id, o.train_accuracy, o.train_accuracy - gap};
    write_activation_file(dir / (std::string(id) + ".actv"), m);
    write_metadata(dir / (std::string(id) + ".meta.json"), record, m.node_ids);
    records.push_back(record);
  }
  return records;
}

}  // namespace topogap
