#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topogap/functional_graph.hpp"
#include "topogap/stats.hpp"
#include "topogap/summaries.hpp"

namespace topogap {

inline constexpr std::string_view kVersion = "0.1.0";

struct PipelineConfig {
  std::filesystem::path input_dir;
  std::filesystem::path out_dir = "out";
  std::size_t n_diagram_samples = 20;
  std::size_t n_nodes = 3000;
  std::size_t n_inputs = 2000;
  std::size_t n_resamples = kDefaultResamples;
  std::size_t resample_size = kDefaultResampleSize;
  std::uint64_t seed = 0;
  std::vector<int> combinations = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  std::vector<DimensionMode> dimension_modes = {kAllDimensionModes.begin(), kAllDimensionModes.end()};
  MetricMode metric_mode = MetricMode::RawD;
  std::optional<std::uint32_t> label_restrict;
  PointMap point_map = PointMap::T;
  std::size_t dim1_vertex_cap = kDefaultDim1VertexCap;
  std::size_t max_retries = 5;
  std::size_t density_grid_points = 512;

  /// Throws InvalidArgument naming the first bad field.
  void validate() const;
};

/// Overlays the keys present in `j` onto `base`.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});
nlohmann::json config_to_json(const PipelineConfig& c);
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

std::string_view to_string(MetricMode mode);
std::optional<MetricMode> parse_metric_mode(std::string_view text);

/// Outcome of a stage: models that were skipped and why.
struct StageStatus {
  std::vector<std::string> completed;
  std::vector<std::pair<std::string, std::string>> failed;  // (model, reason)
  std::size_t files_written = 0;
  std::size_t files_skipped = 0;

  bool partial() const { return !failed.empty(); }
};

/// Activation files (*.actv) under `dir`, sorted by file name.
std::vector<std::filesystem::path> list_activation_files(const std::filesystem::path& dir);

std::filesystem::path diagram_path(const std::filesystem::path& out_dir, std::string_view model_id,
                                   std::size_t sample, int dimension);

/// Samples k node subsets per model and stores their H0 and H1 diagrams under
/// out_dir/diagrams. Already persisted diagrams are kept as they are.
StageStatus run_diagrams(const PipelineConfig& config);

struct EvaluationReport {
  std::vector<std::string> models;
  std::vector<std::pair<std::string, std::string>> excluded;
  std::vector<CvResult> results;
  std::vector<std::string> result_labels;        // "<combination>:<mode>"
  std::vector<std::vector<double>> p_values;     // empty when fewer than 2 results
  std::uint64_t cv_seed = 0;
  PipelineConfig config;
  std::string timestamp;

  nlohmann::json to_json() const;
};

/// Summaries, bootstrap and 5x2 cross-validation over the diagram store.
/// Writes out_dir/summaries.csv and out_dir/report.json.
EvaluationReport run_evaluate(const PipelineConfig& config, StageStatus* status = nullptr);

/// Per-label diagrams and lifetime density curves under out_dir/densities.
StageStatus run_label_analysis(const PipelineConfig& config);

/// Evenly spaced grid covering every lifetime with five bandwidths of margin.
std::vector<double> density_grid(const PersistenceDiagram& d, std::size_t points);

}  // namespace topogap
