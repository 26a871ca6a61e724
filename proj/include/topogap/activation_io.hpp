#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "topogap/matrix.hpp"

namespace topogap {

/// Stable neuron identifier: layer index plus unit index within the layer.
struct NodeId {
  std::uint32_t layer = 0;
  std::uint32_t unit = 0;
  auto operator<=>(const NodeId&) const = default;
};

/// Activations of every node (rows) over a sample of inputs (columns).
struct ActivationMatrix {
  Matrix values;
  std::vector<NodeId> node_ids;
  std::optional<std::vector<std::uint32_t>> input_labels;
  std::string model_id;

  std::size_t n_nodes() const noexcept { return values.rows(); }
  std::size_t n_inputs() const noexcept { return values.cols(); }

  /// Throws DimensionMismatch or NonFiniteEntry when the invariants fail.
  void validate() const;

  bool operator==(const ActivationMatrix&) const = default;
};

/// Accuracy metadata of a trained network.
struct ModelRecord {
  std::string model_id;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;

  /// train - test; nullopt when the test accuracy is unknown.
  std::optional<double> generalization_gap() const {
    if (!test_accuracy) return std::nullopt;
    return train_accuracy - *test_accuracy;
  }
};

// Binary layout, little-endian:
//   "ACTV" | u32 version = 1 | u64 n_nodes | u64 n_inputs | u8 flags (bit0: labels)
//   | n_nodes * n_inputs binary64, row-major | [n_inputs u32 labels]
inline constexpr std::uint32_t kActivationFormatVersion = 1;

/// Reads `path` and, when present, the sidecar `<stem>.meta.json` for model_id and node_ids.
ActivationMatrix load_activation_file(const std::filesystem::path& path);

/// Writes the binary file only. The write goes through a temporary file and a rename.
void write_activation_file(const std::filesystem::path& path, const ActivationMatrix& m);

std::filesystem::path sidecar_path(const std::filesystem::path& activation_path);

ModelRecord load_model_record(const std::filesystem::path& meta_path);
void write_metadata(const std::filesystem::path& meta_path, const ModelRecord& record,
                    const std::vector<NodeId>& node_ids);

/// Population variance threshold under which a row counts as constant.
inline constexpr double kVarianceTolerance = 1e-18;

ActivationMatrix filter_zero_variance(const ActivationMatrix& m);

/// Uniform sample of `size` columns without replacement, kept in original column order.
ActivationMatrix subsample_inputs(const ActivationMatrix& m, std::size_t size, std::uint64_t seed);

ActivationMatrix restrict_to_label(const ActivationMatrix& m, std::uint32_t label);

/// Keeps the listed rows, in the listed order.
ActivationMatrix select_rows(const ActivationMatrix& m, const std::vector<std::size_t>& rows);

/// Keeps the listed columns, in the listed order.
ActivationMatrix select_columns(const ActivationMatrix& m, const std::vector<std::size_t>& cols);

}  // namespace topogap
