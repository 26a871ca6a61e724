#include "topogap/activation_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "topogap/error.hpp"
#include "topogap/random.hpp"

namespace topogap {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'A', 'C', 'T', 'V'};

template <typename UInt>
void put_le(std::vector<unsigned char>& out, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

template <typename UInt>
UInt get_le(const unsigned char* p) {
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(p[i]) << (8 * i);
  return v;
}

std::vector<unsigned char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void atomic_write(const fs::path& path, const void* data, std::size_t size) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

ActivationMatrix keep_rows_impl(const ActivationMatrix& m, const std::vector<std::size_t>& rows) {
  ActivationMatrix out;
  out.values = Matrix(rows.size(), m.n_inputs());
  out.node_ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::ranges::copy(m.values.row(rows[i]), out.values.row(i).begin());
    out.node_ids.push_back(m.node_ids[rows[i]]);
  }
  out.input_labels = m.input_labels;
  out.model_id = m.model_id;
  return out;
}

}  // namespace

void ActivationMatrix::validate() const {
  if (node_ids.size() != values.rows())
    throw Error(ErrorKind::DimensionMismatch, "node_ids size differs from row count");
  if (input_labels && input_labels->size() != values.cols())
    throw Error(ErrorKind::DimensionMismatch, "input_labels size differs from column count");
  for (std::size_t r = 0; r < values.rows(); ++r) {
    const auto row = values.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!std::isfinite(row[c]))
        throw Error(ErrorKind::NonFiniteEntry,
                    "row " + std::to_string(r) + ", column " + std::to_string(c));
    }
  }
}

fs::path sidecar_path(const fs::path& activation_path) {
  fs::path meta = activation_path;
  meta.replace_extension(".meta.json");
  return meta;
}

ActivationMatrix load_activation_file(const fs::path& path) {
  const auto bytes = read_all(path);
  constexpr std::size_t header = 4 + 4 + 8 + 8 + 1;
  if (bytes.size() < header || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(ErrorKind::MalformedFile, path.string() + ": bad magic or truncated header");
  const unsigned char* p = bytes.data() + 4;
  const auto version = get_le<std::uint32_t>(p);
  if (version != kActivationFormatVersion)
    throw Error(ErrorKind::MalformedFile, path.string() + ": unsupported version " + std::to_string(version));
  const auto n_nodes = get_le<std::uint64_t>(p + 4);
  const auto n_inputs = get_le<std::uint64_t>(p + 12);
  const auto flags = p[20];
  if (n_nodes == 0 || n_inputs == 0)
    throw Error(ErrorKind::MalformedFile, path.string() + ": empty payload");
  if (n_nodes > (bytes.size() - header) / 8 / n_inputs)
    throw Error(ErrorKind::MalformedFile, path.string() + ": truncated payload");
  const std::uint64_t cells = n_nodes * n_inputs;
  const std::uint64_t expected = header + cells * 8 + ((flags & 1) ? n_inputs * 4 : 0);
  if (bytes.size() != expected)
    throw Error(ErrorKind::MalformedFile, path.string() + ": size " + std::to_string(bytes.size()) +
                                              ", expected " + std::to_string(expected));

  ActivationMatrix m;
  std::vector<double> values(cells);
  const unsigned char* q = bytes.data() + header;
  for (std::uint64_t i = 0; i < cells; ++i, q += 8) values[i] = std::bit_cast<double>(get_le<std::uint64_t>(q));
  m.values = Matrix(n_nodes, n_inputs, std::move(values));
  if (flags & 1) {
    std::vector<std::uint32_t> labels(n_inputs);
    for (auto& l : labels) {
      l = get_le<std::uint32_t>(q);
      q += 4;
    }
    m.input_labels = std::move(labels);
  }

  m.model_id = path.stem().string();
  m.node_ids.resize(n_nodes);
  for (std::uint32_t i = 0; i < n_nodes; ++i) m.node_ids[i] = {0, i};
  if (const auto meta = sidecar_path(path); fs::exists(meta)) {
    std::ifstream in(meta);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::MalformedFile, meta.string() + ": invalid JSON");
    if (j.contains("model_id")) m.model_id = j.at("model_id").get<std::string>();
    if (j.contains("node_ids")) {
      const auto& ids = j.at("node_ids");
      if (ids.size() != n_nodes)
        throw Error(ErrorKind::MalformedFile, meta.string() + ": node_ids length differs from n_nodes");
      for (std::size_t i = 0; i < n_nodes; ++i)
        m.node_ids[i] = {ids[i].at(0).get<std::uint32_t>(), ids[i].at(1).get<std::uint32_t>()};
    }
  }
  m.validate();
  return m;
}

void write_activation_file(const fs::path& path, const ActivationMatrix& m) {
  m.validate();
  std::vector<unsigned char> out;
  out.reserve(25 + m.values.data().size() * 8 + m.n_inputs() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_le<std::uint32_t>(out, kActivationFormatVersion);
  put_le<std::uint64_t>(out, m.n_nodes());
  put_le<std::uint64_t>(out, m.n_inputs());
  out.push_back(m.input_labels ? 1 : 0);
  for (double v : m.values.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (m.input_labels)
    for (auto l : *m.input_labels) put_le<std::uint32_t>(out, l);
  atomic_write(path, out.data(), out.size());
}

ModelRecord load_model_record(const fs::path& meta_path) {
  std::ifstream in(meta_path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + meta_path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(ErrorKind::MalformedFile, meta_path.string() + ": invalid JSON");
  ModelRecord r;
  r.model_id = j.value("model_id", meta_path.stem().stem().string());
  r.train_accuracy = j.value("train_accuracy", 0.0);
  if (j.contains("test_accuracy") && !j.at("test_accuracy").is_null())
    r.test_accuracy = j.at("test_accuracy").get<double>();
  return r;
}

void write_metadata(const fs::path& meta_path, const ModelRecord& record,
                    const std::vector<NodeId>& node_ids) {
  nlohmann::json j;
  j["model_id"] = record.model_id;
  j["train_accuracy"] = record.train_accuracy;
  j["test_accuracy"] = record.test_accuracy ? nlohmann::json(*record.test_accuracy) : nlohmann::json(nullptr);
  auto& ids = j["node_ids"] = nlohmann::json::array();
  for (const auto& id : node_ids) ids.push_back({id.layer, id.unit});
  const std::string text = j.dump(1);
  atomic_write(meta_path, text.data(), text.size());
}

ActivationMatrix filter_zero_variance(const ActivationMatrix& m) {
  std::vector<std::size_t> keep;
  const double n = static_cast<double>(m.n_inputs());
  for (std::size_t r = 0; r < m.n_nodes(); ++r) {
    const auto row = m.values.row(r);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : row) ss += (v - mean) * (v - mean);
    if (ss / n > kVarianceTolerance) keep.push_back(r);
  }
  if (keep.empty()) throw Error(ErrorKind::AllNodesConstant, "no node of '" + m.model_id + "' varies");
  return keep_rows_impl(m, keep);
}

ActivationMatrix select_rows(const ActivationMatrix& m, const std::vector<std::size_t>& rows) {
  for (std::size_t r : rows)
    if (r >= m.n_nodes())
      throw Error(ErrorKind::IndexOutOfRange, "row " + std::to_string(r) + " of " + std::to_string(m.n_nodes()));
  return keep_rows_impl(m, rows);
}

ActivationMatrix select_columns(const ActivationMatrix& m, const std::vector<std::size_t>& cols) {
  ActivationMatrix out;
  out.values = Matrix(m.n_nodes(), cols.size());
  for (std::size_t r = 0; r < m.n_nodes(); ++r) {
    const auto src = m.values.row(r);
    auto dst = out.values.row(r);
    for (std::size_t c = 0; c < cols.size(); ++c) dst[c] = src[cols[c]];
  }
  if (m.input_labels) {
    std::vector<std::uint32_t> labels(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) labels[c] = (*m.input_labels)[cols[c]];
    out.input_labels = std::move(labels);
  }
  out.node_ids = m.node_ids;
  out.model_id = m.model_id;
  return out;
}

ActivationMatrix subsample_inputs(const ActivationMatrix& m, std::size_t size, std::uint64_t seed) {
  if (size == 0) throw Error(ErrorKind::InvalidArgument, "subsample size must be positive");
  if (size > m.n_inputs())
    throw Error(ErrorKind::SizeTooLarge, std::to_string(size) + " > " + std::to_string(m.n_inputs()) + " inputs");
  // Partial Fisher-Yates over column indices.
  std::vector<std::size_t> idx(m.n_inputs());
  std::iota(idx.begin(), idx.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  std::ranges::sort(idx);
  return select_columns(m, idx);
}

ActivationMatrix restrict_to_label(const ActivationMatrix& m, std::uint32_t label) {
  if (!m.input_labels) throw Error(ErrorKind::LabelAbsent, "'" + m.model_id + "' has no input labels");
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < m.input_labels->size(); ++c)
    if ((*m.input_labels)[c] == label) cols.push_back(c);
  if (cols.empty())
    throw Error(ErrorKind::LabelAbsent, "label " + std::to_string(label) + " absent from '" + m.model_id + "'");
  return select_columns(m, cols);
}

}  // namespace topogap
