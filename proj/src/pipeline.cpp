#include "topogap/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "topogap/activation_io.hpp"
#include "topogap/error.hpp"
#include "topogap/persistence.hpp"
#include "topogap/random.hpp"

namespace topogap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream tags for derive_seed's first counter; node samples use the sample index.
constexpr std::uint64_t kInputStream = 0xffffffffULL;
constexpr std::uint64_t kLabelStream = 0xfffffffeULL;
constexpr std::uint64_t kLabelNodeStream = 0xfffffffdULL;

std::mutex log_mutex;

void log_line(const std::string& text) {
  std::lock_guard lock(log_mutex);
  std::cerr << "[topogap] " << text << '\n';
}

std::string safe_name(std::string_view id) {
  std::string out(id);
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct PreparedModel {
  ActivationMatrix activations;
  ImportanceDistribution importance;
};

PreparedModel prepare(ActivationMatrix m, const PipelineConfig& config, std::uint64_t input_seed) {
  const std::size_t size = std::min(config.n_inputs, m.n_inputs());
  m = subsample_inputs(m, size, input_seed);
  m = filter_zero_variance(m);
  auto dist = importance_distribution(importance_scores(m), m.n_inputs());
  return {std::move(m), std::move(dist)};
}

struct DiagramPair {
  PersistenceDiagram h0;
  PersistenceDiagram h1;
};

DiagramPair diagrams_for_nodes(const ActivationMatrix& m, const std::vector<std::size_t>& nodes,
                               const PipelineConfig& config) {
  FunctionalGraph g = correlation_distance_matrix(select_rows(m, nodes));
  if (config.metric_mode == MetricMode::CorrectedDPrime) g = apply_metric_correction(g);
  return {persistence_dim0(g), persistence_dim1(g, config.dim1_vertex_cap)};
}

// Draws a node sample and its diagrams; empty diagrams trigger a redraw with a fresh seed.
DiagramPair sample_diagrams(const PreparedModel& model, std::size_t sample, const PipelineConfig& config) {
  const auto& m = model.activations;
  const std::size_t size = std::min(config.n_nodes, m.n_nodes());
  DiagramPair result;
  for (std::size_t attempt = 0; attempt <= config.max_retries; ++attempt) {
    const auto nodes = sample_nodes(model.importance, size, derive_seed(config.seed, m.model_id, sample, attempt));
    result = diagrams_for_nodes(m, nodes, config);
    if ((!result.h0.empty() && !result.h1.empty()) || size == m.n_nodes()) break;
    log_line(m.model_id + " sample " + std::to_string(sample) + ": empty diagram, redrawing (attempt " +
             std::to_string(attempt + 1) + ")");
  }
  return result;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string result_label(int combination, DimensionMode mode) {
  return std::to_string(combination) + ":" + std::string(to_string(mode));
}

}  // namespace

std::string_view to_string(MetricMode mode) {
  return mode == MetricMode::RawD ? "raw_d" : "corrected_d_prime";
}

std::optional<MetricMode> parse_metric_mode(std::string_view text) {
  if (text == "raw_d") return MetricMode::RawD;
  if (text == "corrected_d_prime") return MetricMode::CorrectedDPrime;
  return std::nullopt;
}

void PipelineConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be at least 1");
  };
  positive(n_diagram_samples, "n_diagram_samples");
  positive(n_nodes, "n_nodes");
  positive(n_inputs, "n_inputs");
  positive(n_resamples, "n_resamples");
  positive(resample_size, "resample_size");
  positive(density_grid_points, "density_grid_points");
  if (combinations.empty()) throw Error(ErrorKind::InvalidArgument, "no combinations requested");
  for (int c : combinations)
    if (c < 1 || c > kCombinationCount)
      throw Error(ErrorKind::InvalidArgument, "combination " + std::to_string(c) + " outside 1..11");
  if (dimension_modes.empty()) throw Error(ErrorKind::InvalidArgument, "no dimension modes requested");
}

PipelineConfig config_from_json(const json& j, PipelineConfig c) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");
  if (j.contains("input_dir")) c.input_dir = j.at("input_dir").get<std::string>();
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("n_diagram_samples")) c.n_diagram_samples = j.at("n_diagram_samples").get<std::size_t>();
  if (j.contains("n_nodes")) c.n_nodes = j.at("n_nodes").get<std::size_t>();
  if (j.contains("n_inputs")) c.n_inputs = j.at("n_inputs").get<std::size_t>();
  if (j.contains("n_resamples")) c.n_resamples = j.at("n_resamples").get<std::size_t>();
  if (j.contains("resample_size")) c.resample_size = j.at("resample_size").get<std::size_t>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("combinations")) c.combinations = j.at("combinations").get<std::vector<int>>();
  if (j.contains("dimension_modes")) {
    c.dimension_modes.clear();
    for (const auto& m : j.at("dimension_modes")) {
      const auto mode = parse_dimension_mode(m.get<std::string>());
      if (!mode) throw Error(ErrorKind::InvalidArgument, "unknown dimension mode " + m.dump());
      c.dimension_modes.push_back(*mode);
    }
  }
  if (j.contains("metric_mode")) {
    const auto mode = parse_metric_mode(j.at("metric_mode").get<std::string>());
    if (!mode) throw Error(ErrorKind::InvalidArgument, "unknown metric mode " + j.at("metric_mode").dump());
    c.metric_mode = *mode;
  }
  if (j.contains("label_restrict")) {
    const auto& v = j.at("label_restrict");
    c.label_restrict = v.is_null() ? std::nullopt : std::optional<std::uint32_t>(v.get<std::uint32_t>());
  }
  if (j.contains("point_map")) {
    const auto name = j.at("point_map").get<std::string>();
    if (name == "T") c.point_map = PointMap::T;
    else if (name == "identity") c.point_map = PointMap::Identity;
    else throw Error(ErrorKind::InvalidArgument, "unknown point map " + name);
  }
  if (j.contains("dim1_vertex_cap")) c.dim1_vertex_cap = j.at("dim1_vertex_cap").get<std::size_t>();
  if (j.contains("max_retries")) c.max_retries = j.at("max_retries").get<std::size_t>();
  if (j.contains("density_grid_points")) c.density_grid_points = j.at("density_grid_points").get<std::size_t>();
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json modes = json::array();
  for (auto m : c.dimension_modes) modes.push_back(std::string(to_string(m)));
  return {
      {"input_dir", c.input_dir.string()},
      {"out_dir", c.out_dir.string()},
      {"n_diagram_samples", c.n_diagram_samples},
      {"n_nodes", c.n_nodes},
      {"n_inputs", c.n_inputs},
      {"n_resamples", c.n_resamples},
      {"resample_size", c.resample_size},
      {"seed", c.seed},
      {"combinations", c.combinations},
      {"dimension_modes", modes},
      {"metric_mode", std::string(to_string(c.metric_mode))},
      {"label_restrict", c.label_restrict ? json(*c.label_restrict) : json(nullptr)},
      {"point_map", c.point_map == PointMap::T ? "T" : "identity"},
      {"dim1_vertex_cap", c.dim1_vertex_cap},
      {"max_retries", c.max_retries},
      {"density_grid_points", c.density_grid_points},
  };
}

PipelineConfig load_config(const fs::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::MalformedFile, path.string() + ": invalid JSON");
  return config_from_json(j, std::move(base));
}

std::vector<fs::path> list_activation_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".actv") files.push_back(entry.path());
  std::ranges::sort(files);
  return files;
}

fs::path diagram_path(const fs::path& out_dir, std::string_view model_id, std::size_t sample, int dimension) {
  return out_dir / "diagrams" / safe_name(model_id) /
         ("sample_" + std::to_string(sample) + "_H" + std::to_string(dimension) + ".csv");
}

StageStatus run_diagrams(const PipelineConfig& config) {
  config.validate();
  StageStatus status;
  const auto files = list_activation_files(config.input_dir);
  if (files.empty()) throw Error(ErrorKind::Io, "no .actv files in " + config.input_dir.string());

  for (const auto& file : files) {
    std::string model_id = file.stem().string();
    try {
      ActivationMatrix m = load_activation_file(file);
      model_id = m.model_id;
      if (config.label_restrict) m = restrict_to_label(m, *config.label_restrict);

      std::vector<std::size_t> pending;
      for (std::size_t s = 0; s < config.n_diagram_samples; ++s) {
        if (fs::exists(diagram_path(config.out_dir, model_id, s, 0)) &&
            fs::exists(diagram_path(config.out_dir, model_id, s, 1)))
          status.files_skipped += 2;
        else
          pending.push_back(s);
      }
      if (pending.empty()) {
        status.completed.push_back(model_id);
        continue;
      }

      const PreparedModel model = prepare(std::move(m), config, derive_seed(config.seed, model_id, kInputStream));
      fs::create_directories(diagram_path(config.out_dir, model_id, 0, 0).parent_path());

      std::vector<std::string> errors(pending.size());
      std::vector<std::size_t> written(pending.size(), 0), kept(pending.size(), 0);
      const long long count = static_cast<long long>(pending.size());
#pragma omp parallel for schedule(dynamic, 1)
      for (long long i = 0; i < count; ++i) {
        const std::size_t s = pending[i];
        try {
          const DiagramPair d = sample_diagrams(model, s, config);
          for (const auto* diagram : {&d.h0, &d.h1}) {
            const auto path = diagram_path(config.out_dir, model_id, s, diagram->dimension);
            if (fs::exists(path)) {
              ++kept[i];
              continue;
            }
            write_diagram_csv(path, *diagram);
            ++written[i];
          }
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
      for (std::size_t i = 0; i < pending.size(); ++i) {
        status.files_written += written[i];
        status.files_skipped += kept[i];
        if (!errors[i].empty()) throw std::runtime_error("sample " + std::to_string(pending[i]) + ": " + errors[i]);
      }
      status.completed.push_back(model_id);
      log_line(model_id + ": diagrams done");
    } catch (const std::exception& e) {
      log_line(model_id + ": failed: " + e.what());
      status.failed.emplace_back(model_id, e.what());
    }
  }
  return status;
}

json EvaluationReport::to_json() const {
  json results_json = json::array();
  for (const auto& r : results)
    results_json.push_back({{"combination_id", r.combination_id},
                            {"dimension_mode", std::string(topogap::to_string(r.dimension_mode))},
                            {"r2_scores", r.r2_scores},
                            {"mean_r2", r.mean_r2},
                            {"std_r2", r.std_r2}});
  json excluded_json = json::array();
  for (const auto& [model, reason] : excluded) excluded_json.push_back({{"model_id", model}, {"reason", reason}});
  return {
      {"software", "topogap"},
      {"version", std::string(kVersion)},
      {"timestamp", timestamp},
      {"seeds", {{"seed", config.seed}, {"cv_seed", cv_seed}}},
      {"config", config_to_json(config)},
      {"point_map", config.point_map == PointMap::T ? "T" : "identity"},
      {"models", models},
      {"excluded_models", excluded_json},
      {"results", results_json},
      {"p_values", {{"labels", result_labels}, {"matrix", p_values}}},
  };
}

EvaluationReport run_evaluate(const PipelineConfig& config, StageStatus* status_out) {
  config.validate();
  StageStatus status;
  EvaluationReport report;
  report.config = config;
  report.timestamp = iso_timestamp();
  report.cv_seed = derive_seed(config.seed, "5x2cv", 0);

  struct Key {
    int combination;
    DimensionMode mode;
  };
  std::vector<Key> keys;
  for (int c : config.combinations)
    for (auto m : config.dimension_modes) keys.push_back({c, m});

  std::vector<fs::path> metas;
  for (const auto& entry : fs::directory_iterator(config.input_dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 10 && name.ends_with(".meta.json")) metas.push_back(entry.path());
  }
  std::ranges::sort(metas);

  struct ModelRow {
    std::string id;
    double gap;
    std::vector<std::vector<double>> features;  // per key
  };
  std::vector<ModelRow> rows;
  std::ostringstream csv;
  csv << "model_id,sample_index,combination_id,dimension_mode,component,value\n";

  for (const auto& meta : metas) {
    const ModelRecord record = load_model_record(meta);
    const auto& id = record.model_id;
    try {
      const auto gap = record.generalization_gap();
      if (!gap) throw Error(ErrorKind::MissingGapLabel, "no test_accuracy in " + meta.string());

      std::vector<DiagramPair> samples;
      for (std::size_t s = 0; s < config.n_diagram_samples; ++s) {
        const auto p0 = diagram_path(config.out_dir, id, s, 0);
        const auto p1 = diagram_path(config.out_dir, id, s, 1);
        if (!fs::exists(p0) || !fs::exists(p1))
          throw Error(ErrorKind::Io, "diagram sample " + std::to_string(s) + " missing from the store");
        samples.push_back({read_diagram_csv(p0, 0), read_diagram_csv(p1, 1)});
      }

      ModelRow row{id, *gap, {}};
      std::ostringstream model_csv;
      for (const auto& key : keys) {
        const std::string mode_name(to_string(key.mode));
        std::vector<SummaryVector> vectors;
        for (std::size_t s = 0; s < samples.size(); ++s) {
          try {
            vectors.push_back(build_combination(samples[s].h0, samples[s].h1, key.combination, key.mode, config.point_map));
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::EmptyDiagram && e.kind() != ErrorKind::ZeroTotalLife) throw;
            continue;
          }
          for (std::size_t c = 0; c < vectors.back().values.size(); ++c)
            model_csv << id << ',' << s << ',' << key.combination << ',' << mode_name << ',' << c << ','
                      << format_double(vectors.back().values[c]) << '\n';
        }
        if (vectors.empty())
          throw Error(ErrorKind::EmptyDiagram, "combination " + result_label(key.combination, key.mode) +
                                                   " undefined on every diagram sample");
        const auto boot = bootstrap_summary(
            vectors, config.n_resamples, config.resample_size,
            derive_seed(config.seed, id, static_cast<std::uint64_t>(key.combination),
                        static_cast<std::uint64_t>(key.mode)));
        for (std::size_t c = 0; c < boot.values.size(); ++c)
          model_csv << id << ",bootstrap," << key.combination << ',' << mode_name << ',' << c << ','
                    << format_double(boot.values[c]) << '\n';
        row.features.push_back(boot.values);
      }
      csv << model_csv.str();
      rows.push_back(std::move(row));
      status.completed.push_back(id);
    } catch (const std::exception& e) {
      log_line(id + ": excluded: " + e.what());
      status.failed.emplace_back(id, e.what());
      report.excluded.emplace_back(id, e.what());
    }
  }

  std::ranges::sort(rows, {}, &ModelRow::id);
  if (rows.size() < 4)
    throw Error(ErrorKind::TooFewModels, std::to_string(rows.size()) + " usable models; 5x2 CV needs at least 4");

  fs::create_directories(config.out_dir);
  write_text_atomic(config.out_dir / "summaries.csv", csv.str());

  std::vector<double> targets;
  for (const auto& r : rows) {
    report.models.push_back(r.id);
    targets.push_back(r.gap);
  }

  report.results.resize(keys.size());
  std::vector<std::string> errors(keys.size());
  const long long n_keys = static_cast<long long>(keys.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long long k = 0; k < n_keys; ++k) {
    try {
      const std::size_t width = rows.front().features[k].size();
      Matrix features(rows.size(), width);
      for (std::size_t i = 0; i < rows.size(); ++i) std::ranges::copy(rows[i].features[k], features.row(i).begin());
      CvResult r = five_by_two_cv(features, targets, report.cv_seed);
      r.combination_id = keys[k].combination;
      r.dimension_mode = keys[k].mode;
      report.results[k] = std::move(r);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (std::size_t k = 0; k < keys.size(); ++k)
    if (!errors[k].empty()) throw Error(ErrorKind::InvalidArgument, result_label(keys[k].combination, keys[k].mode) + ": " + errors[k]);

  for (const auto& key : keys) report.result_labels.push_back(result_label(key.combination, key.mode));
  if (keys.size() > 1) {
    report.p_values.assign(keys.size(), std::vector<double>(keys.size(), 1.0));
    for (std::size_t i = 0; i < keys.size(); ++i)
      for (std::size_t j = i + 1; j < keys.size(); ++j) {
        const double p = paired_5x2_test(report.results[i], report.results[j]).p_value;
        report.p_values[i][j] = p;
        report.p_values[j][i] = p;
      }
  }

  write_text_atomic(config.out_dir / "report.json", report.to_json().dump(2) + "\n");
  if (status_out) *status_out = std::move(status);
  return report;
}

std::vector<double> density_grid(const PersistenceDiagram& d, std::size_t points) {
  std::vector<double> lives;
  for (const auto& p : d.points) lives.push_back(p.lifetime());
  if (lives.empty()) throw Error(ErrorKind::EmptyDiagram, "density grid of an empty diagram");
  const double h = lifetime_bandwidth(lives);
  const double lo = *std::ranges::min_element(lives) - 5.0 * h;
  const double hi = *std::ranges::max_element(lives) + 5.0 * h;
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

StageStatus run_label_analysis(const PipelineConfig& config) {
  config.validate();
  StageStatus status;
  for (const auto& file : list_activation_files(config.input_dir)) {
    std::string model_id = file.stem().string();
    try {
      const ActivationMatrix m = load_activation_file(file);
      model_id = m.model_id;
      if (!m.input_labels) throw Error(ErrorKind::LabelAbsent, "activation file carries no input labels");
      const std::set<std::uint32_t> labels(m.input_labels->begin(), m.input_labels->end());
      const fs::path dir = config.out_dir / "densities" / safe_name(model_id);
      fs::create_directories(dir);

      for (const std::uint32_t label : labels) {
        const std::string tag = "label_" + std::to_string(label);
        ActivationMatrix restricted = restrict_to_label(m, label);
        if (restricted.n_inputs() < 2) {
          log_line(model_id + " " + tag + ": fewer than 2 inputs, skipped");
          continue;
        }
        PreparedModel prepared;
        try {
          prepared = prepare(std::move(restricted), config, derive_seed(config.seed, model_id, kLabelStream, label));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::AllNodesConstant) throw;
          log_line(model_id + " " + tag + ": " + e.what() + ", skipped");
          continue;
        }
        const std::size_t size = std::min(config.n_nodes, prepared.activations.n_nodes());
        const auto nodes = sample_nodes(prepared.importance, size, derive_seed(config.seed, model_id, kLabelNodeStream, label));
        const DiagramPair d = diagrams_for_nodes(prepared.activations, nodes, config);
        for (const auto* diagram : {&d.h0, &d.h1}) {
          const std::string stem = tag + "_H" + std::to_string(diagram->dimension);
          write_diagram_csv(dir / (stem + "_diagram.csv"), *diagram);
          ++status.files_written;
          if (diagram->empty()) {
            log_line(model_id + " " + stem + ": empty diagram, no density");
            continue;
          }
          const auto grid = density_grid(*diagram, config.density_grid_points);
          const auto density = lifetime_density(*diagram, grid);
          std::string text = "lifetime,density\n";
          for (std::size_t i = 0; i < grid.size(); ++i) text += format_double(grid[i]) + "," + format_double(density[i]) + "\n";
          write_text_atomic(dir / (stem + "_density.csv"), text);
          ++status.files_written;
        }
      }
      status.completed.push_back(model_id);
    } catch (const std::exception& e) {
      log_line(model_id + ": label analysis failed: " + e.what());
      status.failed.emplace_back(model_id, e.what());
    }
  }
  return status;
}

}  // namespace topogap
