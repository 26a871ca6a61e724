// topogap: generalization-gap prediction from persistence summaries of
// activation-correlation graphs.
//
//   topogap diagrams --input zoo/ --out run/     sample nodes, store H0/H1 diagrams
//   topogap evaluate --input zoo/ --out run/     summaries, bootstrap, 5x2 CV report
//   topogap labels   --input zoo/ --out run/     per-label diagrams and lifetime densities
//   topogap all      --input zoo/ --out run/     diagrams then evaluate
//
// Exit status: 0 success, 1 hard error, 2 some models skipped.

#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "topogap/error.hpp"
#include "topogap/pipeline.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string input_dir;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> nodes, inputs, samples, resamples, resample_size;
  std::string combos, dims, metric;
  std::optional<std::uint32_t> label;
  int threads = 0;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

topogap::PipelineConfig build_config(const Overrides& o) {
  using topogap::Error;
  using topogap::ErrorKind;
  topogap::PipelineConfig c;
  if (!o.config_path.empty()) c = topogap::load_config(o.config_path, c);
  if (!o.input_dir.empty()) c.input_dir = o.input_dir;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (o.seed) c.seed = *o.seed;
  if (o.nodes) c.n_nodes = *o.nodes;
  if (o.inputs) c.n_inputs = *o.inputs;
  if (o.samples) c.n_diagram_samples = *o.samples;
  if (o.resamples) c.n_resamples = *o.resamples;
  if (o.resample_size) c.resample_size = *o.resample_size;
  if (o.label) c.label_restrict = *o.label;
  if (!o.combos.empty() && o.combos != "all") {
    c.combinations.clear();
    for (const auto& item : split_list(o.combos)) c.combinations.push_back(std::stoi(item));
  }
  if (!o.dims.empty() && o.dims != "all") {
    c.dimension_modes.clear();
    for (const auto& item : split_list(o.dims)) {
      const auto mode = topogap::parse_dimension_mode(item);
      if (!mode) throw Error(ErrorKind::InvalidArgument, "unknown dimension mode '" + item + "' (H0, H1, H0_and_H1)");
      c.dimension_modes.push_back(*mode);
    }
  }
  if (!o.metric.empty()) {
    const auto mode = topogap::parse_metric_mode(o.metric);
    if (!mode) throw Error(ErrorKind::InvalidArgument, "unknown metric '" + o.metric + "' (raw_d, corrected_d_prime)");
    c.metric_mode = *mode;
  }
  if (c.input_dir.empty()) throw Error(ErrorKind::InvalidArgument, "--input (or input_dir in the config) is required");
  c.validate();
  return c;
}

int exit_code(bool partial) { return partial ? 2 : 0; }

void print_report_summary(const topogap::EvaluationReport& report) {
  std::cout << report.models.size() << " models evaluated, " << report.excluded.size() << " excluded\n";
  for (const auto& r : report.results)
    std::cout << "  combination " << r.combination_id << " " << topogap::to_string(r.dimension_mode)
              << ": mean R^2 = " << r.mean_r2 << " +/- " << r.std_r2 << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predict generalization gaps from persistence summaries of neuron correlation graphs"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file; flags override its keys");
    sub->add_option("--input", o.input_dir, "Directory of <model>.actv and <model>.meta.json files");
    sub->add_option("--out", o.out_dir, "Output directory (diagrams/, summaries.csv, report.json, densities/)");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--nodes", o.nodes, "Nodes per diagram sample (default 3000)");
    sub->add_option("--inputs", o.inputs, "Input subsample size (default 2000)");
    sub->add_option("--samples", o.samples, "Diagram samples per model (default 20)");
    sub->add_option("--resamples", o.resamples, "Bootstrap resamples (default 1000)");
    sub->add_option("--resample-size", o.resample_size, "Bootstrap resample size (default 20)");
    sub->add_option("--combos", o.combos, "Comma-separated combination ids 1..11, or 'all'");
    sub->add_option("--dims", o.dims, "Comma-separated dimension modes H0,H1,H0_and_H1, or 'all'");
    sub->add_option("--metric", o.metric, "raw_d or corrected_d_prime");
    sub->add_option("--label", o.label, "Restrict inputs to one class label");
    sub->add_option("--threads", o.threads, "OpenMP threads (0 = runtime default)");
  };

  auto* diagrams = app.add_subcommand("diagrams", "Sample node subsets and store H0/H1 persistence diagrams");
  auto* evaluate = app.add_subcommand("evaluate", "Summaries, bootstrap, linear models and 5x2 CV report");
  auto* labels = app.add_subcommand("labels", "Per-label diagrams and lifetime density curves");
  auto* all = app.add_subcommand("all", "diagrams followed by evaluate");
  for (auto* sub : {diagrams, evaluate, labels, all}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = build_config(o);
    if (o.threads > 0) omp_set_num_threads(o.threads);

    if (*diagrams) {
      const auto status = topogap::run_diagrams(config);
      std::cout << status.completed.size() << " models done, " << status.failed.size() << " failed, "
                << status.files_written << " diagram files written, " << status.files_skipped << " already present\n";
      return exit_code(status.partial());
    }
    if (*evaluate) {
      topogap::StageStatus status;
      print_report_summary(topogap::run_evaluate(config, &status));
      return exit_code(status.partial());
    }
    if (*labels) {
      const auto status = topogap::run_label_analysis(config);
      std::cout << status.completed.size() << " models analysed, " << status.failed.size() << " failed, "
                << status.files_written << " files written\n";
      return exit_code(status.partial());
    }
    const auto diagram_status = topogap::run_diagrams(config);
    topogap::StageStatus eval_status;
    print_report_summary(topogap::run_evaluate(config, &eval_status));
    return exit_code(diagram_status.partial() || eval_status.partial());
  } catch (const std::exception& e) {
    std::cerr << "topogap: " << e.what() << '\n';
    return 1;
  }
}
