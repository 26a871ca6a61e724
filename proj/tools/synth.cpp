// Writes a synthetic model zoo whose correlation structure tracks an assigned gap.
#include <iostream>

#include <CLI11.hpp>

#include "topogap/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic activation suite for topogap"};
  topogap::SyntheticSuiteOptions o;
  std::string out;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--models", o.n_models, "Number of models");
  app.add_option("--nodes", o.n_nodes, "Nodes per model");
  app.add_option("--inputs", o.n_inputs, "Inputs per model");
  app.add_option("--labels", o.n_labels, "Distinct input labels");
  app.add_option("--seed", o.seed, "Seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto records = topogap::write_synthetic_suite(out, o);
    std::cout << "wrote " << records.size() << " models to " << out << '\n';
  } catch (const std::exception& e) {
    std::cerr << "topogap_synth: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
