#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "oracles.hpp"
#include "topogap/activation_io.hpp"
#include "topogap/error.hpp"

using namespace topogap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "topogap_test_activation_io";
  fs::create_directories(dir);
  return dir / name;
}

ActivationMatrix from_rows(std::vector<std::vector<double>> rows) {
  ActivationMatrix m;
  m.model_id = "m";
  m.values = Matrix(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m.values(r, c) = rows[r][c];
    m.node_ids.push_back({1, static_cast<std::uint32_t>(r)});
  }
  return m;
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("activation file round-trips a 3x4 matrix bit-exactly", "[activation_io]") {
  auto m = from_rows({{1, 2, 3, 4}, {0.1, -0.2, 1e-300, 5e300}, {0, 0, 0, 1}});
  m.input_labels = std::vector<std::uint32_t>{0, 1, 0, 7};
  const auto path = scratch("roundtrip.actv");
  write_activation_file(path, m);
  write_metadata(sidecar_path(path), {"m", 0.9, 0.8}, m.node_ids);

  const auto back = load_activation_file(path);
  CHECK(back.n_nodes() == 3);
  CHECK(back.n_inputs() == 4);
  CHECK(back == m);
}

TEST_CASE("round-trip holds for random matrices with and without labels", "[activation_io][property]") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = oracle::random_activations(1 + rng.below(6), 1 + rng.below(9), rng);
    if (trial % 2) {
      std::vector<std::uint32_t> labels(m.n_inputs());
      for (auto& l : labels) l = static_cast<std::uint32_t>(rng.below(4));
      m.input_labels = labels;
    }
    const auto path = scratch("prop.actv");
    fs::remove(sidecar_path(path));
    write_activation_file(path, m);
    auto back = load_activation_file(path);
    back.model_id = m.model_id;  // no sidecar: id defaults to the stem, node ids to (0, i)
    back.node_ids = m.node_ids;
    CHECK(back == m);
  }
}

TEST_CASE("loader rejects malformed and non-finite files", "[activation_io]") {
  const auto path = scratch("bad.actv");

  SECTION("NaN entry reports its position") {
    // The writer validates, so patch the payload by hand: entry (1, 2) of a 3x4 matrix.
    auto m = from_rows({{1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}});
    write_activation_file(path, m);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    f.seekp(25 + (1 * 4 + 2) * 8);
    f.write(reinterpret_cast<const char*>(&nan), 8);
    f.close();
    try {
      load_activation_file(path);
      FAIL("expected NonFiniteEntry");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonFiniteEntry);
      CHECK(std::string(e.what()).find("row 1, column 2") != std::string::npos);
    }
  }

  SECTION("zero nodes") {
    std::ofstream out(path, std::ios::binary);
    const char header[25] = {'A', 'C', 'T', 'V', 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 4, 0, 0, 0, 0, 0, 0, 0, 0};
    out.write(header, sizeof header);
    out.close();
    CHECK(kind_of([&] { load_activation_file(path); }) == ErrorKind::MalformedFile);
  }

  SECTION("bad magic, wrong version, truncation") {
    write_activation_file(path, from_rows({{1, 2}, {3, 4}}));
    std::string bytes;
    {
      std::ifstream in(path, std::ios::binary);
      bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    auto write_bytes = [&](const std::string& b) {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out.write(b.data(), static_cast<std::streamsize>(b.size()));
    };
    auto bad = bytes;
    bad[0] = 'X';
    write_bytes(bad);
    CHECK(kind_of([&] { load_activation_file(path); }) == ErrorKind::MalformedFile);
    bad = bytes;
    bad[4] = 2;
    write_bytes(bad);
    CHECK(kind_of([&] { load_activation_file(path); }) == ErrorKind::MalformedFile);
    write_bytes(bytes.substr(0, bytes.size() - 3));
    CHECK(kind_of([&] { load_activation_file(path); }) == ErrorKind::MalformedFile);
    write_bytes(bytes.substr(0, 10));
    CHECK(kind_of([&] { load_activation_file(path); }) == ErrorKind::MalformedFile);
  }
}

TEST_CASE("model records carry the generalization gap", "[activation_io]") {
  const auto path = scratch("rec.meta.json");
  write_metadata(path, {"net", 0.97, 0.81}, {{0, 0}});
  const auto r = load_model_record(path);
  CHECK(r.model_id == "net");
  REQUIRE(r.generalization_gap());
  CHECK(std::abs(*r.generalization_gap() - (0.97 - 0.81)) <= 1e-12);

  write_metadata(path, {"net", 0.97, std::nullopt}, {});
  CHECK_FALSE(load_model_record(path).generalization_gap());
}

TEST_CASE("filter_zero_variance keeps only varying rows", "[activation_io]") {
  const auto m = from_rows({{1, 1, 1}, {1, 2, 3}});
  const auto f = filter_zero_variance(m);
  REQUIRE(f.n_nodes() == 1);
  CHECK(f.values(0, 2) == 3.0);
  CHECK(f.node_ids[0] == NodeId{1, 1});

  const auto all_vary = from_rows({{1, 2, 3}, {3, 1, 2}});
  CHECK(filter_zero_variance(all_vary) == all_vary);
  CHECK(filter_zero_variance(filter_zero_variance(m)) == filter_zero_variance(m));

  CHECK(kind_of([] { filter_zero_variance(from_rows({{5, 5, 5}, {2, 2, 2}})); }) == ErrorKind::AllNodesConstant);
}

TEST_CASE("variance tolerance treats float-noise rows as constant", "[activation_io]") {
  const auto m = from_rows({{1.0, 1.0 + 1e-12, 1.0}, {0, 1, 0}});
  CHECK(filter_zero_variance(m).n_nodes() == 1);
}

TEST_CASE("subsample_inputs draws distinct columns reproducibly", "[activation_io]") {
  SplitMix64 rng(3);
  auto m = oracle::random_activations(4, 50, rng);
  m.input_labels = std::vector<std::uint32_t>(50);
  for (std::uint32_t c = 0; c < 50; ++c) (*m.input_labels)[c] = c;  // label = original column

  const auto a = subsample_inputs(m, 20, 99);
  const auto b = subsample_inputs(m, 20, 99);
  CHECK(a == b);
  CHECK(subsample_inputs(m, 20, 100) != a);

  const std::set<std::uint32_t> cols(a.input_labels->begin(), a.input_labels->end());
  CHECK(cols.size() == 20);
  for (std::size_t c = 0; c < 20; ++c)
    for (std::size_t r = 0; r < 4; ++r) CHECK(a.values(r, c) == m.values(r, (*a.input_labels)[c]));

  const auto full = subsample_inputs(m, 50, 5);
  CHECK(std::set<std::uint32_t>(full.input_labels->begin(), full.input_labels->end()).size() == 50);

  const auto one = subsample_inputs(m, 1, 5);
  CHECK(one.n_inputs() == 1);
  CHECK(one.values(0, 0) == m.values(0, (*one.input_labels)[0]));

  CHECK(kind_of([&] { subsample_inputs(m, 51, 1); }) == ErrorKind::SizeTooLarge);
}

TEST_CASE("restrict_to_label keeps the matching columns", "[activation_io]") {
  auto m = from_rows({{10, 11, 12, 13}});
  m.input_labels = std::vector<std::uint32_t>{0, 1, 0, 1};
  const auto r = restrict_to_label(m, 0);
  REQUIRE(r.n_inputs() == 2);
  CHECK(r.values(0, 0) == 10);
  CHECK(r.values(0, 1) == 12);

  auto same = m;
  same.input_labels = std::vector<std::uint32_t>{3, 3, 3, 3};
  CHECK(restrict_to_label(same, 3) == same);
  CHECK(kind_of([&] { restrict_to_label(m, 7); }) == ErrorKind::LabelAbsent);

  auto unlabeled = m;
  unlabeled.input_labels.reset();
  CHECK(kind_of([&] { restrict_to_label(unlabeled, 0); }) == ErrorKind::LabelAbsent);
}
