#include "topogap/functional_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "topogap/error.hpp"
#include "topogap/random.hpp"

namespace topogap {

namespace {

void check_correlation_input(const ActivationMatrix& m) {
  if (m.n_inputs() < 2)
    throw Error(ErrorKind::TooFewInputs, "correlation needs at least 2 inputs, got " + std::to_string(m.n_inputs()));
}

[[noreturn]] void zero_variance_row(std::size_t r) {
  throw Error(ErrorKind::ZeroVarianceRow, "row " + std::to_string(r) + " is constant");
}

FunctionalGraph empty_graph_like(const ActivationMatrix& m) {
  FunctionalGraph g;
  g.dissimilarity = Matrix(m.n_nodes(), m.n_nodes());
  g.node_ids = m.node_ids;
  g.metric_mode = MetricMode::RawD;
  return g;
}

double distance_from_correlation(double corr) { return 1.0 - std::min(std::abs(corr), 1.0); }

// Fenwick tree over nonnegative weights with prefix-sum descent.
class WeightTree {
 public:
  explicit WeightTree(std::span<const double> weights) : tree_(weights.size() + 1, 0.0), weights_(weights.begin(), weights.end()) {
    for (std::size_t i = 0; i < weights.size(); ++i) add(i, weights[i]);
  }

  void remove(std::size_t i) {
    add(i, -weights_[i]);
    weights_[i] = 0.0;
  }

  double total() const {
    double s = 0.0;
    for (std::size_t i = tree_.size() - 1; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  // First index whose cumulative weight exceeds `target`, skipping emptied slots
  // that rounding residue might otherwise select.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    std::size_t step = std::bit_floor(tree_.size() - 1);
    for (; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= target) {
        pos = next;
        target -= tree_[next];
      }
    }
    std::size_t idx = std::min(pos, weights_.size() - 1);
    if (weights_[idx] > 0.0) return idx;
    for (std::size_t k = 1; k < weights_.size(); ++k) {
      if (idx + k < weights_.size() && weights_[idx + k] > 0.0) return idx + k;
      if (idx >= k && weights_[idx - k] > 0.0) return idx - k;
    }
    return idx;
  }

 private:
  void add(std::size_t i, double delta) {
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  std::vector<double> tree_;
  std::vector<double> weights_;
};

}  // namespace

FunctionalGraph correlation_distance_matrix(const ActivationMatrix& m) {
  check_correlation_input(m);
  const std::size_t n = m.n_nodes();
  const std::size_t cols = m.n_inputs();

  // Rows centred and scaled to unit norm, so a dot product is a Pearson correlation.
  Matrix z(n, cols);
  const long long rows_signed = static_cast<long long>(n);
  bool constant_row = false;
  std::size_t bad_row = 0;
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < rows_signed; ++r) {
    const auto src = m.values.row(r);
    auto dst = z.row(r);
    double mean = 0.0;
    for (double v : src) mean += v;
    mean /= static_cast<double>(cols);
    double ss = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      dst[c] = src[c] - mean;
      ss += dst[c] * dst[c];
    }
    if (ss / static_cast<double>(cols) <= kVarianceTolerance) {
#pragma omp critical
      {
        if (!constant_row || static_cast<std::size_t>(r) < bad_row) bad_row = r;
        constant_row = true;
      }
      continue;
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (double& v : dst) v *= inv;
  }
  if (constant_row) zero_variance_row(bad_row);

  FunctionalGraph g = empty_graph_like(m);
  Matrix& d = g.dissimilarity;
#pragma omp parallel for schedule(dynamic, 8)
  for (long long i = 0; i < rows_signed; ++i) {
    const double* zi = z.row(i).data();
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
      const double* zj = z.row(j).data();
      double dot = 0.0;
#pragma omp simd reduction(+ : dot)
      for (std::size_t c = 0; c < cols; ++c) dot += zi[c] * zj[c];
      const double w = distance_from_correlation(dot);
      d(i, j) = w;
      d(j, i) = w;
    }
  }
  return g;
}

double metric_correction(double d) {
  const double s = 1.0 - d;
  return std::sqrt(std::max(0.0, 1.0 - s * s));
}

FunctionalGraph apply_metric_correction(const FunctionalGraph& g) {
  if (g.metric_mode == MetricMode::CorrectedDPrime)
    throw Error(ErrorKind::AlreadyCorrected, "graph already uses the corrected metric");
  FunctionalGraph out = g;
  auto data = out.dissimilarity.data();
  const long long count = static_cast<long long>(data.size());
#pragma omp parallel for simd schedule(static)
  for (long long k = 0; k < count; ++k) data[k] = metric_correction(data[k]);
  out.metric_mode = MetricMode::CorrectedDPrime;
  return out;
}

std::vector<std::uint64_t> importance_scores(const ActivationMatrix& m) {
  const std::size_t n = m.n_nodes();
  const std::size_t cols = m.n_inputs();
  std::vector<std::size_t> winner(cols, 0);
  if (n == 0) return {};

  // Column blocks keep the row-major reads contiguous; each block owns its winners.
  constexpr std::size_t kBlock = 256;
  const long long blocks = static_cast<long long>((cols + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(cols, lo + kBlock);
    std::vector<double> best(hi - lo);
    const auto first = m.values.row(0);
    for (std::size_t c = lo; c < hi; ++c) best[c - lo] = std::abs(first[c]);
    for (std::size_t r = 1; r < n; ++r) {
      const auto row = m.values.row(r);
      for (std::size_t c = lo; c < hi; ++c) {
        const double a = std::abs(row[c]);
        if (a > best[c - lo]) {
          best[c - lo] = a;
          winner[c] = r;
        }
      }
    }
  }

  std::vector<std::uint64_t> scores(n, 0);
  for (std::size_t w : winner) ++scores[w];
  return scores;
}

ImportanceDistribution importance_distribution(std::span<const std::uint64_t> scores, std::uint64_t n_inputs) {
  const std::uint64_t total = std::accumulate(scores.begin(), scores.end(), std::uint64_t{0});
  if (scores.empty() || n_inputs == 0 || total != n_inputs)
    throw Error(ErrorKind::InconsistentScores,
                "scores sum to " + std::to_string(total) + " but n_inputs = " + std::to_string(n_inputs));

  const auto unscored = static_cast<std::uint64_t>(std::ranges::count(scores, std::uint64_t{0}));
  const double denom = static_cast<double>(n_inputs) + 1.0;
  ImportanceDistribution dist;
  dist.scores.assign(scores.begin(), scores.end());
  dist.probabilities.resize(scores.size());
  for (std::size_t v = 0; v < scores.size(); ++v) {
    if (scores[v] > 0)
      dist.probabilities[v] = unscored > 0 ? static_cast<double>(scores[v]) / denom
                                           : static_cast<double>(scores[v]) / static_cast<double>(n_inputs);
    else
      dist.probabilities[v] = 1.0 / (denom * static_cast<double>(unscored));
  }
  return dist;
}

std::vector<std::size_t> sample_nodes(const ImportanceDistribution& dist, std::size_t size, std::uint64_t seed) {
  const std::size_t n = dist.probabilities.size();
  if (size == 0) throw Error(ErrorKind::InvalidArgument, "sample size must be positive");
  if (size > n)
    throw Error(ErrorKind::SizeTooLarge, std::to_string(size) + " > " + std::to_string(n) + " nodes");

  WeightTree tree(dist.probabilities);
  SplitMix64 rng(seed);
  std::vector<std::size_t> picked;
  picked.reserve(size);
  for (std::size_t k = 0; k < size; ++k) {
    const std::size_t v = tree.find(rng.uniform() * tree.total());
    picked.push_back(v);
    tree.remove(v);
  }
  return picked;
}

FunctionalGraph subgraph(const FunctionalGraph& g, std::span<const std::size_t> nodes) {
  for (std::size_t v : nodes)
    if (v >= g.size())
      throw Error(ErrorKind::IndexOutOfRange, "node " + std::to_string(v) + " of " + std::to_string(g.size()));
  FunctionalGraph out;
  out.dissimilarity = Matrix(nodes.size(), nodes.size());
  out.metric_mode = g.metric_mode;
  out.node_ids.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!g.node_ids.empty()) out.node_ids.push_back(g.node_ids[nodes[i]]);
    for (std::size_t j = 0; j < nodes.size(); ++j) out.dissimilarity(i, j) = g.dissimilarity(nodes[i], nodes[j]);
  }
  return out;
}

void write_lower_triangular_csv(const std::filesystem::path& path, const FunctionalGraph& g) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  char buf[32];
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", g.dissimilarity(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

namespace reference {

FunctionalGraph correlation_distance_matrix(const ActivationMatrix& m) {
  check_correlation_input(m);
  const std::size_t n = m.n_nodes();
  const double cols = static_cast<double>(m.n_inputs());
  std::vector<double> mean(n), var(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = m.values.row(r);
    mean[r] = std::accumulate(row.begin(), row.end(), 0.0) / cols;
    double ss = 0.0;
    for (double v : row) ss += (v - mean[r]) * (v - mean[r]);
    var[r] = ss / cols;
    if (var[r] <= kVarianceTolerance) zero_variance_row(r);
  }
  FunctionalGraph g = empty_graph_like(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto a = m.values.row(i);
      const auto b = m.values.row(j);
      double cov = 0.0;
      for (std::size_t c = 0; c < a.size(); ++c) cov += (a[c] - mean[i]) * (b[c] - mean[j]);
      cov /= cols;
      const double w = distance_from_correlation(cov / std::sqrt(var[i] * var[j]));
      g.dissimilarity(i, j) = w;
      g.dissimilarity(j, i) = w;
    }
  }
  return g;
}

std::vector<std::uint64_t> importance_scores(const ActivationMatrix& m) {
  std::vector<std::uint64_t> scores(m.n_nodes(), 0);
  if (m.n_nodes() == 0) return scores;
  for (std::size_t c = 0; c < m.n_inputs(); ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < m.n_nodes(); ++r)
      if (std::abs(m.values(r, c)) > std::abs(m.values(best, c))) best = r;
    ++scores[best];
  }
  return scores;
}

FunctionalGraph apply_metric_correction(const FunctionalGraph& g) {
  if (g.metric_mode == MetricMode::CorrectedDPrime)
    throw Error(ErrorKind::AlreadyCorrected, "graph already uses the corrected metric");
  FunctionalGraph out = g;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double t = g.dissimilarity(i, j);
      out.dissimilarity(i, j) = std::sqrt(t * (2.0 - t));
    }
  out.metric_mode = MetricMode::CorrectedDPrime;
  return out;
}

}  // namespace reference

}  // namespace topogap
