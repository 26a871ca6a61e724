#include "topogap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "topogap/error.hpp"
#include "topogap/random.hpp"

namespace topogap {

BootstrappedSummary bootstrap_summary(std::span<const SummaryVector> samples, std::size_t n_resamples,
                                      std::size_t resample_size, std::uint64_t seed) {
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "bootstrap needs at least one sample");
  if (n_resamples == 0 || resample_size == 0)
    throw Error(ErrorKind::InvalidArgument, "bootstrap resample counts must be positive");
  const std::size_t len = samples.front().values.size();
  for (const auto& s : samples)
    if (s.values.size() != len)
      throw Error(ErrorKind::LengthMismatch, "summary lengths " + std::to_string(s.values.size()) + " and " +
                                                 std::to_string(len) + " differ");

  const auto& ref = samples.front().values;
  std::vector<double> lo = ref, hi = ref;
  for (const auto& s : samples)
    for (std::size_t c = 0; c < len; ++c) {
      lo[c] = std::min(lo[c], s.values[c]);
      hi[c] = std::max(hi[c], s.values[c]);
    }

  SplitMix64 rng(seed);
  std::vector<double> outer(len, 0.0), inner(len);
  for (std::size_t r = 0; r < n_resamples; ++r) {
    std::ranges::fill(inner, 0.0);
    for (std::size_t k = 0; k < resample_size; ++k) {
      const auto& v = samples[rng.below(samples.size())].values;
      for (std::size_t c = 0; c < len; ++c) inner[c] += v[c] - ref[c];
    }
    for (std::size_t c = 0; c < len; ++c) outer[c] += inner[c] / static_cast<double>(resample_size);
  }

  BootstrappedSummary out;
  out.combination_id = samples.front().combination_id;
  out.dimension_mode = samples.front().dimension_mode;
  out.values.resize(len);
  // Rounding in ref + deviation can step one ulp past the envelope.
  for (std::size_t c = 0; c < len; ++c)
    out.values[c] = std::clamp(ref[c] + outer[c] / static_cast<double>(n_resamples), lo[c], hi[c]);
  out.n_samples = samples.size();
  out.n_resamples = n_resamples;
  return out;
}

std::vector<double> fit_linear(const Matrix& features, std::span<const double> targets) {
  const std::size_t n = features.rows();
  const std::size_t p = features.cols();
  if (targets.size() != n)
    throw Error(ErrorKind::DimensionMismatch, std::to_string(n) + " feature rows, " + std::to_string(targets.size()) + " targets");
  if (n < 2) throw Error(ErrorKind::TooFewModels, "linear fit needs at least 2 models");

  Eigen::MatrixXd design(n, p + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) design(i, j + 1) = features(i, j);
    y(i) = targets[i];
  }
  const Eigen::VectorXd beta = design.completeOrthogonalDecomposition().solve(y);
  return {beta.data(), beta.data() + beta.size()};
}

std::vector<double> predict_linear(std::span<const double> coefficients, const Matrix& features) {
  if (coefficients.size() != features.cols() + 1)
    throw Error(ErrorKind::DimensionMismatch, "coefficient count does not match feature count");
  std::vector<double> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    double y = coefficients[0];
    for (std::size_t j = 0; j < features.cols(); ++j) y += coefficients[j + 1] * features(i, j);
    out[i] = y;
  }
  return out;
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size())
    throw Error(ErrorKind::DimensionMismatch, "actual and predicted lengths differ");
  if (actual.size() < 2) throw Error(ErrorKind::InvalidArgument, "R^2 needs at least 2 values");
  const double mean = std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  if (ss_tot == 0.0) throw Error(ErrorKind::ZeroVarianceTarget, "actual values are all identical");
  return 1.0 - ss_res / ss_tot;
}

std::vector<FoldSplit> five_by_two_partitions(std::size_t n_models, std::uint64_t seed) {
  std::vector<FoldSplit> splits;
  for (int rep = 0; rep < kCvRepetitions; ++rep) {
    std::vector<std::size_t> order(n_models);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(derive_seed(seed, "5x2cv", static_cast<std::uint64_t>(rep)));
    for (std::size_t i = n_models; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const std::size_t half = (n_models + 1) / 2;
    FoldSplit split;
    split.first.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
    split.second.assign(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
    splits.push_back(std::move(split));
  }
  return splits;
}

namespace {

Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) std::ranges::copy(m.row(rows[i]), out.row(i).begin());
  return out;
}

std::vector<double> take(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

double train_and_score(const Matrix& x, std::span<const double> y, std::span<const std::size_t> train,
                       std::span<const std::size_t> test) {
  const auto coef = fit_linear(take_rows(x, train), take(y, train));
  return r_squared(take(y, test), predict_linear(coef, take_rows(x, test)));
}

}  // namespace

CvResult five_by_two_cv(const Matrix& features, std::span<const double> targets, std::uint64_t seed) {
  const std::size_t n = features.rows();
  if (targets.size() != n)
    throw Error(ErrorKind::DimensionMismatch, std::to_string(n) + " feature rows, " + std::to_string(targets.size()) + " targets");
  if (n < 4) throw Error(ErrorKind::TooFewModels, "5x2 cross-validation needs at least 4 models, got " + std::to_string(n));

  CvResult result;
  result.partition_seed = seed;
  result.n_models = n;
  for (const auto& split : five_by_two_partitions(n, seed)) {
    result.r2_scores.push_back(train_and_score(features, targets, split.first, split.second));
    result.r2_scores.push_back(train_and_score(features, targets, split.second, split.first));
  }
  const double m = std::accumulate(result.r2_scores.begin(), result.r2_scores.end(), 0.0) /
                   static_cast<double>(result.r2_scores.size());
  double ss = 0.0;
  for (double s : result.r2_scores) ss += (s - m) * (s - m);
  result.mean_r2 = m;
  result.std_r2 = std::sqrt(ss / static_cast<double>(result.r2_scores.size()));
  return result;
}

PairedTestResult paired_5x2_test(const CvResult& a, const CvResult& b) {
  constexpr std::size_t kScores = 2 * kCvRepetitions;
  if (a.r2_scores.size() != kScores || b.r2_scores.size() != kScores || a.partition_seed != b.partition_seed ||
      a.n_models != b.n_models)
    throw Error(ErrorKind::FoldMismatch, "results were not computed on the same 5x2 partitions");

  double variance_sum = 0.0;
  for (int i = 0; i < kCvRepetitions; ++i) {
    const double d1 = a.r2_scores[2 * i] - b.r2_scores[2 * i];
    const double d2 = a.r2_scores[2 * i + 1] - b.r2_scores[2 * i + 1];
    const double mean = 0.5 * (d1 + d2);
    variance_sum += (d1 - mean) * (d1 - mean) + (d2 - mean) * (d2 - mean);
  }
  const double numerator = a.r2_scores[0] - b.r2_scores[0];
  PairedTestResult out;
  if (variance_sum == 0.0) {
    out.degenerate = true;
    out.t_statistic = numerator == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), numerator);
    out.p_value = numerator == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.t_statistic = numerator / std::sqrt(variance_sum / kCvRepetitions);
  out.p_value = student_t_two_sided(out.t_statistic, kCvRepetitions);
  return out;
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast for x < (a + 1) / (a + b + 2); use symmetry otherwise.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

}  // namespace topogap
