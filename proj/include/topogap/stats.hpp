#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topogap/matrix.hpp"
#include "topogap/summaries.hpp"

namespace topogap {

struct BootstrappedSummary {
  std::string model_id;
  int combination_id = 0;
  DimensionMode dimension_mode = DimensionMode::H0;
  std::vector<double> values;
  std::size_t n_samples = 0;
  std::size_t n_resamples = 0;
};

inline constexpr std::size_t kDefaultResamples = 1000;
inline constexpr std::size_t kDefaultResampleSize = 20;

/// Mean over `n_resamples` resample means, each of `resample_size` vectors drawn
/// with replacement. Vectors are averaged as deviations from the first sample,
/// so identical inputs reproduce exactly.
BootstrappedSummary bootstrap_summary(std::span<const SummaryVector> samples, std::size_t n_resamples,
                                      std::size_t resample_size, std::uint64_t seed);

/// Least-squares coefficients (intercept first) of the minimum-norm solution.
std::vector<double> fit_linear(const Matrix& features, std::span<const double> targets);

std::vector<double> predict_linear(std::span<const double> coefficients, const Matrix& features);

/// 1 - SS_res / SS_tot. Negative when predictions are worse than the mean.
double r_squared(std::span<const double> actual, std::span<const double> predicted);

struct CvResult {
  int combination_id = 0;
  DimensionMode dimension_mode = DimensionMode::H0;
  /// Order: repetition 0 fold 0, repetition 0 fold 1, repetition 1 fold 0, ...
  std::vector<double> r2_scores;
  double mean_r2 = 0.0;
  double std_r2 = 0.0;
  /// Identify the partitions; paired tests require equal values.
  std::uint64_t partition_seed = 0;
  std::size_t n_models = 0;
};

inline constexpr int kCvRepetitions = 5;

/// Row split of one 2-fold repetition: first half gets ceil(n/2) models.
struct FoldSplit {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

std::vector<FoldSplit> five_by_two_partitions(std::size_t n_models, std::uint64_t seed);

/// Five shuffled 2-fold splits; fit on one half, score R^2 on the other, both ways.
CvResult five_by_two_cv(const Matrix& features, std::span<const double> targets, std::uint64_t seed);

struct PairedTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  bool degenerate = false;
};

/// Dietterich's 5x2cv paired t test on R^2 differences (a - b), 5 degrees of freedom.
PairedTestResult paired_5x2_test(const CvResult& a, const CvResult& b);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `dof` degrees of freedom.
double student_t_two_sided(double t, double dof);

}  // namespace topogap
