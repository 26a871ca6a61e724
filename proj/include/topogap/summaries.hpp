#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "topogap/persistence.hpp"

namespace topogap {

enum class DimensionMode { H0, H1, H0AndH1 };

std::string_view to_string(DimensionMode mode);
std::optional<DimensionMode> parse_dimension_mode(std::string_view text);

inline constexpr std::array<DimensionMode, 3> kAllDimensionModes = {DimensionMode::H0, DimensionMode::H1,
                                                                    DimensionMode::H0AndH1};
inline constexpr int kCombinationCount = 11;

struct SummaryVector {
  int combination_id = 0;
  DimensionMode dimension_mode = DimensionMode::H0;
  std::vector<double> values;
};

struct BirthDeathStats {
  double avg_birth, std_birth, avg_death, std_death;
};

struct LifeStats {
  double avg_life, avg_midlife;
};

/// Population mean and standard deviation of birth and death coordinates.
BirthDeathStats births_deaths_stats(const PersistenceDiagram& d);

LifeStats lives_midlives_stats(const PersistenceDiagram& d);

/// Shannon entropy (base 2) of the lifetime-weighted point distribution.
double persistence_entropy(const PersistenceDiagram& d);

inline constexpr std::size_t kPoolingSize = 10;
inline constexpr std::size_t kPolynomialCoefficients = 10;

/// The n largest lifetimes in descending order, zero-padded.
std::vector<double> pooling_vector(const PersistenceDiagram& d, std::size_t n = kPoolingSize);

enum class PointMap {
  /// (b, d) -> (d - b)/2 * ((cos a - sin a) + i (cos a + sin a)), a = |(b, d)|.
  T,
  /// (b, d) -> b + i d.
  Identity,
};

std::complex<double> map_point(const PersistencePair& p, PointMap map);

/// Non-leading coefficients of prod_k (x - z_k), highest degree first, as
/// interleaved (re, im), truncated or zero-padded to n coefficients.
std::vector<double> complex_polynomial_coeffs(const PersistenceDiagram& d, std::size_t n = kPolynomialCoefficients,
                                              PointMap map = PointMap::T);

/// Scott's-rule bandwidth of the lifetime sample; fallback for a degenerate sample.
double lifetime_bandwidth(std::span<const double> lifetimes);

/// Gaussian kernel density estimate of the lifetimes evaluated on `grid`.
std::vector<double> lifetime_density(const PersistenceDiagram& d, std::span<const double> grid);

/// Summary length of one homological dimension for a combination.
std::size_t combination_length(int combination_id);

/// Fixed-length vector of combination 1..11 over the requested dimension(s).
/// H0AndH1 concatenates the H0 vector and then the H1 vector.
SummaryVector build_combination(const PersistenceDiagram& d0, const PersistenceDiagram& d1, int combination_id,
                                DimensionMode mode, PointMap map = PointMap::T);

/// x -> 1/x + ln x with x clamped below at 1e-12.
double reciprocal_log_transform(double x);

}  // namespace topogap
