#include "topogap/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "topogap/error.hpp"

namespace topogap {

namespace {

void require_nonempty(const PersistenceDiagram& d, std::string_view what) {
  if (d.empty())
    throw Error(ErrorKind::EmptyDiagram, std::string(what) + " of an empty H" + std::to_string(d.dimension) + " diagram");
}

// Population mean and standard deviation.
std::pair<double, double> mean_std(const PersistenceDiagram& d, double (*coord)(const PersistencePair&)) {
  const double n = static_cast<double>(d.size());
  double mean = 0.0;
  for (const auto& p : d.points) mean += coord(p);
  mean /= n;
  double ss = 0.0;
  for (const auto& p : d.points) ss += (coord(p) - mean) * (coord(p) - mean);
  return {mean, std::sqrt(ss / n)};
}

std::vector<double> with_squares(std::vector<double> v) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) v.push_back(v[i] * v[i]);
  return v;
}

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<double> single_dimension(const PersistenceDiagram& d, int combination_id, PointMap map) {
  switch (combination_id) {
    case 1:
      return pooling_vector(d);
    case 2: {
      const auto s = lives_midlives_stats(d);
      return {s.avg_life, s.avg_midlife};
    }
    case 3:
      return with_squares(single_dimension(d, 2, map));
    case 4: {
      const auto s = births_deaths_stats(d);
      return {s.avg_birth, s.avg_death};
    }
    case 5:
      return with_squares(single_dimension(d, 4, map));
    case 6: {
      const auto s = births_deaths_stats(d);
      return {reciprocal_log_transform(s.avg_birth), reciprocal_log_transform(s.avg_death)};
    }
    case 7:
      return concat(single_dimension(d, 3, map), single_dimension(d, 5, map));
    case 8:
      return {persistence_entropy(d)};
    case 9: {
      const auto s = births_deaths_stats(d);
      return {s.avg_birth, s.std_birth, s.avg_death, s.std_death};
    }
    case 10:
      return with_squares(single_dimension(d, 9, map));
    case 11:
      return complex_polynomial_coeffs(d, kPolynomialCoefficients, map);
    default:
      throw Error(ErrorKind::InvalidArgument, "combination id " + std::to_string(combination_id) + " outside 1..11");
  }
}

}  // namespace

std::string_view to_string(DimensionMode mode) {
  switch (mode) {
    case DimensionMode::H0: return "H0";
    case DimensionMode::H1: return "H1";
    case DimensionMode::H0AndH1: return "H0_and_H1";
  }
  return "?";
}

std::optional<DimensionMode> parse_dimension_mode(std::string_view text) {
  for (auto mode : kAllDimensionModes)
    if (to_string(mode) == text) return mode;
  return std::nullopt;
}

BirthDeathStats births_deaths_stats(const PersistenceDiagram& d) {
  require_nonempty(d, "birth/death statistics");
  const auto [avg_b, std_b] = mean_std(d, [](const PersistencePair& p) { return p.birth; });
  const auto [avg_d, std_d] = mean_std(d, [](const PersistencePair& p) { return p.death; });
  return {avg_b, std_b, avg_d, std_d};
}

LifeStats lives_midlives_stats(const PersistenceDiagram& d) {
  require_nonempty(d, "life statistics");
  double life = 0.0, mid = 0.0;
  for (const auto& p : d.points) {
    life += p.lifetime();
    mid += p.midlife();
  }
  const double n = static_cast<double>(d.size());
  return {life / n, mid / n};
}

double persistence_entropy(const PersistenceDiagram& d) {
  require_nonempty(d, "entropy");
  double total = 0.0;
  for (const auto& p : d.points) total += p.lifetime();
  if (!(total > 0.0)) throw Error(ErrorKind::ZeroTotalLife, "every point lies on the diagonal");
  double h = 0.0;
  for (const auto& p : d.points) {
    const double w = p.lifetime() / total;
    if (w > 0.0) h -= w * std::log2(w);
  }
  return h;
}

std::vector<double> pooling_vector(const PersistenceDiagram& d, std::size_t n) {
  std::vector<double> lives;
  lives.reserve(d.size());
  for (const auto& p : d.points) lives.push_back(p.lifetime());
  const std::size_t keep = std::min(n, lives.size());
  std::ranges::partial_sort(lives, lives.begin() + static_cast<std::ptrdiff_t>(keep), std::greater<>{});
  lives.resize(keep);
  lives.resize(n, 0.0);
  return lives;
}

std::complex<double> map_point(const PersistencePair& p, PointMap map) {
  if (map == PointMap::Identity) return {p.birth, p.death};
  const double angle = std::hypot(p.birth, p.death);
  const double scale = 0.5 * (p.death - p.birth);
  return {scale * (std::cos(angle) - std::sin(angle)), scale * (std::cos(angle) + std::sin(angle))};
}

std::vector<double> complex_polynomial_coeffs(const PersistenceDiagram& d, std::size_t n, PointMap map) {
  // coeffs[k] multiplies x^(deg - k); coeffs[0] = 1 is the leading term.
  std::vector<std::complex<double>> coeffs{1.0};
  for (const auto& p : d.points) {
    const auto root = map_point(p, map);
    coeffs.push_back(0.0);
    for (std::size_t k = coeffs.size() - 1; k > 0; --k) coeffs[k] -= root * coeffs[k - 1];
  }
  std::vector<double> out(2 * n, 0.0);
  for (std::size_t k = 1; k < coeffs.size() && k <= n; ++k) {
    out[2 * (k - 1)] = coeffs[k].real();
    out[2 * (k - 1) + 1] = coeffs[k].imag();
  }
  return out;
}

double lifetime_bandwidth(std::span<const double> lifetimes) {
  const double n = static_cast<double>(lifetimes.size());
  double mean = 0.0;
  for (double l : lifetimes) mean += l;
  mean /= n;
  double sd = 0.0;
  if (lifetimes.size() > 1) {
    for (double l : lifetimes) sd += (l - mean) * (l - mean);
    sd = std::sqrt(sd / (n - 1.0));
  }
  const double scale = std::max(std::abs(mean), 1e-3);
  // Spread at rounding level (e.g. 0.4 - 0.1 vs 0.5 - 0.2) counts as degenerate.
  if (sd > 1e-9 * scale) return sd * std::pow(n, -0.2);
  return 0.1 * scale;
}

std::vector<double> lifetime_density(const PersistenceDiagram& d, std::span<const double> grid) {
  require_nonempty(d, "lifetime density");
  std::vector<double> lives;
  for (const auto& p : d.points) lives.push_back(p.lifetime());
  const double h = lifetime_bandwidth(lives);
  const double norm = 1.0 / (static_cast<double>(lives.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (double l : lives) {
      const double u = (grid[g] - l) / h;
      s += std::exp(-0.5 * u * u);
    }
    out[g] = s * norm;
  }
  return out;
}

std::size_t combination_length(int combination_id) {
  static constexpr std::array<std::size_t, 11> kLengths = {10, 2, 4, 2, 4, 2, 8, 1, 4, 8, 20};
  if (combination_id < 1 || combination_id > kCombinationCount)
    throw Error(ErrorKind::InvalidArgument, "combination id " + std::to_string(combination_id) + " outside 1..11");
  return kLengths[static_cast<std::size_t>(combination_id - 1)];
}

SummaryVector build_combination(const PersistenceDiagram& d0, const PersistenceDiagram& d1, int combination_id,
                                DimensionMode mode, PointMap map) {
  SummaryVector out{combination_id, mode, {}};
  switch (mode) {
    case DimensionMode::H0:
      out.values = single_dimension(d0, combination_id, map);
      break;
    case DimensionMode::H1:
      out.values = single_dimension(d1, combination_id, map);
      break;
    case DimensionMode::H0AndH1:
      out.values = concat(single_dimension(d0, combination_id, map), single_dimension(d1, combination_id, map));
      break;
  }
  return out;
}

double reciprocal_log_transform(double x) {
  const double c = std::max(x, 1e-12);
  return 1.0 / c + std::log(c);
}

}  // namespace topogap
