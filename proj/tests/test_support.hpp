#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "divcore/point.hpp"

namespace testsupport {

// Unit vector on the plane at the given angle from the x axis.
inline divcore::Vector unit2(double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  return divcore::Vector{std::cos(rad), std::sin(rad)};
}

inline divcore::LabeledPoint angle_point(std::uint64_t id, double degrees,
                                         std::size_t stream_id = 0) {
  return divcore::LabeledPoint{id, stream_id, id, unit2(degrees)};
}

// Independent oracle for distances between planar unit vectors: two unit
// vectors separated by `degrees` have cosine distance 1 - cos(angle).
inline double angle_distance(double degrees) {
  return 1.0 - std::cos(degrees * std::numbers::pi / 180.0);
}

inline divcore::Vector random_unit_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> c(dim);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (double& x : c) {
      x = gauss(rng);
      norm_sq += x * x;
    }
  } while (norm_sq == 0.0);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : c) x *= inv;
  return divcore::Vector(std::move(c));
}

inline std::vector<divcore::Vector> random_unit_dataset(std::size_t n, std::size_t dim,
                                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<divcore::Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_unit_vector(rng, dim));
  return out;
}

inline std::vector<divcore::LabeledPoint> random_points(std::size_t n, std::size_t dim,
                                                        std::uint64_t seed,
                                                        std::size_t stream_id = 0) {
  std::mt19937_64 rng(seed);
  std::vector<divcore::LabeledPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(divcore::LabeledPoint{i, stream_id, i, random_unit_vector(rng, dim)});
  }
  return out;
}

}  // namespace testsupport
