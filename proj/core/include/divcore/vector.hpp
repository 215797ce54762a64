#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace divcore {

// Dense embedding vector. Construction enforces the ingestion contract:
// at least one component, every component finite, Euclidean norm nonzero.
class Vector {
 public:
  explicit Vector(std::vector<double> components);
  Vector(std::initializer_list<double> components);

  std::size_t dim() const { return components_.size(); }
  double operator[](std::size_t i) const { return components_[i]; }
  std::span<const double> components() const { return components_; }

  friend bool operator==(const Vector& a, const Vector& b) = default;

 private:
  std::vector<double> components_;
};

// The only edge weight in this library. Accumulates in double precision and
// clamps the result to [-1, 1]. Defined out of line on purpose: one compiled
// instance means identical inputs give bit-identical results at every call
// site, which the matrix/scan equivalence tests rely on.
double cosine_similarity(const Vector& u, const Vector& v);

// 1 - cosine_similarity; in [0, 2], 0 iff the vectors are positive scalar
// multiples of each other.
double cosine_distance(const Vector& u, const Vector& v);

// Metric evaluations since process start or the last reset. Incremented on
// every cosine_similarity call; used for cost accounting in tests.
std::uint64_t metric_call_count();
void reset_metric_call_count();

}  // namespace divcore
