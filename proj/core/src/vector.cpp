#include "divcore/vector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

namespace divcore {

namespace {
std::atomic<std::uint64_t> g_metric_calls{0};
}  // namespace

Vector::Vector(std::vector<double> components) : components_(std::move(components)) {
  if (components_.empty()) {
    throw std::invalid_argument("Vector: dimension must be at least 1");
  }
  double norm_sq = 0.0;
  for (double c : components_) {
    if (!std::isfinite(c)) {
      throw std::invalid_argument("Vector: component is not finite");
    }
    norm_sq += c * c;
  }
  if (norm_sq == 0.0) {
    throw std::invalid_argument("Vector: zero norm is not allowed");
  }
  if (!std::isfinite(norm_sq)) {
    throw std::invalid_argument("Vector: norm overflows double precision");
  }
}

Vector::Vector(std::initializer_list<double> components)
    : Vector(std::vector<double>(components)) {}

double cosine_similarity(const Vector& u, const Vector& v) {
  if (u.dim() != v.dim()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch (" +
                                std::to_string(u.dim()) + " vs " + std::to_string(v.dim()) + ")");
  }
  g_metric_calls.fetch_add(1, std::memory_order_relaxed);
  const std::span<const double> us = u.components();
  const std::span<const double> vs = v.components();
  double dot = 0.0;
  double norm_u = 0.0;
  double norm_v = 0.0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    dot += us[i] * vs[i];
    norm_u += us[i] * us[i];
    norm_v += vs[i] * vs[i];
  }
  const double sim = dot / (std::sqrt(norm_u) * std::sqrt(norm_v));
  return std::clamp(sim, -1.0, 1.0);
}

double cosine_distance(const Vector& u, const Vector& v) {
  return 1.0 - cosine_similarity(u, v);
}

std::uint64_t metric_call_count() { return g_metric_calls.load(std::memory_order_relaxed); }

void reset_metric_call_count() { g_metric_calls.store(0, std::memory_order_relaxed); }

}  // namespace divcore
