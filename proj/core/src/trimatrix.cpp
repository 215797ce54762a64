#include "divcore/trimatrix.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "divcore/csvio.hpp"

namespace divcore {

std::size_t TriangularDistanceMatrix::flat_index(std::size_t i, std::size_t j) {
  if (i <= j) {
    throw std::invalid_argument("flat_index: requires i > j (diagonal and upper triangle are not stored), got (" +
                                std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  return i * (i - 1) / 2 + j;
}

std::pair<std::size_t, std::size_t> TriangularDistanceMatrix::unflatten(std::size_t flat) {
  std::size_t i = static_cast<std::size_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(flat))) / 2.0);
  while (i > 1 && i * (i - 1) / 2 > flat) --i;
  while ((i + 1) * i / 2 <= flat) ++i;
  return {i, flat - i * (i - 1) / 2};
}

TriangularDistanceMatrix::TriangularDistanceMatrix(std::size_t k, std::vector<double> entries,
                                                   std::vector<std::uint64_t> slot_ids)
    : k_(k), entries_(std::move(entries)), slot_ids_(std::move(slot_ids)) {}

TriangularDistanceMatrix TriangularDistanceMatrix::build(std::span<const LabeledPoint> points,
                                                         std::size_t budget_bytes) {
  if (points.size() < 2) {
    throw std::invalid_argument("TriangularDistanceMatrix::build: at least two points required");
  }
  const std::size_t k = points.size();
  const std::size_t n_entries = entry_count(k);
  if (n_entries > budget_bytes / sizeof(double)) {
    throw std::length_error("TriangularDistanceMatrix::build: " + std::to_string(n_entries) +
                            " entries (" + std::to_string(n_entries * sizeof(double)) +
                            " bytes) exceed the memory budget of " + std::to_string(budget_bytes) +
                            " bytes");
  }

  std::vector<std::uint64_t> ids;
  ids.reserve(k);
  std::unordered_set<std::uint64_t> seen;
  for (const LabeledPoint& p : points) {
    if (!seen.insert(p.point_id).second) {
      throw std::invalid_argument("TriangularDistanceMatrix::build: duplicate point id " +
                                  std::to_string(p.point_id));
    }
    ids.push_back(p.point_id);
  }

  std::vector<double> entries;
  entries.reserve(n_entries);
  for (std::size_t i = 1; i < k; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      entries.push_back(cosine_distance(points[i].vector, points[j].vector));
    }
  }
  return TriangularDistanceMatrix(k, std::move(entries), std::move(ids));
}

MinEntry TriangularDistanceMatrix::min_entry() const {
  std::size_t best = 0;
  double best_distance = entries_[0];
  for (std::size_t f = 1; f < entries_.size(); ++f) {
    if (entries_[f] < best_distance) {
      best = f;
      best_distance = entries_[f];
    }
  }
  const auto [i, j] = unflatten(best);
  return {i, j, best_distance};
}

std::vector<double> TriangularDistanceMatrix::column_distances(
    const LabeledPoint& p, std::span<const LabeledPoint> members) const {
  if (members.size() != k_) {
    throw std::invalid_argument("column_distances: expected " + std::to_string(k_) +
                                " members, got " + std::to_string(members.size()));
  }
  for (std::size_t t = 0; t < k_; ++t) {
    if (members[t].point_id != slot_ids_[t]) {
      throw std::invalid_argument("column_distances: member ids do not match matrix slots");
    }
    if (members[t].point_id == p.point_id) {
      throw std::invalid_argument("column_distances: point " + std::to_string(p.point_id) +
                                  " is already a member");
    }
  }
  std::vector<double> column;
  column.reserve(k_);
  for (std::size_t t = 0; t < k_; ++t) {
    column.push_back(cosine_distance(p.vector, members[t].vector));
  }
  return column;
}

void TriangularDistanceMatrix::replace_slot(std::size_t slot, std::uint64_t new_id,
                                            std::span<const double> new_column) {
  if (slot >= k_) {
    throw std::out_of_range("replace_slot: slot " + std::to_string(slot) + " out of range for k=" +
                            std::to_string(k_));
  }
  if (new_column.size() != k_) {
    throw std::invalid_argument("replace_slot: column length must equal k");
  }
  for (std::size_t t = 0; t < k_; ++t) {
    if (t != slot && slot_ids_[t] == new_id) {
      throw std::invalid_argument("replace_slot: id " + std::to_string(new_id) +
                                  " already bound to slot " + std::to_string(t));
    }
  }
  for (std::size_t t = 0; t < k_; ++t) {
    if (t == slot) continue;
    entries_[t > slot ? flat_index(t, slot) : flat_index(slot, t)] = new_column[t];
  }
  slot_ids_[slot] = new_id;
}

void TriangularDistanceMatrix::dump_csv(std::ostream& out) const {
  for (std::size_t f = 0; f < entries_.size(); ++f) {
    const auto [i, j] = unflatten(f);
    out << i << ',' << j << ',' << format_double(entries_[f]) << '\n';
  }
}

}  // namespace divcore
