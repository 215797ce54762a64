#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "divcore/point.hpp"

namespace divcore {

struct MinEntry {
  std::size_t i;  // row slot, i > j
  std::size_t j;
  double distance;
};

// Packed strict-lower-triangle store of the (k^2-k)/2 pairwise cosine
// distances of a k-point core-set. Pair (i, j) with k > i > j >= 0 lives at
// flat index i*(i-1)/2 + j. slot_ids map matrix slots back to point ids.
class TriangularDistanceMatrix {
 public:
  static constexpr std::size_t kDefaultBudgetBytes = std::size_t{2} << 30;

  static constexpr std::size_t entry_count(std::size_t k) { return k * (k - 1) / 2; }

  // Bijective onto [0, (k^2-k)/2); throws unless i > j.
  static std::size_t flat_index(std::size_t i, std::size_t j);
  static std::pair<std::size_t, std::size_t> unflatten(std::size_t flat);

  // All pairwise distances with exactly one metric evaluation per unordered
  // pair. Throws on fewer than two points, duplicate point ids, mismatched
  // dimensions, or a packed store larger than budget_bytes.
  static TriangularDistanceMatrix build(std::span<const LabeledPoint> points,
                                        std::size_t budget_bytes = kDefaultBudgetBytes);

  std::size_t k() const { return k_; }
  double at(std::size_t i, std::size_t j) const { return entries_[flat_index(i, j)]; }
  std::span<const double> entries() const { return entries_; }
  std::span<const std::uint64_t> slot_ids() const { return slot_ids_; }

  // Globally smallest stored distance; ties resolve to the smallest flat
  // index.
  MinEntry min_entry() const;

  // Distances from p to every member in slot order: exactly k metric
  // evaluations. members must align with slot_ids and must not contain p.
  std::vector<double> column_distances(const LabeledPoint& p,
                                       std::span<const LabeledPoint> members) const;

  // Rebind `slot` to new_id and overwrite its k-1 incident entries from
  // new_column (a column_distances result; new_column[slot] is discarded).
  void replace_slot(std::size_t slot, std::uint64_t new_id, std::span<const double> new_column);

  // Rows "i,j,distance" in flat order, no header.
  void dump_csv(std::ostream& out) const;

 private:
  TriangularDistanceMatrix(std::size_t k, std::vector<double> entries,
                           std::vector<std::uint64_t> slot_ids);

  std::size_t k_;
  std::vector<double> entries_;
  std::vector<std::uint64_t> slot_ids_;
};

}  // namespace divcore
