#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "divcore/point.hpp"

namespace divcore {

// Single-consumer view over one partition of a dataset. Elements are yielded
// exactly once, in stored order; the underlying dataset stays hidden from the
// algorithms.
class StreamSource {
 public:
  StreamSource(std::size_t stream_id, std::vector<Vector> elements);

  std::size_t stream_id() const { return stream_id_; }
  std::size_t size() const { return elements_.size(); }
  std::size_t cursor() const { return cursor_; }
  bool exhausted() const { return cursor_ >= elements_.size(); }

  // Throws when exhausted.
  const Vector& next();

 private:
  std::size_t stream_id_;
  std::vector<Vector> elements_;
  std::size_t cursor_ = 0;
};

// Round-robin scheduler. Issues the gap-free global timestamps 0, 1, 2, ...
// across all streams; point_id is assigned equal to the timestamp.
class Scheduler {
 public:
  explicit Scheduler(std::vector<StreamSource> streams);

  // One element from each non-exhausted stream, in ascending stream order.
  // An empty result means every stream is exhausted.
  std::vector<LabeledPoint> next_round();

  std::uint64_t next_timestamp() const { return next_timestamp_; }
  const std::vector<StreamSource>& streams() const { return streams_; }
  std::vector<StreamSource>& streams() { return streams_; }

 private:
  std::vector<StreamSource> streams_;
  std::uint64_t next_timestamp_ = 0;
};

// Rows of comma-separated decimal reals, one vector per row, no header unless
// skip_header. Errors name the offending 1-based row (and column).
std::vector<Vector> load_csv(const std::filesystem::path& path, bool skip_header = false);

// DIVCORE1 layout: 8-byte magic, u32-LE count, u32-LE dimension, then
// count*dimension IEEE-754 f32 LE values in row-major order. Values are
// widened to double on load.
std::vector<Vector> load_binary(const std::filesystem::path& path);
void write_binary(const std::filesystem::path& path, std::span<const Vector> vectors);

// Sniffs the DIVCORE1 magic and dispatches to load_binary or load_csv.
std::vector<Vector> load_vectors(const std::filesystem::path& path, bool skip_header = false);

// Contiguous blocks in original order; stream i gets floor(N/n) elements and
// the final stream absorbs the remainder.
std::vector<StreamSource> partition(std::vector<Vector> dataset, std::size_t n);

}  // namespace divcore
