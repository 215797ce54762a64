#pragma once

#include <cstddef>
#include <cstdint>

#include "divcore/vector.hpp"

namespace divcore {

// One stream element: an embedding plus its identity, origin, and arrival
// order. point_id is unique across a run; the scheduler assigns
// point_id == timestamp.
struct LabeledPoint {
  std::uint64_t point_id;
  std::size_t stream_id;
  std::uint64_t timestamp;
  Vector vector;
};

}  // namespace divcore
