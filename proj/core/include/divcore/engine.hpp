#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "divcore/point.hpp"
#include "divcore/streams.hpp"
#include "divcore/trimatrix.hpp"

namespace divcore {

enum class Algorithm { kBruteForce, kKAdjacency };

struct EngineConfig {
  std::size_t k = 2;
  // Logical tick budget; one tick offers one element from each live stream.
  // Absent = run until every stream is exhausted.
  std::optional<std::uint64_t> horizon;
  std::uint64_t rng_seed = 0;
  Algorithm algorithm = Algorithm::kKAdjacency;
  // One worker per stream, scheduler bypassed; timestamps become
  // local_index * n_streams + stream_id.
  bool parallel = false;
  // Record per-stream matrix build and per-acceptance replacement durations.
  bool collect_timing = false;
  std::size_t matrix_budget_bytes = TriangularDistanceMatrix::kDefaultBudgetBytes;
};

// Capacity-k member set for one stream; the unit of composition.
struct CoreSet {
  std::size_t stream_id = 0;
  std::size_t capacity = 0;
  std::vector<LabeledPoint> members;

  bool full() const { return members.size() >= capacity; }
};

// Audit record of one process_point call. Fill-phase admissions leave the
// minima unset; steady-state decisions satisfy
// accepted == (min_incoming_edge > min_core_edge).
struct ReplacementDecision {
  std::size_t stream_id = 0;
  std::uint64_t timestamp = 0;
  std::uint64_t incoming_id = 0;
  bool accepted = false;
  std::optional<std::size_t> evicted_slot;
  std::optional<std::uint64_t> evicted_id;
  std::optional<double> min_core_edge;      // smallest pairwise distance in the core-set
  std::optional<double> min_incoming_edge;  // smallest distance from incoming to any member
  bool tie_broken = false;
  std::optional<double> process_seconds;  // set for timed, accepted steady-state decisions

  bool steady_state() const { return min_core_edge.has_value(); }
};

struct ClosestPair {
  std::size_t first;  // first < second
  std::size_t second;
  double distance;
};

// Remote-edge objective: the minimum pairwise cosine distance. Undefined
// (throws) for fewer than two points.
double diversity(std::span<const LabeledPoint> points);

// Argmin pair realizing diversity(points). The scan follows the packed
// lower-triangle order, so ties resolve to the same pair as
// TriangularDistanceMatrix::min_entry on identical values.
ClosestPair closest_pair(std::span<const LabeledPoint> points);

// One replacement step. Fill phase appends unconditionally. At steady state,
// incoming is accepted iff its minimum distance to the members strictly
// exceeds the core-set's minimum pairwise distance; the evicted member is the
// endpoint of that closest pair nearer to incoming (seeded coin flip when the
// two distances agree within 1e-12). In k-adjacency mode aux backs the
// minimum lookups and is updated in place; pass nullptr for brute force.
ReplacementDecision process_point(CoreSet& core, LabeledPoint incoming,
                                  TriangularDistanceMatrix* aux, std::mt19937_64& rng);

struct RunResult {
  std::vector<CoreSet> coresets;
  std::vector<ReplacementDecision> decisions;
  // Per stream; engaged in k-adjacency mode once the stream reached steady
  // state.
  std::vector<std::optional<TriangularDistanceMatrix>> matrices;
  std::vector<std::optional<double>> matrix_build_seconds;
};

// Round-robin drive of every stream through process_point until the horizon
// or exhaustion. Streams must carry ids 0..n-1 in order.
RunResult run(std::vector<StreamSource> streams, const EngineConfig& config);

// Concatenated union of the per-stream core-sets; size k*n when all full.
std::vector<LabeledPoint> compose(std::span<const CoreSet> coresets);

// Tie-break generator for one stream, derived from the run seed. Streams draw
// independently so parallel and sequential runs decide identically.
std::mt19937_64 stream_rng(std::uint64_t seed, std::size_t stream_id);

}  // namespace divcore
