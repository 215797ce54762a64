#include "divcore/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

namespace divcore {

namespace {

constexpr double kEvictionTieEpsilon = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_dimension(const CoreSet& core, const LabeledPoint& incoming) {
  if (!core.members.empty() && incoming.vector.dim() != core.members.front().vector.dim()) {
    throw std::invalid_argument("process_point: dimension mismatch in stream " +
                                std::to_string(incoming.stream_id) + " at timestamp " +
                                std::to_string(incoming.timestamp) + " (expected " +
                                std::to_string(core.members.front().vector.dim()) + ", got " +
                                std::to_string(incoming.vector.dim()) + ")");
  }
}

void check_aux(const CoreSet& core, const TriangularDistanceMatrix& aux) {
  if (aux.k() != core.members.size()) {
    throw std::invalid_argument("process_point: matrix tracks " + std::to_string(aux.k()) +
                                " slots but the core-set has " +
                                std::to_string(core.members.size()) + " members");
  }
  const auto ids = aux.slot_ids();
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (core.members[t].point_id != ids[t]) {
      throw std::invalid_argument("process_point: matrix slot " + std::to_string(t) +
                                  " is bound to point " + std::to_string(ids[t]) +
                                  " but the core-set holds point " +
                                  std::to_string(core.members[t].point_id));
    }
  }
}

}  // namespace

double diversity(std::span<const LabeledPoint> points) {
  if (points.size() < 2) {
    throw std::invalid_argument("diversity: undefined for fewer than two points");
  }
  return closest_pair(points).distance;
}

ClosestPair closest_pair(std::span<const LabeledPoint> points) {
  if (points.size() < 2) {
    throw std::invalid_argument("closest_pair: at least two points required");
  }
  ClosestPair best{0, 1, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 1; i < points.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double d = cosine_distance(points[i].vector, points[j].vector);
      if (d < best.distance) {
        best = {j, i, d};
      }
    }
  }
  return best;
}

ReplacementDecision process_point(CoreSet& core, LabeledPoint incoming,
                                  TriangularDistanceMatrix* aux, std::mt19937_64& rng) {
  check_dimension(core, incoming);

  ReplacementDecision decision;
  decision.stream_id = incoming.stream_id;
  decision.timestamp = incoming.timestamp;
  decision.incoming_id = incoming.point_id;

  if (core.members.size() < core.capacity) {
    core.members.push_back(std::move(incoming));
    decision.accepted = true;
    return decision;
  }

  // Steady state: find the core-set's closest pair and the incoming point's
  // distances to every member.
  std::size_t pair_a = 0;
  std::size_t pair_b = 0;
  double min_core = 0.0;
  std::vector<double> column;
  if (aux != nullptr) {
    check_aux(core, *aux);
    const MinEntry me = aux->min_entry();
    pair_a = me.i;
    pair_b = me.j;
    min_core = me.distance;
    column = aux->column_distances(incoming, core.members);
  } else {
    const ClosestPair cp = closest_pair(core.members);
    pair_a = cp.first;
    pair_b = cp.second;
    min_core = cp.distance;
    column.reserve(core.members.size());
    for (const LabeledPoint& member : core.members) {
      column.push_back(cosine_distance(incoming.vector, member.vector));
    }
  }
  const double min_incoming = *std::min_element(column.begin(), column.end());

  decision.min_core_edge = min_core;
  decision.min_incoming_edge = min_incoming;
  if (!(min_incoming > min_core)) {
    return decision;  // rejected; equality does not replace
  }

  // Evict the closest-pair endpoint nearer to the incoming point.
  std::size_t victim;
  const double dist_a = column[pair_a];
  const double dist_b = column[pair_b];
  if (std::abs(dist_a - dist_b) <= kEvictionTieEpsilon) {
    decision.tie_broken = true;
    victim = (rng() & 1u) != 0 ? pair_a : pair_b;
  } else {
    victim = dist_a < dist_b ? pair_a : pair_b;
  }

  decision.accepted = true;
  decision.evicted_slot = victim;
  decision.evicted_id = core.members[victim].point_id;
  if (aux != nullptr) {
    aux->replace_slot(victim, incoming.point_id, column);
  }
  core.members[victim] = std::move(incoming);
  return decision;
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::size_t stream_id) {
  const auto sid = static_cast<std::uint64_t>(stream_id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sid), static_cast<std::uint32_t>(sid >> 32)};
  return std::mt19937_64(seq);
}

namespace {

// Shared per-element step for both drive modes. expected_dim is shared
// across workers so a cross-stream mismatch surfaces too.
struct StreamWorker {
  const EngineConfig* config;
  CoreSet* core;
  std::optional<TriangularDistanceMatrix>* matrix;
  std::optional<double>* build_seconds;
  std::atomic<std::size_t>* expected_dim;
  std::mt19937_64 rng;

  ReplacementDecision step(LabeledPoint point) {
    std::size_t want = expected_dim->load(std::memory_order_relaxed);
    if (want == 0) {
      if (expected_dim->compare_exchange_strong(want, point.vector.dim())) {
        want = point.vector.dim();
      }
    }
    if (point.vector.dim() != want) {
      throw std::invalid_argument("run: dimension mismatch in stream " +
                                  std::to_string(point.stream_id) + " at timestamp " +
                                  std::to_string(point.timestamp) + " (expected " +
                                  std::to_string(want) + ", got " +
                                  std::to_string(point.vector.dim()) + ")");
    }

    const bool steady = core->full();
    if (steady && config->algorithm == Algorithm::kKAdjacency && !matrix->has_value()) {
      const auto t0 = Clock::now();
      *matrix = TriangularDistanceMatrix::build(core->members, config->matrix_budget_bytes);
      *build_seconds = seconds_since(t0);
    }
    TriangularDistanceMatrix* aux = matrix->has_value() ? &**matrix : nullptr;

    if (config->collect_timing && steady) {
      const auto t0 = Clock::now();
      ReplacementDecision d = process_point(*core, std::move(point), aux, rng);
      const double elapsed = seconds_since(t0);
      if (d.accepted) {
        d.process_seconds = elapsed;
      }
      return d;
    }
    return process_point(*core, std::move(point), aux, rng);
  }
};

}  // namespace

RunResult run(std::vector<StreamSource> streams, const EngineConfig& config) {
  if (streams.empty()) {
    throw std::invalid_argument("run: at least one stream required");
  }
  if (config.k < 2) {
    throw std::invalid_argument("run: core-set capacity k must be at least 2");
  }
  const std::size_t n = streams.size();
  for (std::size_t s = 0; s < n; ++s) {
    if (streams[s].stream_id() != s) {
      throw std::invalid_argument("run: stream ids must be 0..n-1 in order");
    }
  }

  RunResult result;
  result.coresets.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    result.coresets.push_back(CoreSet{s, config.k, {}});
  }
  result.matrices.resize(n);
  result.matrix_build_seconds.resize(n);

  std::atomic<std::size_t> expected_dim{0};
  std::vector<StreamWorker> workers;
  workers.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    workers.push_back(StreamWorker{&config, &result.coresets[s], &result.matrices[s],
                                   &result.matrix_build_seconds[s], &expected_dim,
                                   stream_rng(config.rng_seed, s)});
  }

  if (!config.parallel) {
    Scheduler scheduler(std::move(streams));
    for (std::uint64_t tick = 0; !config.horizon || tick < *config.horizon; ++tick) {
      std::vector<LabeledPoint> round = scheduler.next_round();
      if (round.empty()) break;
      for (LabeledPoint& point : round) {
        const std::size_t s = point.stream_id;
        result.decisions.push_back(workers[s].step(std::move(point)));
      }
    }
    return result;
  }

  // Parallel drive: each worker owns its stream; timestamps are assigned as
  // local_index * n + stream_id, unique across streams with no coordination.
  std::vector<std::vector<ReplacementDecision>> per_stream(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    threads.emplace_back([&, s] {
      try {
        StreamSource& source = streams[s];
        for (std::uint64_t local = 0; !source.exhausted(); ++local) {
          if (config.horizon && local >= *config.horizon) break;
          const std::uint64_t ts = local * n + s;
          per_stream[s].push_back(workers[s].step(LabeledPoint{ts, s, ts, source.next()}));
        }
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Merge the per-stream logs by ascending timestamp (each is already
  // sorted; timestamps are unique across streams).
  std::vector<std::size_t> cursor(n, 0);
  while (true) {
    std::size_t best = n;
    for (std::size_t s = 0; s < n; ++s) {
      if (cursor[s] >= per_stream[s].size()) continue;
      if (best == n ||
          per_stream[s][cursor[s]].timestamp < per_stream[best][cursor[best]].timestamp) {
        best = s;
      }
    }
    if (best == n) break;
    result.decisions.push_back(std::move(per_stream[best][cursor[best]++]));
  }
  return result;
}

std::vector<LabeledPoint> compose(std::span<const CoreSet> coresets) {
  std::vector<LabeledPoint> all;
  std::size_t total = 0;
  for (const CoreSet& c : coresets) total += c.members.size();
  all.reserve(total);
  for (const CoreSet& c : coresets) {
    all.insert(all.end(), c.members.begin(), c.members.end());
  }
  return all;
}

}  // namespace divcore
