#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "divcore/engine.hpp"

namespace divcore {

// Shortest decimal form that round-trips the exact double; deterministic, so
// byte-compares of emitted CSVs are meaningful.
std::string format_double(double value);

// Header: stream_id,point_id,timestamp,dim,v0..v{dim-1}.
void write_coreset_csv(std::ostream& out, std::span<const LabeledPoint> points);

// Header: stream_id,timestamp,incoming_id,accepted,evicted_id,min_core_edge,
// min_incoming_edge. Fill-phase admissions leave the eviction and minima
// fields empty.
void write_decisions_csv(std::ostream& out, std::span<const ReplacementDecision> decisions);

}  // namespace divcore
