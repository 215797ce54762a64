#include "divcore/csvio.hpp"

#include <charconv>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace divcore {

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) {
    throw std::runtime_error("format_double: conversion failed");
  }
  return std::string(buffer, ptr);
}

void write_coreset_csv(std::ostream& out, std::span<const LabeledPoint> points) {
  out << "stream_id,point_id,timestamp,dim";
  if (!points.empty()) {
    for (std::size_t c = 0; c < points.front().vector.dim(); ++c) out << ",v" << c;
  }
  out << '\n';
  for (const LabeledPoint& p : points) {
    out << p.stream_id << ',' << p.point_id << ',' << p.timestamp << ',' << p.vector.dim();
    for (double c : p.vector.components()) out << ',' << format_double(c);
    out << '\n';
  }
}

void write_decisions_csv(std::ostream& out, std::span<const ReplacementDecision> decisions) {
  out << "stream_id,timestamp,incoming_id,accepted,evicted_id,min_core_edge,min_incoming_edge\n";
  for (const ReplacementDecision& d : decisions) {
    out << d.stream_id << ',' << d.timestamp << ',' << d.incoming_id << ','
        << (d.accepted ? '1' : '0') << ',';
    if (d.evicted_id) out << *d.evicted_id;
    out << ',';
    if (d.min_core_edge) out << format_double(*d.min_core_edge);
    out << ',';
    if (d.min_incoming_edge) out << format_double(*d.min_incoming_edge);
    out << '\n';
  }
}

}  // namespace divcore
