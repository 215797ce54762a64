#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "divcore/engine.hpp"

namespace divcore {

enum class Phase { kMatrixBuild, kReplacement };

std::string_view phase_name(Phase phase);

struct TimingSample {
  std::size_t k;
  std::size_t stream_id;
  Phase phase;
  double seconds;  // wall clock, monotonic source
};

enum class FitBasis { kLinear, kQuadratic };

// Ordinary-least-squares fit over [1, k] or [1, k, k^2].
struct RegressionFit {
  FitBasis basis;
  std::vector<double> coefficients;  // ascending powers of k
  double r_squared;

  double predict(double k) const;
};

struct SubsetResult {
  std::vector<std::size_t> indices;  // ascending
  double diversity;
};

// Exhaustive max-min oracle: enumerates all C(n, k) subsets. Refuses n > 20;
// ties resolve to the lexicographically smallest index set.
SubsetResult exhaustive_max_min(std::span<const Vector> points, std::size_t k);

// Farthest-first greedy baseline: seeds with the farthest pair, then
// repeatedly adds the point maximizing its minimum distance to the chosen
// set. Tie-breaks favor the smallest index.
SubsetResult gmm_greedy(std::span<const Vector> points, std::size_t k);

// reference / achieved; >= 1 when the reference is the exhaustive optimum
// over the same point universe and subset size. achieved == 0 reports +inf
// (degenerate core-set: duplicates survived).
double alpha_ratio(double reference_diversity, double achieved_diversity);

// Fraction of steady-state decisions that were accepted; 0 when no
// steady-state decision exists.
double replacement_rate(std::span<const ReplacementDecision> decisions);

struct KRate {
  std::size_t k;
  double rate;
};

struct MeasureResult {
  std::vector<TimingSample> samples;
  std::vector<KRate> replacement_rates;
};

// Timing harness: for each k, partitions the dataset into n_streams,
// runs the k-adjacency engine single-threaded, and records one matrix_build
// sample per stream plus one replacement sample per accepted steady-state
// decision.
MeasureResult measure(const std::vector<Vector>& dataset, std::span<const std::size_t> k_values,
                      std::size_t n_streams, std::uint64_t rng_seed = 0);

// Aggregates samples of one phase into (k, mean seconds) pairs, ascending k.
std::vector<std::pair<double, double>> mean_by_k(std::span<const TimingSample> samples,
                                                 Phase phase);

// Requires at least as many distinct k values as basis coefficients.
RegressionFit fit(std::span<const std::pair<double, double>> points, FitBasis basis);

struct Extrapolation {
  double seconds;
  bool clamped;  // a negative fit prediction was clamped to zero
};

// build_fit(k) + replace_fraction * (n_elements_per_stream - k) * replace_fit(k).
Extrapolation extrapolate_total(double k, double n_elements_per_stream,
                                const RegressionFit& build_fit, const RegressionFit& replace_fit,
                                double replace_fraction = 0.9);

struct EvalReport {
  double composed_diversity = 0.0;
  double baseline_diversity = 0.0;
  double alpha = 0.0;
  double replacement_rate = 0.0;
};

struct FigRow {
  double x;
  std::optional<double> y_measured;
  std::optional<double> y_fit;
};

struct PhaseFits {
  std::optional<RegressionFit> linear;
  std::optional<RegressionFit> quadratic;

  // Higher R^2 wins; quadratic on exact ties.
  const RegressionFit* best() const;
};

struct ExtrapolationRow {
  std::size_t k;
  std::optional<double> predicted_total_s;
  double measured_replacement_rate;
};

void write_eval_csv(std::ostream& out, const EvalReport& report);
void write_report_csv(std::ostream& out, std::span<const TimingSample> samples);
void write_fits_csv(std::ostream& out, const PhaseFits& build, const PhaseFits& replacement);
void write_extrapolation_csv(std::ostream& out, std::span<const ExtrapolationRow> rows);
void write_fig_csv(std::ostream& out, std::span<const FigRow> rows);

// Self-contained polyline chart of measured points and the fitted curve.
void write_fig_svg(std::ostream& out, std::string_view title, std::string_view x_label,
                   std::string_view y_label, std::span<const FigRow> rows);

}  // namespace divcore
