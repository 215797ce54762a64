#include "divcore/evalbench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "divcore/csvio.hpp"
#include "divcore/streams.hpp"

namespace divcore {

namespace {

double pair_distance(std::span<const Vector> points, std::size_t i, std::size_t j) {
  return cosine_distance(points[i], points[j]);
}

double subset_diversity(std::span<const Vector> points, std::span<const std::size_t> subset) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 1; a < subset.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      best = std::min(best, pair_distance(points, subset[a], subset[b]));
    }
  }
  return best;
}

}  // namespace

std::string_view phase_name(Phase phase) {
  return phase == Phase::kMatrixBuild ? "matrix_build" : "replacement";
}

double RegressionFit::predict(double k) const {
  double acc = 0.0;
  double power = 1.0;
  for (double c : coefficients) {
    acc += c * power;
    power *= k;
  }
  return acc;
}

SubsetResult exhaustive_max_min(std::span<const Vector> points, std::size_t k) {
  const std::size_t n = points.size();
  if (n > 20) {
    throw std::invalid_argument("exhaustive_max_min: refusing n=" + std::to_string(n) +
                                " (> 20 points); use gmm_greedy instead");
  }
  if (k < 2 || k > n) {
    throw std::invalid_argument("exhaustive_max_min: need 2 <= k <= n");
  }

  // Cache the n(n-1)/2 pairwise distances once.
  std::vector<double> cache(n * n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      cache[i * n + j] = cache[j * n + i] = pair_distance(points, i, j);
    }
  }

  std::vector<std::size_t> subset(k);
  for (std::size_t i = 0; i < k; ++i) subset[i] = i;

  SubsetResult best{{}, -1.0};
  while (true) {
    double div = std::numeric_limits<double>::infinity();
    for (std::size_t a = 1; a < k && div > best.diversity; ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        div = std::min(div, cache[subset[a] * n + subset[b]]);
      }
    }
    if (div > best.diversity) {
      best = {subset, div};
    }

    // Next combination in lexicographic order.
    std::size_t pos = k;
    while (pos > 0 && subset[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++subset[pos - 1];
    for (std::size_t i = pos; i < k; ++i) subset[i] = subset[i - 1] + 1;
  }
  return best;
}

SubsetResult gmm_greedy(std::span<const Vector> points, std::size_t k) {
  const std::size_t n = points.size();
  if (k < 2 || k > n) {
    throw std::invalid_argument("gmm_greedy: need 2 <= k <= n");
  }

  // Seed: the farthest pair, lexicographically first on ties. The scan is
  // quadratic, so rows are split across threads; the merge preserves the
  // lexicographic tie rule exactly.
  struct Candidate {
    std::size_t i = 0;
    std::size_t j = 1;
    double distance = -1.0;
  };
  const auto scan_rows = [&](std::size_t row_begin, std::size_t row_end) {
    Candidate best;
    for (std::size_t i = row_begin; i < row_end; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = pair_distance(points, i, j);
        if (d > best.distance) best = {i, j, d};
      }
    }
    return best;
  };
  const auto lex_before = [](const Candidate& a, const Candidate& b) {
    return a.i < b.i || (a.i == b.i && a.j < b.j);
  };

  Candidate seed;
  const std::size_t pairs = n * (n - 1) / 2;
  const std::size_t workers =
      pairs < 1u << 16 ? 1 : std::min<std::size_t>(std::thread::hardware_concurrency(), 16);
  if (workers <= 1) {
    seed = scan_rows(0, n);
  } else {
    std::vector<Candidate> results(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        // Interleaved rows balance the triangular workload.
        Candidate best;
        for (std::size_t i = w; i + 1 < n; i += workers) {
          const Candidate c = scan_rows(i, i + 1);
          if (c.distance > best.distance ||
              (c.distance == best.distance && lex_before(c, best))) {
            best = c;
          }
        }
        results[w] = best;
      });
    }
    for (std::thread& t : threads) t.join();
    for (const Candidate& c : results) {
      if (c.distance > seed.distance || (c.distance == seed.distance && lex_before(c, seed))) {
        seed = c;
      }
    }
  }
  const std::size_t seed_a = seed.i;
  const std::size_t seed_b = seed.j;

  std::vector<std::size_t> chosen{seed_a, seed_b};
  std::vector<bool> in_set(n, false);
  in_set[seed_a] = in_set[seed_b] = true;
  std::vector<double> min_dist(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (in_set[x]) continue;
    min_dist[x] = std::min(pair_distance(points, x, seed_a), pair_distance(points, x, seed_b));
  }

  while (chosen.size() < k) {
    std::size_t best = n;
    double best_score = -1.0;
    for (std::size_t x = 0; x < n; ++x) {
      if (in_set[x]) continue;
      if (min_dist[x] > best_score) {
        best = x;
        best_score = min_dist[x];
      }
    }
    chosen.push_back(best);
    in_set[best] = true;
    for (std::size_t x = 0; x < n; ++x) {
      if (in_set[x]) continue;
      min_dist[x] = std::min(min_dist[x], pair_distance(points, x, best));
    }
  }

  std::sort(chosen.begin(), chosen.end());
  return {chosen, subset_diversity(points, chosen)};
}

double alpha_ratio(double reference_diversity, double achieved_diversity) {
  if (achieved_diversity == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return reference_diversity / achieved_diversity;
}

double replacement_rate(std::span<const ReplacementDecision> decisions) {
  std::size_t steady = 0;
  std::size_t accepted = 0;
  for (const ReplacementDecision& d : decisions) {
    if (!d.steady_state()) continue;
    ++steady;
    if (d.accepted) ++accepted;
  }
  return steady == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(steady);
}

MeasureResult measure(const std::vector<Vector>& dataset, std::span<const std::size_t> k_values,
                      std::size_t n_streams, std::uint64_t rng_seed) {
  if (k_values.empty()) {
    throw std::invalid_argument("measure: k_values must not be empty");
  }
  MeasureResult out;
  for (const std::size_t k : k_values) {
    std::vector<StreamSource> streams = partition(dataset, n_streams);
    for (const StreamSource& s : streams) {
      if (k >= s.size()) {
        throw std::invalid_argument("measure: k=" + std::to_string(k) +
                                    " is not below the length of stream " +
                                    std::to_string(s.stream_id()) + " (" +
                                    std::to_string(s.size()) + ")");
      }
    }
    EngineConfig config;
    config.k = k;
    config.algorithm = Algorithm::kKAdjacency;
    config.collect_timing = true;
    config.rng_seed = rng_seed;
    const RunResult result = run(std::move(streams), config);

    for (std::size_t s = 0; s < result.matrix_build_seconds.size(); ++s) {
      if (result.matrix_build_seconds[s]) {
        out.samples.push_back(TimingSample{k, s, Phase::kMatrixBuild,
                                           *result.matrix_build_seconds[s]});
      }
    }
    for (const ReplacementDecision& d : result.decisions) {
      if (d.process_seconds) {
        out.samples.push_back(TimingSample{k, d.stream_id, Phase::kReplacement,
                                           *d.process_seconds});
      }
    }
    out.replacement_rates.push_back(KRate{k, replacement_rate(result.decisions)});
  }
  return out;
}

std::vector<std::pair<double, double>> mean_by_k(std::span<const TimingSample> samples,
                                                 Phase phase) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (const TimingSample& s : samples) {
    if (s.phase != phase) continue;
    auto& [sum, count] = acc[s.k];
    sum += s.seconds;
    ++count;
  }
  std::vector<std::pair<double, double>> means;
  means.reserve(acc.size());
  for (const auto& [k, sc] : acc) {
    means.emplace_back(static_cast<double>(k), sc.first / static_cast<double>(sc.second));
  }
  return means;
}

RegressionFit fit(std::span<const std::pair<double, double>> points, FitBasis basis) {
  const std::size_t m = basis == FitBasis::kLinear ? 2 : 3;
  std::vector<double> distinct;
  for (const auto& [x, y] : points) {
    if (std::find(distinct.begin(), distinct.end(), x) == distinct.end()) distinct.push_back(x);
  }
  if (distinct.size() < m) {
    throw std::invalid_argument("fit: need at least " + std::to_string(m) +
                                " distinct k values, got " + std::to_string(distinct.size()));
  }

  // Normal equations in long double, solved by Gaussian elimination with
  // partial pivoting.
  std::array<std::array<long double, 3>, 3> a{};
  std::array<long double, 3> b{};
  for (const auto& [x, y] : points) {
    long double powers[5] = {1.0L, x, static_cast<long double>(x) * x,
                             static_cast<long double>(x) * x * x,
                             static_cast<long double>(x) * x * x * x};
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) a[r][c] += powers[r + c];
      b[r] += static_cast<long double>(y) * powers[r];
    }
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(static_cast<double>(a[r][col])) > std::abs(static_cast<double>(a[pivot][col]))) {
        pivot = r;
      }
    }
    if (a[pivot][col] == 0.0L) {
      throw std::invalid_argument("fit: singular design matrix");
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const long double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < m; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> coefficients(m, 0.0);
  for (std::size_t r = m; r-- > 0;) {
    long double acc = b[r];
    for (std::size_t c = r + 1; c < m; ++c) acc -= a[r][c] * coefficients[c];
    coefficients[r] = static_cast<double>(acc / a[r][r]);
  }

  RegressionFit result{basis, std::move(coefficients), 0.0};
  double mean_y = 0.0;
  for (const auto& [x, y] : points) mean_y += y;
  mean_y /= static_cast<double>(points.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& [x, y] : points) {
    const double e = y - result.predict(x);
    ss_res += e * e;
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  result.r_squared = ss_tot == 0.0 ? (ss_res == 0.0 ? 1.0 : 0.0) : 1.0 - ss_res / ss_tot;
  result.r_squared = std::clamp(result.r_squared, 0.0, 1.0);
  return result;
}

Extrapolation extrapolate_total(double k, double n_elements_per_stream,
                                const RegressionFit& build_fit, const RegressionFit& replace_fit,
                                double replace_fraction) {
  if (replace_fraction < 0.0 || replace_fraction > 1.0) {
    throw std::invalid_argument("extrapolate_total: replace_fraction must be in [0, 1]");
  }
  bool clamped = false;
  double build = build_fit.predict(k);
  if (build < 0.0) {
    build = 0.0;
    clamped = true;
  }
  double replace = replace_fit.predict(k);
  if (replace < 0.0) {
    replace = 0.0;
    clamped = true;
  }
  const double remaining = std::max(0.0, n_elements_per_stream - k);
  return {build + replace_fraction * remaining * replace, clamped};
}

const RegressionFit* PhaseFits::best() const {
  if (linear && quadratic) {
    return quadratic->r_squared >= linear->r_squared ? &*quadratic : &*linear;
  }
  if (quadratic) return &*quadratic;
  if (linear) return &*linear;
  return nullptr;
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
  out << "composed_diversity,baseline_diversity,alpha,replacement_rate\n"
      << format_double(report.composed_diversity) << ',' << format_double(report.baseline_diversity)
      << ',' << format_double(report.alpha) << ',' << format_double(report.replacement_rate)
      << '\n';
}

void write_report_csv(std::ostream& out, std::span<const TimingSample> samples) {
  out << "k,stream_id,phase,duration_s\n";
  for (const TimingSample& s : samples) {
    out << s.k << ',' << s.stream_id << ',' << phase_name(s.phase) << ','
        << format_double(s.seconds) << '\n';
  }
}

namespace {

void write_fit_row(std::ostream& out, std::string_view phase, const RegressionFit& f) {
  out << phase << ',' << (f.basis == FitBasis::kLinear ? "linear" : "quadratic") << ','
      << format_double(f.coefficients[0]) << ',' << format_double(f.coefficients[1]) << ',';
  if (f.coefficients.size() > 2) out << format_double(f.coefficients[2]);
  out << ',' << format_double(f.r_squared) << '\n';
}

}  // namespace

void write_fits_csv(std::ostream& out, const PhaseFits& build, const PhaseFits& replacement) {
  out << "phase,basis,c0,c1,c2,r_squared\n";
  if (build.linear) write_fit_row(out, phase_name(Phase::kMatrixBuild), *build.linear);
  if (build.quadratic) write_fit_row(out, phase_name(Phase::kMatrixBuild), *build.quadratic);
  if (replacement.linear) write_fit_row(out, phase_name(Phase::kReplacement), *replacement.linear);
  if (replacement.quadratic) {
    write_fit_row(out, phase_name(Phase::kReplacement), *replacement.quadratic);
  }
}

void write_extrapolation_csv(std::ostream& out, std::span<const ExtrapolationRow> rows) {
  out << "k,predicted_total_s,measured_replacement_rate\n";
  for (const ExtrapolationRow& r : rows) {
    out << r.k << ',';
    if (r.predicted_total_s) out << format_double(*r.predicted_total_s);
    out << ',' << format_double(r.measured_replacement_rate) << '\n';
  }
}

void write_fig_csv(std::ostream& out, std::span<const FigRow> rows) {
  out << "x,y_measured,y_fit\n";
  for (const FigRow& r : rows) {
    out << format_double(r.x) << ',';
    if (r.y_measured) out << format_double(*r.y_measured);
    out << ',';
    if (r.y_fit) out << format_double(*r.y_fit);
    out << '\n';
  }
}

void write_fig_svg(std::ostream& out, std::string_view title, std::string_view x_label,
                   std::string_view y_label, std::span<const FigRow> rows) {
  constexpr double width = 640.0;
  constexpr double height = 400.0;
  constexpr double margin = 56.0;

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -std::numeric_limits<double>::infinity();
  double y_min = 0.0;
  double y_max = -std::numeric_limits<double>::infinity();
  for (const FigRow& r : rows) {
    x_min = std::min(x_min, r.x);
    x_max = std::max(x_max, r.x);
    if (r.y_measured) y_max = std::max(y_max, *r.y_measured);
    if (r.y_fit) y_max = std::max(y_max, *r.y_fit);
  }
  if (!std::isfinite(x_min) || !std::isfinite(y_max)) {
    x_min = 0.0;
    x_max = 1.0;
    y_max = 1.0;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;

  const auto sx = [&](double x) {
    return margin + (x - x_min) / (x_max - x_min) * (width - 2 * margin);
  };
  const auto sy = [&](double y) {
    return height - margin - (y - y_min) / (y_max - y_min) * (height - 2 * margin);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  out << "  <line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  out << "  <text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  out << "  <text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << height / 2 << ")\">" << y_label << "</text>\n";
  out << "  <text x=\"" << margin << "\" y=\"" << height - margin + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << format_double(x_min) << "</text>\n";
  out << "  <text x=\"" << width - margin << "\" y=\"" << height - margin + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << format_double(x_max) << "</text>\n";
  out << "  <text x=\"" << margin - 6 << "\" y=\"" << height - margin
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(y_min) << "</text>\n";
  out << "  <text x=\"" << margin - 6 << "\" y=\"" << margin + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(y_max) << "</text>\n";

  const auto polyline = [&](bool fitted, const char* color, const char* dash) {
    out << "  <polyline fill=\"none\" stroke=\"" << color << "\"";
    if (dash[0] != '\0') out << " stroke-dasharray=\"" << dash << "\"";
    out << " points=\"";
    for (const FigRow& r : rows) {
      const std::optional<double>& y = fitted ? r.y_fit : r.y_measured;
      if (!y) continue;
      out << sx(r.x) << ',' << sy(*y) << ' ';
    }
    out << "\"/>\n";
  };
  polyline(false, "#1f6fb2", "");
  polyline(true, "#c44e52", "6,4");
  for (const FigRow& r : rows) {
    if (!r.y_measured) continue;
    out << "  <circle cx=\"" << sx(r.x) << "\" cy=\"" << sy(*r.y_measured)
        << "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace divcore
