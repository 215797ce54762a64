// divcore: build, evaluate, and benchmark streaming diversity core-sets.
//
// Subcommands:
//   summarize  run the replacement engine over an input and write the
//              composed core-set plus the full decision log
//   bench      time matrix construction and replacements over a k grid,
//              fit the costs, and extrapolate total construction time
//   evaluate   compare the composed core-set against an offline baseline

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "divcore/csvio.hpp"
#include "divcore/engine.hpp"
#include "divcore/evalbench.hpp"
#include "divcore/streams.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso8601_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string() + " for digesting");
  }
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 init failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string join_argv(int argc, char** argv) {
  std::string line;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) line.push_back(' ');
    line += argv[i];
  }
  return line;
}

void write_text_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << contents;
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

void write_manifest(const fs::path& out_dir, json manifest) {
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

struct SummarizeOptions {
  std::string input;
  std::size_t k = 0;
  std::size_t streams = 5;
  std::string algorithm = "adjacency";
  std::optional<std::uint64_t> horizon;
  std::uint64_t seed = 0;
  std::string out;
  bool header = false;
  bool parallel = false;
  bool dump_matrix = false;
};

struct BenchOptions {
  std::string input;
  std::vector<std::size_t> k_list = {10, 50, 100, 500, 1000};
  std::size_t streams = 5;
  double replace_fraction = 0.9;
  std::string out;
  bool svg = false;
  bool header = false;
};

struct EvaluateOptions {
  std::string input;
  std::size_t k = 0;
  std::size_t streams = 5;
  std::string baseline = "greedy";
  std::uint64_t seed = 0;
  std::string out;
  bool header = false;
};

int run_summarize(const SummarizeOptions& opt, const std::string& command_line) {
  const std::string started = iso8601_now();
  const std::string digest = sha256_file(opt.input);
  std::vector<divcore::Vector> dataset = divcore::load_vectors(opt.input, opt.header);
  std::vector<divcore::StreamSource> streams = divcore::partition(std::move(dataset), opt.streams);

  divcore::EngineConfig config;
  config.k = opt.k;
  config.horizon = opt.horizon;
  config.rng_seed = opt.seed;
  config.parallel = opt.parallel;
  config.algorithm = opt.algorithm == "brute" ? divcore::Algorithm::kBruteForce
                                              : divcore::Algorithm::kKAdjacency;
  const divcore::RunResult result = divcore::run(std::move(streams), config);
  const std::vector<divcore::LabeledPoint> composed = divcore::compose(result.coresets);

  fs::create_directories(opt.out);
  const fs::path out_dir(opt.out);
  {
    std::ostringstream buf;
    divcore::write_coreset_csv(buf, composed);
    write_text_file(out_dir / "coreset.csv", buf.str());
  }
  {
    std::ostringstream buf;
    divcore::write_decisions_csv(buf, result.decisions);
    write_text_file(out_dir / "decisions.csv", buf.str());
  }
  if (opt.dump_matrix) {
    for (std::size_t s = 0; s < result.matrices.size(); ++s) {
      if (!result.matrices[s]) continue;
      std::ostringstream buf;
      result.matrices[s]->dump_csv(buf);
      write_text_file(out_dir / ("matrix_" + std::to_string(s) + ".csv"), buf.str());
    }
  }

  std::cout << "composed size: " << composed.size() << '\n';
  if (composed.size() >= 2) {
    std::cout << "composed diversity: " << divcore::format_double(divcore::diversity(composed))
              << '\n';
  } else {
    std::cout << "composed diversity: n/a (fewer than two points)\n";
  }

  json manifest{{"command", "summarize"},
                {"command_line", command_line},
                {"input", opt.input},
                {"input_sha256", digest},
                {"k", opt.k},
                {"streams", opt.streams},
                {"algorithm", opt.algorithm},
                {"seed", opt.seed},
                {"parallel", opt.parallel},
                {"csv_header", opt.header},
                {"out_dir", opt.out},
                {"coreset_csv", (out_dir / "coreset.csv").string()},
                {"decisions_csv", (out_dir / "decisions.csv").string()},
                {"started_at", started},
                {"finished_at", iso8601_now()}};
  manifest["horizon"] = opt.horizon ? json(*opt.horizon) : json(nullptr);
  write_manifest(out_dir, std::move(manifest));
  return 0;
}

divcore::PhaseFits make_fits(const std::vector<std::pair<double, double>>& points) {
  divcore::PhaseFits fits;
  if (points.size() >= 2) {
    fits.linear = divcore::fit(points, divcore::FitBasis::kLinear);
  }
  if (points.size() >= 3) {
    fits.quadratic = divcore::fit(points, divcore::FitBasis::kQuadratic);
  }
  return fits;
}

int run_bench(const BenchOptions& opt, const std::string& command_line) {
  const std::string started = iso8601_now();
  const std::string digest = sha256_file(opt.input);
  const std::vector<divcore::Vector> dataset = divcore::load_vectors(opt.input, opt.header);
  if (opt.k_list.empty()) {
    throw std::runtime_error("bench: --k-list must not be empty");
  }

  const divcore::MeasureResult measured = divcore::measure(dataset, opt.k_list, opt.streams);
  const auto build_points = divcore::mean_by_k(measured.samples, divcore::Phase::kMatrixBuild);
  const auto replace_points = divcore::mean_by_k(measured.samples, divcore::Phase::kReplacement);
  const divcore::PhaseFits build_fits = make_fits(build_points);
  const divcore::PhaseFits replace_fits = make_fits(replace_points);
  const divcore::RegressionFit* best_build = build_fits.best();
  const divcore::RegressionFit* best_replace = replace_fits.best();
  if (best_build == nullptr || best_replace == nullptr) {
    std::cerr << "warning: fewer than two distinct k values with samples; "
                 "fits and extrapolation are skipped\n";
  }

  fs::create_directories(opt.out);
  const fs::path out_dir(opt.out);
  {
    std::ostringstream buf;
    divcore::write_report_csv(buf, measured.samples);
    write_text_file(out_dir / "report.csv", buf.str());
  }
  {
    std::ostringstream buf;
    divcore::write_fits_csv(buf, build_fits, replace_fits);
    write_text_file(out_dir / "fits.csv", buf.str());
  }

  const double n_per_stream =
      static_cast<double>(dataset.size()) / static_cast<double>(opt.streams);
  std::vector<divcore::ExtrapolationRow> extrapolation;
  bool clamped = false;
  for (const divcore::KRate& kr : measured.replacement_rates) {
    divcore::ExtrapolationRow row{kr.k, std::nullopt, kr.rate};
    if (best_build != nullptr && best_replace != nullptr) {
      const divcore::Extrapolation e =
          divcore::extrapolate_total(static_cast<double>(kr.k), n_per_stream, *best_build,
                                     *best_replace, opt.replace_fraction);
      row.predicted_total_s = e.seconds;
      clamped = clamped || e.clamped;
    }
    extrapolation.push_back(row);
  }
  if (clamped) {
    std::cerr << "warning: a negative fit prediction was clamped to zero "
                 "(extrapolation artifact)\n";
  }
  {
    std::ostringstream buf;
    divcore::write_extrapolation_csv(buf, extrapolation);
    write_text_file(out_dir / "extrapolation.csv", buf.str());
  }

  // Figure data: measured means and the better-fitting basis per phase; the
  // total-time chart compares the measured replacement rate against the
  // assumed fraction.
  std::vector<divcore::FigRow> fig3a;
  for (const auto& [k, mean] : build_points) {
    fig3a.push_back({k, mean,
                     best_build != nullptr ? std::optional<double>(best_build->predict(k))
                                           : std::nullopt});
  }
  std::vector<divcore::FigRow> fig3b;
  for (const auto& [k, mean] : replace_points) {
    fig3b.push_back({k, mean,
                     best_replace != nullptr ? std::optional<double>(best_replace->predict(k))
                                             : std::nullopt});
  }
  std::vector<divcore::FigRow> fig3c;
  for (const divcore::KRate& kr : measured.replacement_rates) {
    divcore::FigRow row{static_cast<double>(kr.k), std::nullopt, std::nullopt};
    if (best_build != nullptr && best_replace != nullptr) {
      row.y_measured = divcore::extrapolate_total(row.x, n_per_stream, *best_build, *best_replace,
                                                  std::min(1.0, std::max(0.0, kr.rate)))
                           .seconds;
      row.y_fit = divcore::extrapolate_total(row.x, n_per_stream, *best_build, *best_replace,
                                             opt.replace_fraction)
                      .seconds;
    }
    fig3c.push_back(row);
  }

  const struct {
    const char* stem;
    const char* title;
    const char* y_label;
    const std::vector<divcore::FigRow>* rows;
  } figures[] = {
      {"fig3a", "Mean adjacency matrix construction time vs k", "seconds", &fig3a},
      {"fig3b", "Mean replacement time vs k", "seconds", &fig3b},
      {"fig3c", "Extrapolated total construction time vs k", "seconds", &fig3c},
  };
  for (const auto& fig : figures) {
    std::ostringstream buf;
    divcore::write_fig_csv(buf, *fig.rows);
    write_text_file(out_dir / (std::string(fig.stem) + ".csv"), buf.str());
    if (opt.svg) {
      std::ostringstream svg;
      divcore::write_fig_svg(svg, fig.title, "core-set size k", fig.y_label, *fig.rows);
      write_text_file(out_dir / (std::string(fig.stem) + ".svg"), svg.str());
    }
  }

  std::ostringstream klist;
  for (std::size_t i = 0; i < opt.k_list.size(); ++i) {
    if (i > 0) klist << ',';
    klist << opt.k_list[i];
  }
  json manifest{{"command", "bench"},
                {"command_line", command_line},
                {"input", opt.input},
                {"input_sha256", digest},
                {"k_list", klist.str()},
                {"streams", opt.streams},
                {"replace_fraction", opt.replace_fraction},
                {"csv_header", opt.header},
                {"svg", opt.svg},
                {"out_dir", opt.out},
                {"started_at", started},
                {"finished_at", iso8601_now()}};
  write_manifest(out_dir, std::move(manifest));
  return 0;
}

int run_evaluate(const EvaluateOptions& opt, const std::string& command_line) {
  const std::string started = iso8601_now();
  const std::string digest = sha256_file(opt.input);
  const std::vector<divcore::Vector> dataset = divcore::load_vectors(opt.input, opt.header);

  divcore::EngineConfig config;
  config.k = opt.k;
  config.rng_seed = opt.seed;
  config.algorithm = divcore::Algorithm::kKAdjacency;
  const divcore::RunResult result = divcore::run(divcore::partition(dataset, opt.streams), config);
  const std::vector<divcore::LabeledPoint> composed = divcore::compose(result.coresets);
  const double composed_diversity = divcore::diversity(composed);

  const std::size_t m = composed.size();
  divcore::SubsetResult baseline;
  if (opt.baseline == "exhaustive") {
    if (dataset.size() > 20) {
      std::cerr << "error: --baseline exhaustive requires a pooled dataset of at most 20 points "
                << "(got " << dataset.size() << "); use --baseline greedy\n";
      return 1;
    }
    baseline = divcore::exhaustive_max_min(dataset, m);
  } else {
    baseline = divcore::gmm_greedy(dataset, m);
  }

  divcore::EvalReport report;
  report.composed_diversity = composed_diversity;
  report.baseline_diversity = baseline.diversity;
  report.alpha = divcore::alpha_ratio(baseline.diversity, composed_diversity);
  report.replacement_rate = divcore::replacement_rate(result.decisions);
  if (std::isinf(report.alpha)) {
    std::cerr << "warning: degenerate core-set (diversity 0: duplicates survived); "
                 "alpha is infinite\n";
  }

  fs::create_directories(opt.out);
  const fs::path out_dir(opt.out);
  {
    std::ostringstream buf;
    divcore::write_eval_csv(buf, report);
    write_text_file(out_dir / "eval.csv", buf.str());
  }

  std::cout << "composed diversity: " << divcore::format_double(report.composed_diversity) << '\n'
            << "baseline diversity: " << divcore::format_double(report.baseline_diversity) << " ("
            << opt.baseline << ", size " << m << ")\n"
            << "alpha: " << divcore::format_double(report.alpha) << '\n'
            << "replacement rate: " << divcore::format_double(report.replacement_rate) << '\n';

  json manifest{{"command", "evaluate"},
                {"command_line", command_line},
                {"input", opt.input},
                {"input_sha256", digest},
                {"k", opt.k},
                {"streams", opt.streams},
                {"baseline", opt.baseline},
                {"seed", opt.seed},
                {"csv_header", opt.header},
                {"out_dir", opt.out},
                {"eval_csv", (out_dir / "eval.csv").string()},
                {"started_at", started},
                {"finished_at", iso8601_now()}};
  write_manifest(out_dir, std::move(manifest));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"divcore: streaming diversity core-set engine"};
  app.require_subcommand(1);

  SummarizeOptions sum;
  CLI::App* sum_cmd = app.add_subcommand("summarize", "Run the replacement engine and write the "
                                                      "composed core-set and decision log");
  sum_cmd->add_option("--input", sum.input, "input vectors (CSV or DIVCORE1 binary, sniffed)")
      ->required();
  sum_cmd->add_option("--k", sum.k, "core-set capacity per stream (>= 2)")->required();
  sum_cmd->add_option("--streams", sum.streams, "number of streams")->capture_default_str();
  sum_cmd->add_option("--algorithm", sum.algorithm, "replacement algorithm")
      ->check(CLI::IsMember({"brute", "adjacency"}))
      ->capture_default_str();
  sum_cmd->add_option("--horizon", sum.horizon, "tick budget (default: run to exhaustion)");
  sum_cmd->add_option("--seed", sum.seed, "tie-break rng seed")->capture_default_str();
  sum_cmd->add_option("--out", sum.out, "output directory")->required();
  sum_cmd->add_flag("--header", sum.header, "skip the first CSV row");
  sum_cmd->add_flag("--parallel", sum.parallel, "one worker per stream");
  sum_cmd->add_flag("--dump-matrix", sum.dump_matrix,
                    "also write each stream's final adjacency matrix as matrix_<id>.csv");

  BenchOptions bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time matrix builds and replacements over a "
                                                    "k grid, fit, and extrapolate");
  bench_cmd->add_option("--input", bench.input, "input vectors (CSV or DIVCORE1 binary, sniffed)")
      ->required();
  bench_cmd->add_option("--k-list", bench.k_list, "comma-separated core-set sizes")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--streams", bench.streams, "number of streams")->capture_default_str();
  bench_cmd->add_option("--replace-fraction", bench.replace_fraction,
                        "assumed fraction of steady-state arrivals that replace")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "output directory")->required();
  bench_cmd->add_flag("--svg", bench.svg, "also emit an SVG chart per figure");
  bench_cmd->add_flag("--header", bench.header, "skip the first CSV row");

  EvaluateOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Compare the composed core-set against an "
                                                      "offline baseline");
  eval_cmd->add_option("--input", eval.input, "input vectors (CSV or DIVCORE1 binary, sniffed)")
      ->required();
  eval_cmd->add_option("--k", eval.k, "core-set capacity per stream (>= 2)")->required();
  eval_cmd->add_option("--streams", eval.streams, "number of streams")->capture_default_str();
  eval_cmd->add_option("--baseline", eval.baseline, "offline baseline")
      ->check(CLI::IsMember({"exhaustive", "greedy"}))
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "tie-break rng seed")->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "output directory")->required();
  eval_cmd->add_flag("--header", eval.header, "skip the first CSV row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command_line = join_argv(argc, argv);
  try {
    if (sum_cmd->parsed()) {
      if (sum.k < 2) {
        std::cerr << "error: --k must be at least 2\n";
        return 2;
      }
      return run_summarize(sum, command_line);
    }
    if (bench_cmd->parsed()) {
      return run_bench(bench, command_line);
    }
    if (eval_cmd->parsed()) {
      if (eval.k < 2) {
        std::cerr << "error: --k must be at least 2\n";
        return 2;
      }
      return run_evaluate(eval, command_line);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
