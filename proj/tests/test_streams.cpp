#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "divcore/streams.hpp"
#include "test_support.hpp"

using divcore::LabeledPoint;
using divcore::Scheduler;
using divcore::StreamSource;
using divcore::Vector;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("divcore-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path write_file(const TempDir& dir, const std::string& name, const std::string& contents) {
  const fs::path p = dir.path / name;
  std::ofstream out(p, std::ios::binary);
  out << contents;
  return p;
}

std::string binary_header(std::uint32_t count, std::uint32_t dim) {
  std::string s = "DIVCORE1";
  for (const std::uint32_t v : {count, dim}) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
  }
  return s;
}

std::string f32_le(float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  std::string s;
  s.push_back(static_cast<char>(bits & 0xff));
  s.push_back(static_cast<char>((bits >> 8) & 0xff));
  s.push_back(static_cast<char>((bits >> 16) & 0xff));
  s.push_back(static_cast<char>((bits >> 24) & 0xff));
  return s;
}

}  // namespace

TEST_CASE("load_csv parses plain rows") {
  TempDir dir;
  const auto path = write_file(dir, "ok.csv", "1.0,0.0\n0.0,1.0\n");
  const auto vectors = divcore::load_csv(path);
  REQUIRE(vectors.size() == 2);
  CHECK(vectors[0] == Vector{1.0, 0.0});
  CHECK(vectors[1] == Vector{0.0, 1.0});
}

TEST_CASE("load_csv skips the header row on request") {
  TempDir dir;
  const auto path = write_file(dir, "h.csv", "x,y\n1.0,2.0\n");
  CHECK_THROWS(divcore::load_csv(path));
  const auto vectors = divcore::load_csv(path, /*skip_header=*/true);
  REQUIRE(vectors.size() == 1);
  CHECK(vectors[0] == Vector{1.0, 2.0});
}

TEST_CASE("load_csv error contract") {
  TempDir dir;
  using Catcher = std::runtime_error;

  const auto bad_number = write_file(dir, "bad.csv", "1.0,abc\n");
  CHECK_THROWS_WITH_AS(divcore::load_csv(bad_number),
                       doctest::Contains("row 1, column 2"), Catcher);

  const auto ragged = write_file(dir, "ragged.csv", "1.0,2.0\n3.0\n");
  CHECK_THROWS_WITH_AS(divcore::load_csv(ragged), doctest::Contains("row 2"), Catcher);

  const auto zero = write_file(dir, "zero.csv", "1.0,2.0\n0.0,0.0\n");
  CHECK_THROWS_WITH_AS(divcore::load_csv(zero), doctest::Contains("row 2"), Catcher);

  CHECK_THROWS_AS(divcore::load_csv(dir.path / "missing.csv"), Catcher);
  const auto empty = write_file(dir, "empty.csv", "");
  CHECK_THROWS_AS(divcore::load_csv(empty), Catcher);
}

TEST_CASE("load_binary parses the DIVCORE1 layout") {
  TempDir dir;
  const auto path =
      write_file(dir, "one.bin", binary_header(1, 2) + f32_le(1.0f) + f32_le(0.0f));
  const auto vectors = divcore::load_binary(path);
  REQUIRE(vectors.size() == 1);
  CHECK(vectors[0] == Vector{1.0, 0.0});
}

TEST_CASE("load_binary error contract") {
  TempDir dir;
  const auto bad_magic = write_file(dir, "magic.bin", "DIVCORX1" + std::string(16, '\0'));
  CHECK_THROWS_WITH_AS(divcore::load_binary(bad_magic), doctest::Contains("magic"),
                       std::runtime_error);

  const auto truncated = write_file(dir, "trunc.bin", binary_header(2, 3) + std::string(20, 'x'));
  CHECK_THROWS_WITH_AS(divcore::load_binary(truncated), doctest::Contains("truncated"),
                       std::runtime_error);

  const auto zero_n = write_file(dir, "zero.bin", binary_header(0, 3));
  CHECK_THROWS_AS(divcore::load_binary(zero_n), std::runtime_error);

  const auto trailing =
      write_file(dir, "trail.bin", binary_header(1, 1) + f32_le(1.0f) + "zz");
  CHECK_THROWS_AS(divcore::load_binary(trailing), std::runtime_error);
}

TEST_CASE("csv to binary round trip is exact at 32-bit precision") {
  TempDir dir;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::string csv;
  std::vector<std::vector<double>> raw;
  for (int r = 0; r < 1000; ++r) {
    std::vector<double> row(7);
    for (auto& x : row) x = coord(rng);
    row[0] += 0.5;  // keep away from the zero vector
    raw.push_back(row);
    for (std::size_t c = 0; c < row.size(); ++c) {
      csv += (c ? "," : "") + std::to_string(row[c]);
    }
    csv += "\n";
  }
  const auto csv_path = write_file(dir, "round.csv", csv);
  const auto loaded = divcore::load_csv(csv_path);
  divcore::write_binary(dir.path / "round.bin", loaded);
  const auto reloaded = divcore::load_binary(dir.path / "round.bin");
  REQUIRE(reloaded.size() == loaded.size());
  for (std::size_t r = 0; r < loaded.size(); ++r) {
    for (std::size_t c = 0; c < loaded[r].dim(); ++c) {
      // Widened float32 of the original value, bit-exact.
      CHECK(reloaded[r][c] == static_cast<double>(static_cast<float>(loaded[r][c])));
    }
  }
}

TEST_CASE("load_vectors sniffs the magic") {
  TempDir dir;
  const auto bin = write_file(dir, "x.bin", binary_header(1, 2) + f32_le(3.0f) + f32_le(4.0f));
  CHECK(divcore::load_vectors(bin).size() == 1);
  const auto csv = write_file(dir, "x.csv", "3.0,4.0\n");
  CHECK(divcore::load_vectors(csv).size() == 1);
}

TEST_CASE("partition splits into contiguous blocks") {
  std::vector<Vector> big(50000, Vector{1.0});
  auto streams = divcore::partition(big, 5);
  REQUIRE(streams.size() == 5);
  for (const auto& s : streams) CHECK(s.size() == 10000);

  std::vector<Vector> seven;
  for (int i = 1; i <= 7; ++i) seven.push_back(Vector{static_cast<double>(i)});
  auto uneven = divcore::partition(seven, 2);
  REQUIRE(uneven.size() == 2);
  CHECK(uneven[0].size() == 3);
  CHECK(uneven[1].size() == 4);
  CHECK(uneven[0].next() == Vector{1.0});
  CHECK(uneven[1].next() == Vector{4.0});

  auto whole = divcore::partition(seven, 1);
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].size() == 7);

  CHECK_THROWS_AS(divcore::partition(seven, 8), std::invalid_argument);
  CHECK_THROWS_AS(divcore::partition(seven, 0), std::invalid_argument);
}

TEST_CASE("partition conserves every element exactly once") {
  const auto dataset = testsupport::random_unit_dataset(103, 3, 9);
  auto streams = divcore::partition(dataset, 4);
  std::size_t total = 0;
  std::size_t index = 0;
  for (auto& s : streams) {
    total += s.size();
    while (!s.exhausted()) {
      CHECK(s.next() == dataset[index]);
      ++index;
    }
  }
  CHECK(total == dataset.size());
}

TEST_CASE("scheduler round-robins with gap-free global timestamps") {
  std::vector<StreamSource> sources;
  sources.emplace_back(0, std::vector<Vector>{Vector{1.0}, Vector{2.0}});
  sources.emplace_back(1, std::vector<Vector>{Vector{3.0}, Vector{4.0}});
  Scheduler sched(std::move(sources));

  auto round1 = sched.next_round();
  REQUIRE(round1.size() == 2);
  CHECK(round1[0].stream_id == 0);
  CHECK(round1[0].timestamp == 0);
  CHECK(round1[0].vector == Vector{1.0});
  CHECK(round1[1].stream_id == 1);
  CHECK(round1[1].timestamp == 1);

  auto round2 = sched.next_round();
  REQUIRE(round2.size() == 2);
  CHECK(round2[0].timestamp == 2);
  CHECK(round2[0].vector == Vector{2.0});
  CHECK(round2[1].timestamp == 3);

  CHECK(sched.next_round().empty());
}

TEST_CASE("scheduler skips exhausted streams") {
  std::vector<StreamSource> sources;
  sources.emplace_back(0, std::vector<Vector>{Vector{1.0}});
  sources.emplace_back(1, std::vector<Vector>{Vector{2.0}, Vector{3.0}});
  Scheduler sched(std::move(sources));

  auto round1 = sched.next_round();
  REQUIRE(round1.size() == 2);
  auto round2 = sched.next_round();
  REQUIRE(round2.size() == 1);
  CHECK(round2[0].stream_id == 1);
  CHECK(round2[0].timestamp == 2);
  CHECK(round2[0].vector == Vector{3.0});
  CHECK(sched.next_round().empty());
}

TEST_CASE("timestamps are strictly increasing within each stream") {
  auto streams = divcore::partition(testsupport::random_unit_dataset(37, 2, 3), 3);
  Scheduler sched(std::move(streams));
  std::vector<std::int64_t> last(3, -1);
  std::size_t issued = 0;
  while (true) {
    const auto round = sched.next_round();
    if (round.empty()) break;
    for (const LabeledPoint& p : round) {
      CHECK(static_cast<std::int64_t>(p.timestamp) > last[p.stream_id]);
      CHECK(p.point_id == p.timestamp);
      last[p.stream_id] = static_cast<std::int64_t>(p.timestamp);
      ++issued;
    }
  }
  CHECK(issued == 37);
  CHECK(sched.next_timestamp() == 37);
}

TEST_CASE("stream source yields once and errors after exhaustion") {
  StreamSource s(0, {Vector{1.0}});
  CHECK_FALSE(s.exhausted());
  CHECK(s.next() == Vector{1.0});
  CHECK(s.exhausted());
  CHECK_THROWS_AS(s.next(), std::out_of_range);
}
