#include "divcore/streams.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace divcore {

namespace {

constexpr char kMagic[8] = {'D', 'I', 'V', 'C', 'O', 'R', 'E', '1'};

std::string row_col(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

}  // namespace

StreamSource::StreamSource(std::size_t stream_id, std::vector<Vector> elements)
    : stream_id_(stream_id), elements_(std::move(elements)) {}

const Vector& StreamSource::next() {
  if (exhausted()) {
    throw std::out_of_range("StreamSource::next: stream " + std::to_string(stream_id_) +
                            " is exhausted");
  }
  return elements_[cursor_++];
}

Scheduler::Scheduler(std::vector<StreamSource> streams) : streams_(std::move(streams)) {}

std::vector<LabeledPoint> Scheduler::next_round() {
  std::vector<LabeledPoint> round;
  for (StreamSource& s : streams_) {
    if (s.exhausted()) continue;
    const std::uint64_t ts = next_timestamp_++;
    round.push_back(LabeledPoint{ts, s.stream_id(), ts, s.next()});
  }
  return round;
}

std::vector<Vector> load_csv(const std::filesystem::path& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_csv: cannot open " + path.string());
  }
  std::vector<Vector> vectors;
  std::string line;
  std::size_t row = 0;
  std::size_t expected_cols = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_header && row == 1) continue;
    if (line.empty() && in.peek() == std::char_traits<char>::eof() && vectors.size() > 0) {
      break;  // trailing newline
    }

    std::vector<double> components;
    std::size_t col = 0;
    std::string_view rest = line;
    while (true) {
      ++col;
      const std::size_t comma = rest.find(',');
      const std::string_view token = trim(rest.substr(0, comma));
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw std::runtime_error("load_csv: " + path.string() + ": cannot parse number at " +
                                 row_col(row, col) + " (\"" + std::string(token) + "\")");
      }
      components.push_back(value);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }

    if (expected_cols == 0) {
      expected_cols = components.size();
    } else if (components.size() != expected_cols) {
      throw std::runtime_error("load_csv: " + path.string() + ": row " + std::to_string(row) +
                               " has " + std::to_string(components.size()) +
                               " columns, expected " + std::to_string(expected_cols));
    }
    try {
      vectors.emplace_back(std::move(components));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("load_csv: " + path.string() + ": row " + std::to_string(row) +
                               ": " + e.what());
    }
  }
  if (vectors.empty()) {
    throw std::runtime_error("load_csv: " + path.string() + ": no vectors found");
  }
  return vectors;
}

std::vector<Vector> load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_binary: cannot open " + path.string());
  }
  std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < 16 || std::memcmp(data.data(), kMagic, 8) != 0) {
    throw std::runtime_error("load_binary: " + path.string() +
                             ": bad magic (expected DIVCORE1 header)");
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::uint32_t count = read_u32_le(bytes + 8);
  const std::uint32_t dim = read_u32_le(bytes + 12);
  if (count == 0 || dim == 0) {
    throw std::runtime_error("load_binary: " + path.string() + ": count and dimension must be nonzero");
  }
  const std::size_t required = static_cast<std::size_t>(count) * dim * 4;
  const std::size_t payload = data.size() - 16;
  if (payload < required) {
    throw std::runtime_error("load_binary: " + path.string() + ": truncated payload (" +
                             std::to_string(payload) + " bytes, " + std::to_string(required) +
                             " required)");
  }
  if (payload > required) {
    throw std::runtime_error("load_binary: " + path.string() + ": trailing data (" +
                             std::to_string(payload) + " bytes, " + std::to_string(required) +
                             " expected)");
  }

  std::vector<Vector> vectors;
  vectors.reserve(count);
  const unsigned char* p = bytes + 16;
  for (std::uint32_t r = 0; r < count; ++r) {
    std::vector<double> components;
    components.reserve(dim);
    for (std::uint32_t c = 0; c < dim; ++c, p += 4) {
      components.push_back(static_cast<double>(std::bit_cast<float>(read_u32_le(p))));
    }
    try {
      vectors.emplace_back(std::move(components));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("load_binary: " + path.string() + ": row " + std::to_string(r + 1) +
                               ": " + e.what());
    }
  }
  return vectors;
}

void write_binary(const std::filesystem::path& path, std::span<const Vector> vectors) {
  if (vectors.empty()) {
    throw std::invalid_argument("write_binary: nothing to write");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_binary: cannot open " + path.string());
  }
  out.write(kMagic, 8);
  write_u32_le(out, static_cast<std::uint32_t>(vectors.size()));
  write_u32_le(out, static_cast<std::uint32_t>(vectors.front().dim()));
  for (const Vector& v : vectors) {
    for (double c : v.components()) {
      write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(c)));
    }
  }
  if (!out) {
    throw std::runtime_error("write_binary: write failed for " + path.string());
  }
}

std::vector<Vector> load_vectors(const std::filesystem::path& path, bool skip_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_vectors: cannot open " + path.string());
  }
  char head[8] = {};
  in.read(head, 8);
  if (in.gcount() == 8 && std::memcmp(head, kMagic, 8) == 0) {
    return load_binary(path);
  }
  return load_csv(path, skip_header);
}

std::vector<StreamSource> partition(std::vector<Vector> dataset, std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("partition: at least one stream required");
  }
  if (n > dataset.size()) {
    throw std::invalid_argument("partition: cannot split " + std::to_string(dataset.size()) +
                                " vectors into " + std::to_string(n) + " streams");
  }
  const std::size_t block = dataset.size() / n;
  std::vector<StreamSource> streams;
  streams.reserve(n);
  auto it = dataset.begin();
  for (std::size_t i = 0; i < n; ++i) {
    auto last = (i + 1 == n) ? dataset.end() : it + static_cast<std::ptrdiff_t>(block);
    streams.emplace_back(i, std::vector<Vector>(std::make_move_iterator(it),
                                                std::make_move_iterator(last)));
    it = last;
  }
  return streams;
}

}  // namespace divcore
