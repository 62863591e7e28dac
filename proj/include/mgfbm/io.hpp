#pragma once

// Ensemble and table file formats.
//
// CSV: header row of grid times, one row per path, 17 significant digits.
//
// Binary (little-endian), 64-byte header followed by the grid times and the
// path matrix in column-major order (all paths at t_0, then at t_1, ...):
//
//   offset  size  field
//        0     4  magic "MGFB"
//        4     2  format version (1)
//        6     1  method (0 = cholesky, 1 = circulant)
//        7     1  gaussian algorithm id
//        8     4  n_times
//       12     4  n_paths
//       16     8  seed
//       24     8  a
//       32     8  b
//       40     8  c
//       48     8  H
//       56     8  reserved, zero
//       64  8*n_times           grid times
//        .  8*n_times*n_paths   path values

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "mgfbm/errors.hpp"
#include "mgfbm/grid.hpp"
#include "mgfbm/params.hpp"
#include "mgfbm/sampler.hpp"

namespace mgfbm {

static_assert(std::endian::native == std::endian::little,
              "the binary ensemble format is defined for little-endian hosts");

/// Input/output failure; the message names the path involved.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class FileFormat { csv, json, binary };

inline FileFormat parse_format(std::string_view name) {
  if (name == "csv") return FileFormat::csv;
  if (name == "json") return FileFormat::json;
  if (name == "binary" || name == "bin") return FileFormat::binary;
  throw domain_error("unknown format '" + std::string(name) + "' (expected csv, json or binary)");
}

inline constexpr std::array<char, 4> kBinaryMagic{'M', 'G', 'F', 'B'};
inline constexpr std::uint16_t kBinaryVersion = 1;
inline constexpr std::size_t kBinaryHeaderSize = 64;

/// Shortest-safe round-trip text for a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

inline double parse_double(std::string_view text, const std::string& context) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r' || text.back() == '\t')) {
    text.remove_suffix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw io_error(context + ": cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

namespace detail {

inline std::vector<double> parse_csv_row(const std::string& line, const std::string& context) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t comma = line.find(',', start);
    const std::size_t end = comma == std::string::npos ? line.size() : comma;
    out.push_back(parse_double(std::string_view(line).substr(start, end - start), context));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw io_error(path + ": cannot open for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw io_error(path + ": cannot open for reading");
  return in;
}

template <class T>
void put(std::array<unsigned char, kBinaryHeaderSize>& header, std::size_t offset, T value) {
  std::memcpy(header.data() + offset, &value, sizeof(T));
}

template <class T>
T get(const std::array<unsigned char, kBinaryHeaderSize>& header, std::size_t offset) {
  T value;
  std::memcpy(&value, header.data() + offset, sizeof(T));
  return value;
}

}  // namespace detail

inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m,
                             const std::vector<double>* header = nullptr) {
  if (header) {
    for (std::size_t j = 0; j < header->size(); ++j) {
      out << (j ? "," : "") << format_double((*header)[j]);
    }
    out << '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? "," : "") << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void write_ensemble_csv(std::ostream& out, const PathEnsemble& e) {
  write_matrix_csv(out, e.paths, &e.grid.times());
}

/// Reads a CSV ensemble. CSV carries no metadata, so the parameters are supplied.
inline PathEnsemble read_ensemble_csv(std::istream& in, const ProcessParams& params,
                                      const std::string& context = "csv") {
  std::string line;
  if (!std::getline(in, line)) throw io_error(context + ": empty file");
  TimeGrid grid(detail::parse_csv_row(line, context));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(detail::parse_csv_row(line, context));
    if (rows.back().size() != grid.size()) {
      throw io_error(context + ": row " + std::to_string(rows.size()) + " has " +
                     std::to_string(rows.back().size()) + " values, expected " +
                     std::to_string(grid.size()));
    }
  }
  Eigen::MatrixXd paths(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      paths(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return {std::move(grid), params, 0, Method::cholesky, GaussianAlgorithm::inverse_cdf,
          std::move(paths)};
}

inline std::array<unsigned char, kBinaryHeaderSize> binary_header(const PathEnsemble& e) {
  std::array<unsigned char, kBinaryHeaderSize> h{};
  std::memcpy(h.data(), kBinaryMagic.data(), kBinaryMagic.size());
  detail::put<std::uint16_t>(h, 4, kBinaryVersion);
  detail::put<std::uint8_t>(h, 6, static_cast<std::uint8_t>(e.method));
  detail::put<std::uint8_t>(h, 7, static_cast<std::uint8_t>(e.gaussian));
  detail::put<std::uint32_t>(h, 8, static_cast<std::uint32_t>(e.n_times()));
  detail::put<std::uint32_t>(h, 12, static_cast<std::uint32_t>(e.n_paths()));
  detail::put<std::uint64_t>(h, 16, e.seed);
  detail::put<double>(h, 24, e.params.a());
  detail::put<double>(h, 32, e.params.b());
  detail::put<double>(h, 40, e.params.c());
  detail::put<double>(h, 48, e.params.hurst());
  return h;
}

inline void write_ensemble_binary(std::ostream& out, const PathEnsemble& e) {
  if (e.n_times() > UINT32_MAX || e.n_paths() > UINT32_MAX) {
    throw domain_error("ensemble too large for the binary format");
  }
  const auto header = binary_header(e);
  out.write(reinterpret_cast<const char*>(header.data()), header.size());
  out.write(reinterpret_cast<const char*>(e.grid.times().data()),
            static_cast<std::streamsize>(sizeof(double) * e.n_times()));
  // Eigen::MatrixXd is column-major: column j holds every path at t_j.
  out.write(reinterpret_cast<const char*>(e.paths.data()),
            static_cast<std::streamsize>(sizeof(double) * e.paths.size()));
}

inline PathEnsemble read_ensemble_binary(std::istream& in, const std::string& context = "binary") {
  std::array<unsigned char, kBinaryHeaderSize> h{};
  if (!in.read(reinterpret_cast<char*>(h.data()), h.size())) {
    throw io_error(context + ": truncated header");
  }
  if (std::memcmp(h.data(), kBinaryMagic.data(), kBinaryMagic.size()) != 0) {
    throw io_error(context + ": not an mgfbm ensemble (bad magic)");
  }
  if (detail::get<std::uint16_t>(h, 4) != kBinaryVersion) {
    throw io_error(context + ": unsupported format version " +
                   std::to_string(detail::get<std::uint16_t>(h, 4)));
  }
  const auto method = static_cast<Method>(detail::get<std::uint8_t>(h, 6));
  const auto gaussian = static_cast<GaussianAlgorithm>(detail::get<std::uint8_t>(h, 7));
  const auto n_times = detail::get<std::uint32_t>(h, 8);
  const auto n_paths = detail::get<std::uint32_t>(h, 12);
  const auto seed = detail::get<std::uint64_t>(h, 16);
  ProcessParams params(detail::get<double>(h, 24), detail::get<double>(h, 32),
                       detail::get<double>(h, 40), detail::get<double>(h, 48));
  std::vector<double> times(n_times);
  Eigen::MatrixXd paths(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(n_times));
  if (!in.read(reinterpret_cast<char*>(times.data()),
               static_cast<std::streamsize>(sizeof(double) * n_times)) ||
      !in.read(reinterpret_cast<char*>(paths.data()),
               static_cast<std::streamsize>(sizeof(double) * paths.size()))) {
    throw io_error(context + ": truncated data section");
  }
  return {TimeGrid(std::move(times)), params, seed, method, gaussian, std::move(paths)};
}

inline nlohmann::json params_to_json(const ProcessParams& p) {
  return {{"a", p.a()}, {"b", p.b()}, {"c", p.c()}, {"H", p.hurst()}};
}

inline ProcessParams params_from_json(const nlohmann::json& j) {
  return {j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>(),
          j.at("H").get<double>()};
}

inline void write_ensemble_json(std::ostream& out, const PathEnsemble& e) {
  nlohmann::json paths = nlohmann::json::array();
  for (Eigen::Index i = 0; i < e.paths.rows(); ++i) {
    std::vector<double> row(e.paths.cols());
    for (Eigen::Index j = 0; j < e.paths.cols(); ++j) row[static_cast<std::size_t>(j)] = e.paths(i, j);
    paths.push_back(std::move(row));
  }
  const nlohmann::json doc{{"format", "mgfbm-ensemble"},
                           {"version", kBinaryVersion},
                           {"params", params_to_json(e.params)},
                           {"seed", e.seed},
                           {"method", to_string(e.method)},
                           {"gaussian", static_cast<int>(e.gaussian)},
                           {"times", e.grid.times()},
                           {"paths", std::move(paths)}};
  out << doc.dump() << '\n';
}

inline PathEnsemble read_ensemble_json(std::istream& in, const std::string& context = "json") {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& err) {
    throw io_error(context + ": " + err.what());
  }
  if (doc.value("format", "") != "mgfbm-ensemble") {
    throw io_error(context + ": not an mgfbm ensemble document");
  }
  TimeGrid grid(doc.at("times").get<std::vector<double>>());
  const auto rows = doc.at("paths").get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd paths(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != grid.size()) throw io_error(context + ": ragged path row");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      paths(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  const Method method = doc.at("method").get<std::string>() == "circulant" ? Method::circulant
                                                                           : Method::cholesky;
  return {std::move(grid), params_from_json(doc.at("params")), doc.at("seed").get<std::uint64_t>(),
          method, static_cast<GaussianAlgorithm>(doc.at("gaussian").get<int>()), std::move(paths)};
}

inline void write_ensemble(const std::string& path, const PathEnsemble& e, FileFormat format) {
  if (format == FileFormat::binary) {
    auto out = detail::open_out(path, std::ios::out | std::ios::binary);
    write_ensemble_binary(out, e);
    if (!out) throw io_error(path + ": write failed");
    return;
  }
  auto out = detail::open_out(path);
  if (format == FileFormat::csv) {
    write_ensemble_csv(out, e);
  } else {
    write_ensemble_json(out, e);
  }
  if (!out) throw io_error(path + ": write failed");
}

/// Reads an ensemble, guessing the format from the first bytes. CSV input
/// takes its parameters from `csv_params`.
inline PathEnsemble read_ensemble(const std::string& path,
                                  const std::optional<ProcessParams>& csv_params = {}) {
  auto in = detail::open_in(path, std::ios::in | std::ios::binary);
  char first[4] = {};
  in.read(first, 4);
  in.clear();
  in.seekg(0);
  if (std::memcmp(first, kBinaryMagic.data(), 4) == 0) return read_ensemble_binary(in, path);
  if (first[0] == '{') return read_ensemble_json(in, path);
  if (!csv_params) {
    throw domain_error(path + ": CSV ensembles carry no parameters; pass them with --a/--b/--c/-H or --preset");
  }
  return read_ensemble_csv(in, *csv_params, path);
}

}  // namespace mgfbm
