#pragma once

// On-disk dataset format (three CSVs: edges, features, labels), split
// sidecars, and the results CSV with lock-guarded atomic appends.
//
// features.csv encodes missingness as an empty cell (or a NaN literal);
// everything else is a plain decimal written with enough digits to
// round-trip doubles exactly.

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgb/graph.hpp"
#include "mgb/mask.hpp"
#include "mgb/metrics.hpp"

namespace mgb {

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Split one CSV line, preserving empty cells (including a trailing one).
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // getline never yields a segment after the final newline, so every entry
  // is a record; an empty line is a one-cell (empty) row, which matters for
  // single-column feature files whose row is entirely missing.
  return lines;
}

inline long parse_int_strict(const std::string& s, const std::string& what) {
  if (s.empty()) throw std::runtime_error(what + ": empty integer cell");
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) {
    throw std::runtime_error(what + ": not an integer: '" + s + "'");
  }
  return v;
}

inline double parse_double_strict(const std::string& s, const std::string& what) {
  // strtod("") leaves end == begin == begin + size, so an explicit empty
  // check is needed; callers that treat empty cells as missing filter first.
  if (s.empty()) throw std::runtime_error(what + ": empty numeric cell");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    throw std::runtime_error(what + ": not a number: '" + s + "'");
  }
  return v;
}

inline std::string feature_header(int d) {
  std::string h;
  for (int j = 0; j < d; ++j) {
    if (j) h += ',';
    h += "f" + std::to_string(j);
  }
  return h;
}

}  // namespace detail

struct LoadedDataset {
  Graph graph;
  Mask native_mask;  // 1 where the raw data had no value
};

inline LoadedDataset load_dataset(const std::string& dir_path) {
  namespace fs = std::filesystem;
  const fs::path dir(dir_path);

  // --- features ---
  auto flines = detail::read_lines(dir / "features.csv");
  if (flines.empty()) throw std::runtime_error("load_dataset: empty features.csv");
  const auto header_cells = detail::split_csv(flines[0]);
  const int d = static_cast<int>(header_cells.size());
  if (flines[0] != detail::feature_header(d)) {
    throw std::runtime_error("load_dataset: features.csv header must be f0..f" +
                             std::to_string(d - 1));
  }
  const int n = static_cast<int>(flines.size()) - 1;
  if (n <= 0) throw std::runtime_error("load_dataset: no feature rows");
  Tensor2 features(n, d);
  std::vector<std::uint8_t> missing(static_cast<std::size_t>(n) * d, 0);
  for (int i = 0; i < n; ++i) {
    const auto cells = detail::split_csv(flines[i + 1]);
    if (static_cast<int>(cells.size()) != d) {
      throw std::runtime_error("load_dataset: ragged feature row " +
                               std::to_string(i));
    }
    for (int j = 0; j < d; ++j) {
      if (cells[j].empty()) {
        missing[static_cast<std::size_t>(i) * d + j] = 1;
        continue;
      }
      const double v = detail::parse_double_strict(cells[j], "features.csv");
      if (std::isnan(v)) {
        missing[static_cast<std::size_t>(i) * d + j] = 1;
        continue;
      }
      features.at(i, j) = v;
    }
  }

  // --- labels ---
  auto llines = detail::read_lines(dir / "labels.csv");
  if (llines.empty() || llines[0] != "y") {
    throw std::runtime_error("load_dataset: labels.csv header must be 'y'");
  }
  if (static_cast<int>(llines.size()) - 1 != n) {
    throw std::runtime_error("load_dataset: row count mismatch between "
                             "features.csv and labels.csv");
  }
  std::vector<int> labels;
  int max_label = 0;
  for (int i = 0; i < n; ++i) {
    const long y = detail::parse_int_strict(llines[i + 1], "labels.csv");
    if (y < 0) throw std::runtime_error("load_dataset: negative label");
    labels.push_back(static_cast<int>(y));
    max_label = std::max(max_label, static_cast<int>(y));
  }

  // --- edges ---
  auto elines = detail::read_lines(dir / "edges.csv");
  if (elines.empty() || elines[0] != "src,dst") {
    throw std::runtime_error("load_dataset: edges.csv header must be 'src,dst'");
  }
  std::vector<std::pair<int, int>> raw;
  for (std::size_t k = 1; k < elines.size(); ++k) {
    const auto cells = detail::split_csv(elines[k]);
    if (cells.size() != 2) {
      throw std::runtime_error("load_dataset: malformed edge row " +
                               std::to_string(k));
    }
    const long a = detail::parse_int_strict(cells[0], "edges.csv");
    const long b = detail::parse_int_strict(cells[1], "edges.csv");
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw std::runtime_error("load_dataset: edge endpoint out of range");
    }
    raw.emplace_back(static_cast<int>(a), static_cast<int>(b));
  }

  LoadedDataset out;
  out.graph.n = n;
  out.graph.d = d;
  out.graph.num_classes = max_label + 1;
  out.graph.edges = normalize_edges(std::move(raw));
  out.graph.features = std::move(features);
  out.graph.labels = std::move(labels);
  out.graph.absent = missing;
  validate_graph(out.graph);
  out.native_mask = Mask::from_bits(n, d, std::move(missing), "native", 0);
  out.native_mask.target_rate = out.native_mask.realized_rate;
  return out;
}

inline void save_dataset(const Graph& g, const Mask& mask,
                         const std::string& dir_path) {
  namespace fs = std::filesystem;
  if (mask.rows != g.n || mask.cols != g.d) {
    throw std::invalid_argument("save_dataset: mask shape mismatch");
  }
  // Native absent markers have no stored value, so the mask must cover them
  // or the placeholder would be written out as a real measurement.
  if (!g.absent.empty()) {
    for (std::size_t k = 0; k < g.absent.size(); ++k) {
      if (g.absent[k] && !mask.bits[k]) {
        throw std::invalid_argument(
            "save_dataset: mask does not cover an absent feature entry");
      }
    }
  }
  const fs::path dir(dir_path);
  std::error_code ec;
  fs::create_directories(dir, ec);

  auto open_out = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) {
      throw std::runtime_error(std::string("save_dataset: cannot open ") +
                               (dir / name).string());
    }
    return out;
  };

  {
    std::ofstream out = open_out("edges.csv");
    out << "src,dst\n";
    for (auto [a, b] : normalize_edges(g.edges)) out << a << ',' << b << '\n';
    if (!out) throw std::runtime_error("save_dataset: write failed: edges.csv");
  }
  {
    std::ofstream out = open_out("features.csv");
    out << detail::feature_header(g.d) << '\n';
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.d; ++j) {
        if (j) out << ',';
        if (!mask.missing(i, j)) out << detail::format_double(g.features.at(i, j));
      }
      out << '\n';
    }
    if (!out) throw std::runtime_error("save_dataset: write failed: features.csv");
  }
  {
    std::ofstream out = open_out("labels.csv");
    out << "y\n";
    for (int y : g.labels) out << y << '\n';
    if (!out) throw std::runtime_error("save_dataset: write failed: labels.csv");
  }
}

// Fully observed save: every feature cell written.
inline void save_dataset(const Graph& g, const std::string& dir_path) {
  Mask none = Mask::from_bits(
      g.n, g.d, std::vector<std::uint8_t>(static_cast<std::size_t>(g.n) * g.d, 0),
      "none", 0);
  save_dataset(g, none, dir_path);
}

// --- split sidecar ------------------------------------------------------

inline void save_split(const NodeSplit& s, const std::string& path) {
  nlohmann::json j = {{"train", s.train}, {"val", s.val}, {"test", s.test}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_split: cannot open " + path);
  out << j.dump(2) << '\n';
}

inline NodeSplit load_split(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_split: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  NodeSplit s;
  s.train = j.at("train").get<std::vector<int>>();
  s.val = j.at("val").get<std::vector<int>>();
  s.test = j.at("test").get<std::vector<int>>();
  return s;
}

// --- results persistence --------------------------------------------------

inline constexpr const char* kResultsHeader =
    "dataset_id,mechanism,regime,mu_train,mu_test,seed,layer_kind,layers,"
    "imputation,lr,weight_decay,test_macro_f1,val_macro_f1,realized_rate,"
    "epochs,seconds";

namespace detail {
inline void check_csv_safe(const std::string& s, const char* field) {
  if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos) {
    throw std::invalid_argument(std::string("append_results: field '") + field +
                                "' contains a delimiter: " + s);
  }
}
}  // namespace detail

inline std::string format_result_row(const RunReport& r) {
  detail::check_csv_safe(r.dataset_id, "dataset_id");
  detail::check_csv_safe(r.mechanism, "mechanism");
  detail::check_csv_safe(r.regime, "regime");
  detail::check_csv_safe(r.layer_kind, "layer_kind");
  detail::check_csv_safe(r.imputation, "imputation");
  std::string row;
  row += r.dataset_id;
  row += ',';
  row += r.mechanism;
  row += ',';
  row += r.regime;
  row += ',';
  row += detail::format_double(r.mu_train);
  row += ',';
  row += detail::format_double(r.mu_test);
  row += ',';
  row += std::to_string(r.seed);
  row += ',';
  row += r.layer_kind;
  row += ',';
  row += std::to_string(r.layers);
  row += ',';
  row += r.imputation;
  row += ',';
  row += detail::format_double(r.lr);
  row += ',';
  row += detail::format_double(r.weight_decay);
  row += ',';
  row += detail::format_double(r.test_macro_f1);
  row += ',';
  row += detail::format_double(r.val_macro_f1);
  row += ',';
  row += detail::format_double(r.realized_rate);
  row += ',';
  row += std::to_string(r.epochs);
  row += ',';
  row += detail::format_double(r.seconds);
  row += '\n';
  return row;
}

// One locked, single-write append per report. Writers on the same path —
// threads or processes — serialize on the file lock, so rows never
// interleave and the header is written exactly once.
inline void append_results(const RunReport& report, const std::string& path) {
  const std::string row = format_result_row(report);
  const int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND, 0644);
  if (fd < 0) {
    throw std::runtime_error("append_results: cannot open " + path + ": " +
                             std::strerror(errno));
  }
  struct FdGuard {
    int fd;
    ~FdGuard() {
      ::flock(fd, LOCK_UN);
      ::close(fd);
    }
  } guard{fd};
  if (::flock(fd, LOCK_EX) != 0) {
    throw std::runtime_error("append_results: cannot lock " + path);
  }

  struct stat st{};
  if (::fstat(fd, &st) != 0) {
    throw std::runtime_error("append_results: cannot stat " + path);
  }
  std::string payload;
  if (st.st_size == 0) {
    payload = std::string(kResultsHeader) + "\n" + row;
  } else {
    // Verify the schema of the existing file before appending to it.
    char buf[512];
    const ssize_t got = ::pread(fd, buf, sizeof(buf) - 1, 0);
    if (got <= 0) throw std::runtime_error("append_results: cannot read header");
    buf[got] = '\0';
    const char* nl = std::strchr(buf, '\n');
    const std::string existing(buf, nl ? static_cast<std::size_t>(nl - buf)
                                       : static_cast<std::size_t>(got));
    if (existing != kResultsHeader) {
      throw std::runtime_error("append_results: schema mismatch in " + path +
                               " (header: " + existing + ")");
    }
    payload = row;
  }
  const char* p = payload.data();
  std::size_t left = payload.size();
  while (left > 0) {
    const ssize_t w = ::write(fd, p, left);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("append_results: write failed for " + path);
    }
    p += w;
    left -= static_cast<std::size_t>(w);
  }
}

}  // namespace mgb
