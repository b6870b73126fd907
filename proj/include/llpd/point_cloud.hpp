#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace llpd {

// Label value reserved for noise / unlabeled points.
inline constexpr int kNoiseLabel = 0;

struct PointCloud {
  Eigen::MatrixXd coords;  // n x D, row per point

  int n() const { return static_cast<int>(coords.rows()); }
  int dim() const { return static_cast<int>(coords.cols()); }

  void validate() const {
    if (coords.rows() < 1 || coords.cols() < 1)
      throw std::invalid_argument("point cloud must have n >= 1, D >= 1");
    if (!coords.allFinite())
      throw std::invalid_argument("point cloud has non-finite coordinates");
  }
};

struct LabeledPointCloud {
  PointCloud points;
  std::vector<int> labels;  // kNoiseLabel or 1..K
  int num_clusters = 0;

  void validate() const {
    points.validate();
    if (static_cast<int>(labels.size()) != points.n())
      throw std::invalid_argument("label count does not match point count");
    std::vector<char> seen(num_clusters + 1, 0);
    for (int l : labels) {
      if (l != kNoiseLabel && (l < 1 || l > num_clusters))
        throw std::invalid_argument("label outside {0, 1..K}");
      if (l != kNoiseLabel) seen[l] = 1;
    }
    for (int k = 1; k <= num_clusters; ++k)
      if (!seen[k])
        throw std::invalid_argument("cluster label " + std::to_string(k) +
                                    " has no points");
  }
};

namespace detail {

inline bool parse_double(const std::string& cell, double& out) {
  const char* s = cell.c_str();
  char* end = nullptr;
  out = std::strtod(s, &end);
  if (end == s) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace detail

// Parses a rectangular numeric CSV, one point per row. An optional header
// row is detected by a non-numeric first row. If `label_column` names a
// column (header required) its values become integer labels; otherwise all
// points are unlabeled noise.
inline LabeledPointCloud load_csv(const std::string& path,
                                  std::optional<std::string> label_column =
                                      std::nullopt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(detail::split_csv_row(line));
  }
  if (rows.empty()) throw std::runtime_error("empty file: " + path);

  // Header row: any cell that does not parse as a number.
  bool has_header = false;
  for (const auto& cell : rows[0]) {
    double v;
    if (!detail::parse_double(cell, v)) {
      has_header = true;
      break;
    }
  }
  int label_idx = -1;
  std::size_t first_data = has_header ? 1 : 0;
  if (label_column) {
    if (!has_header)
      throw std::runtime_error("label column requested but file has no header");
    for (std::size_t j = 0; j < rows[0].size(); ++j)
      if (rows[0][j] == *label_column) label_idx = static_cast<int>(j);
    if (label_idx < 0)
      throw std::runtime_error("no column named '" + *label_column + "'");
  }
  if (first_data >= rows.size())
    throw std::runtime_error("file has a header but no data rows: " + path);

  const std::size_t width = rows[first_data].size();
  const int ncols = static_cast<int>(width) - (label_idx >= 0 ? 1 : 0);
  if (ncols < 1) throw std::runtime_error("no coordinate columns in " + path);

  LabeledPointCloud out;
  const int n = static_cast<int>(rows.size() - first_data);
  out.points.coords.resize(n, ncols);
  out.labels.assign(n, kNoiseLabel);
  int max_label = 0;
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[first_data + i];
    if (row.size() != width)
      throw std::runtime_error("ragged row " + std::to_string(i + 1) +
                               ": expected " + std::to_string(width) +
                               " cells, got " + std::to_string(row.size()));
    int cj = 0;
    for (std::size_t j = 0; j < width; ++j) {
      double v;
      if (!detail::parse_double(row[j], v))
        throw std::runtime_error("non-numeric cell at row " +
                                 std::to_string(i + 1) + ", column " +
                                 std::to_string(j + 1) + ": '" + row[j] + "'");
      if (static_cast<int>(j) == label_idx) {
        out.labels[i] = static_cast<int>(std::lround(v));
        max_label = std::max(max_label, out.labels[i]);
      } else {
        out.points.coords(i, cj++) = v;
      }
    }
  }
  out.num_clusters = max_label;
  return out;
}

// One integer per line, noise written as 0.
inline void save_labels(const std::vector<int>& labels,
                        const std::string& path) {
  if (labels.empty()) throw std::invalid_argument("no labels to save");
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    for (int l : labels) out << l << "\n";
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    double v;
    if (!detail::parse_double(detail::split_csv_row(line)[0], v))
      throw std::runtime_error("non-numeric label at line " +
                               std::to_string(labels.size() + 1));
    labels.push_back(static_cast<int>(std::lround(v)));
  }
  if (labels.empty()) throw std::runtime_error("empty label file: " + path);
  return labels;
}

inline void save_points_csv(const PointCloud& pc, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out.precision(17);
    for (int i = 0; i < pc.n(); ++i) {
      for (int j = 0; j < pc.dim(); ++j) {
        if (j) out << ',';
        out << pc.coords(i, j);
      }
      out << '\n';
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace llpd
