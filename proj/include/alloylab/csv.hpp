#pragma once

// CSV emission: comma separated, '.' decimal point, one header row, optional
// '#' comment lines. Files are written atomically (temp + rename) so a partial
// run never leaves a truncated table behind.

#include <Eigen/Sparse>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "alloylab/errors.hpp"

namespace alloylab {

// Shortest round-trip decimal form, locale independent. Integral values keep
// their plain integer spelling.
inline std::string format_double(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Prefer a shorter representation when it round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(shorter, "%lf", &back);
    if (back == v) return shorter;
  }
  return buf;
}

inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write '" + tmp.string() + "'");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

class CsvTable {
 public:
  void comment(const std::string& line) { comments_.push_back(line); }

  void header(std::vector<std::string> names) { header_ = std::move(names); }

  void row(std::vector<std::string> cells) {
    if (!header_.empty() && cells.size() != header_.size())
      throw PreconditionError("csv row width does not match the header");
    rows_.push_back(std::move(cells));
  }

  std::size_t n_rows() const { return rows_.size(); }

  std::string to_string() const {
    std::string out;
    for (const auto& c : comments_) out += "# " + c + "\n";
    out += join(header_);
    for (const auto& r : rows_) out += join(r);
    return out;
  }

  void write(const std::filesystem::path& path) const { atomic_write_text(path, to_string()); }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ",";
      line += cells[i];
    }
    line += "\n";
    return line;
  }

  std::vector<std::string> comments_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Coordinate-triplet text dump (row, col, value), one entry per line.
inline std::string triplet_text(const Eigen::SparseMatrix<double>& m) {
  std::string out = "row,col,value\n";
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      out += std::to_string(it.row()) + "," + std::to_string(it.col()) + "," +
             format_double(it.value()) + "\n";
  return out;
}

// FNV-1a 64-bit content hash for manifest bookkeeping.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace alloylab
