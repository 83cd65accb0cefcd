#ifndef QLSR_GOLDEN_COMPARE_HPP
#define QLSR_GOLDEN_COMPARE_HPP

// Tolerant comparison of CLI outputs against checked-in golden files.

#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "qlsr/io.hpp"

namespace qlsr::testing {

inline bool numbers_close(double a, double b, double tol) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

/// Empty on match, otherwise the JSON pointer of the first mismatch.
inline std::string json_mismatch(const Json& got, const Json& want, double tol, const std::string& at = "") {
  if (want.is_number() && got.is_number()) {
    return numbers_close(got.get<double>(), want.get<double>(), tol) ? "" : at + ": " + got.dump() + " vs " + want.dump();
  }
  if (got.type() != want.type()) return at + ": type differs";
  if (want.is_array()) {
    if (got.size() != want.size()) return at + ": length " + std::to_string(got.size()) + " vs " + std::to_string(want.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
      auto m = json_mismatch(got[k], want[k], tol, at + "/" + std::to_string(k));
      if (!m.empty()) return m;
    }
    return "";
  }
  if (want.is_object()) {
    for (auto it = want.begin(); it != want.end(); ++it) {
      if (!got.contains(it.key())) return at + "/" + it.key() + ": missing";
      auto m = json_mismatch(got[it.key()], it.value(), tol, at + "/" + it.key());
      if (!m.empty()) return m;
    }
    for (auto it = got.begin(); it != got.end(); ++it) {
      if (!want.contains(it.key())) return at + "/" + it.key() + ": unexpected";
    }
    return "";
  }
  return got == want ? "" : at + ": " + got.dump() + " vs " + want.dump();
}

inline std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

/// Header must match exactly; numeric cells within `tol` (relative to max(1, |want|)).
inline std::string csv_mismatch(const std::string& got, const std::string& want, double tol) {
  const auto g = csv_rows(got), w = csv_rows(want);
  if (g.size() != w.size()) return "row count " + std::to_string(g.size()) + " vs " + std::to_string(w.size());
  for (std::size_t r = 0; r < w.size(); ++r) {
    if (g[r].size() != w[r].size()) return "row " + std::to_string(r) + ": column count differs";
    for (std::size_t c = 0; c < w[r].size(); ++c) {
      if (r == 0) {
        if (g[r][c] != w[r][c]) return "header differs at column " + std::to_string(c);
        continue;
      }
      const double a = std::strtod(g[r][c].c_str(), nullptr), b = std::strtod(w[r][c].c_str(), nullptr);
      if (!numbers_close(a, b, tol)) {
        return "row " + std::to_string(r) + " column " + std::to_string(c) + ": " + g[r][c] + " vs " + w[r][c];
      }
    }
  }
  return "";
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs a shell command, capturing stdout into `out`; returns the exit status.
inline int run_command(const std::string& cmd, std::string& out) {
  const std::string tmp = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/qlsr_cmd_" +
                          std::to_string(std::hash<std::string>{}(cmd)) + ".out";
  const int raw = std::system((cmd + " > " + tmp + " 2>&1").c_str());
  out = slurp(tmp);
  std::remove(tmp.c_str());
  if (raw == -1) return -1;
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace qlsr::testing

#endif  // QLSR_GOLDEN_COMPARE_HPP
