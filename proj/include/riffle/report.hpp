#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "riffle/error.hpp"
#include "riffle/tvd.hpp"

namespace riffle {

// One line of a total-variation report.
struct ResultRow {
  std::string scenario;
  unsigned shuffles = 0;
  std::string method;  // exact | mc-exact-backend | mc-histogram | normal
  double value = 0;
  std::optional<std::uint64_t> k;     // Monte Carlo deck samples
  std::optional<std::uint64_t> l;     // histogram samples per deck
  std::optional<std::uint64_t> seed;
  std::vector<AlphaBound> alpha;      // empty for exact rows

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline bool operator==(const AlphaBound& a, const AlphaBound& b) {
  return a.alpha == b.alpha && a.error == b.error && a.failure_bound == b.failure_bound;
}

inline constexpr const char* kCsvVersionLine = "# riffle-results v1";
inline constexpr const char* kCsvHeader =
    "scenario,shuffles,method,value,k,l,seed,err_alpha_sqrt10,fail_alpha_sqrt10,err_alpha_10sqrt10,"
    "fail_alpha_10sqrt10";

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string general6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <typename T>
std::string optional_field(const std::optional<T>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace detail

inline std::string format_csv_row(const ResultRow& r) {
  std::string out = r.scenario + ',' + std::to_string(r.shuffles) + ',' + r.method + ',' + detail::fixed6(r.value) +
                    ',' + detail::optional_field(r.k) + ',' + detail::optional_field(r.l) + ',' +
                    detail::optional_field(r.seed);
  for (std::size_t i = 0; i < 2; ++i) {
    if (i < r.alpha.size())
      out += ',' + detail::general6(r.alpha[i].error) + ',' + detail::general6(r.alpha[i].failure_bound);
    else
      out += ",,";
  }
  return out;
}

// Rows are reconstructed to their printed precision: format(parse(line)) == line.
inline ResultRow parse_csv_row(const std::string& line) {
  std::vector<std::string> f;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  if (f.size() != 11) throw ParseError("result row needs 11 fields, got " + std::to_string(f.size()), 0);
  ResultRow r;
  r.scenario = f[0];
  r.shuffles = static_cast<unsigned>(std::stoul(f[1]));
  r.method = f[2];
  r.value = std::stod(f[3]);
  auto opt = [](const std::string& s) -> std::optional<std::uint64_t> {
    if (s.empty()) return std::nullopt;
    return std::stoull(s);
  };
  r.k = opt(f[4]);
  r.l = opt(f[5]);
  r.seed = opt(f[6]);
  const double alphas[2] = {std::sqrt(10.0), 10.0 * std::sqrt(10.0)};
  for (std::size_t i = 0; i < 2; ++i) {
    if (f[7 + 2 * i].empty()) continue;
    r.alpha.push_back({alphas[i], std::stod(f[7 + 2 * i]), std::stod(f[8 + 2 * i])});
  }
  return r;
}

inline std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kCsvVersionLine) + '\n' + kCsvHeader + '\n';
  for (const auto& r : rows) out += format_csv_row(r) + '\n';
  return out;
}

inline std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvVersionLine) throw ParseError("missing results version line", 0);
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("unexpected results header", 0);
  std::vector<ResultRow> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(parse_csv_row(line));
  return rows;
}

// Human-oriented rendering; not meant to be parsed.
inline std::string format_text(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-14s %8s  %-17s %9s  %10s %10s  %s\n", "scenario", "shuffles", "method", "tvd",
                "k", "l", "bounds");
  out << buf;
  for (const auto& r : rows) {
    std::string bounds;
    for (const auto& a : r.alpha) {
      char b[96];
      std::snprintf(b, sizeof b, "%s+-%.4g (p<%.3g)", bounds.empty() ? "" : "; ", a.error, a.failure_bound);
      bounds += b;
    }
    std::snprintf(buf, sizeof buf, "%-14s %8u  %-17s %9.6f  %10s %10s  %s\n", r.scenario.c_str(), r.shuffles,
                  r.method.c_str(), r.value, detail::optional_field(r.k).c_str(), detail::optional_field(r.l).c_str(),
                  bounds.c_str());
    out << buf;
  }
  return out.str();
}

}  // namespace riffle
