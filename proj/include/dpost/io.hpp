#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpost/error.hpp"
#include "dpost/hierarchical.hpp"

namespace dpost {

/// 17 significant digits: round-trips every double.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    s = a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorCode::ParseError, "missing CSV column '" + name + "'");
  }
};

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty())
    throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  return v;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty CSV: " + path);
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto row = split_csv_line(line);
    if (row.size() != t.header.size())
      throw Error(ErrorCode::ParseError,
                  path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields");
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Columns: horse, pre, post. Returns (successes = post, trials = pre).
struct CountData {
  std::vector<double> successes, trials;
};

inline CountData read_parasite_csv(const std::string& path) {
  const auto t = read_csv(path);
  const auto pre = t.column("pre"), post = t.column("post");
  t.column("horse");
  CountData d;
  for (const auto& r : t.rows) {
    d.trials.push_back(parse_double(r[pre]));
    d.successes.push_back(parse_double(r[post]));
  }
  if (d.trials.empty()) throw Error(ErrorCode::ParseError, "no rows in " + path);
  return d;
}

/// Columns: status (a|f), age35, age45, age55, age65.
inline SurveyData read_survey_csv(const std::string& path) {
  const auto t = read_csv(path);
  const auto st = t.column("status");
  const std::size_t cols[4] = {t.column("age35"), t.column("age45"), t.column("age55"),
                               t.column("age65")};
  SurveyData d;
  for (const auto& r : t.rows) {
    if (r[st] == "a") d.group.push_back(0);
    else if (r[st] == "f") d.group.push_back(1);
    else throw Error(ErrorCode::ParseError, "status must be 'a' or 'f', got '" + r[st] + "'");
    std::array<double, 4> y{};
    for (int k = 0; k < 4; ++k) y[k] = parse_double(r[cols[k]]);
    d.y.push_back(y);
  }
  if (d.y.empty()) throw Error(ErrorCode::ParseError, "no rows in " + path);
  return d;
}

/// Single numeric column (default "x") or, if absent, the first column.
inline std::vector<double> read_numeric_column(const std::string& path, const std::string& name = "x") {
  const auto t = read_csv(path);
  std::size_t c = 0;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) c = i;
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(parse_double(r[c]));
  if (v.empty()) throw Error(ErrorCode::ParseError, "no rows in " + path);
  return v;
}

/// Accumulates rows in memory and writes atomically-enough (tmp + rename) on save.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvWriter& row(const std::vector<std::string>& cells) {
    require(cells.size() == header_.size(), ErrorCode::InvalidParam, "CSV row width mismatch");
    rows_.push_back(cells);
    return *this;
  }

  std::string str() const {
    std::ostringstream o;
    const auto emit = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
      o << '\n';
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return o.str();
  }

  void save(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
      out << str();
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
      throw Error(ErrorCode::ParseError, "cannot rename into " + path);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace dpost
