#ifndef GFSIM_IO_HPP
#define GFSIM_IO_HPP

// Tabular output. CSV files start with one "# " line holding the run
// metadata as JSON, then a header row, then %.17g data. JSON output carries
// the same content as {"metadata", "columns", "rows"}. Files are written to
// a temporary next to the target and renamed into place.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gfsim/errors.hpp"

namespace gfsim {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json metadata = nlohmann::json::object();
  nlohmann::json document; // when set, JSON output is this instead of the table

  void add_row(std::vector<double> row) {
    if (row.size() != columns.size())
      throw std::logic_error("row has " + std::to_string(row.size()) + " entries for " +
                             std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw std::out_of_range("no column '" + name + "'");
  }
};

enum class Format { csv, json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError("unknown format '" + s + "' (expected csv or json)");
}

inline std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline void write_csv(std::ostream& out, const Table& t) {
  out << "# " << t.metadata.dump() << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

inline nlohmann::json to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) rows.push_back(r);
  return {{"metadata", t.metadata}, {"columns", t.columns}, {"rows", std::move(rows)}};
}

inline void write_table(std::ostream& out, const Table& t, Format f) {
  if (f == Format::csv)
    write_csv(out, t);
  else
    out << (t.document.is_null() ? to_json(t) : t.document).dump(2) << '\n';
}

/// Writes `content` to `path` through a temporary file and a rename, so a
/// reader never sees a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("cannot move output into '" + path.string() + "': " + ec.message());
  }
}

/// Empty path or "-" means stdout.
inline void emit(const std::string& path, const Table& t, Format f) {
  if (path.empty() || path == "-") {
    write_table(std::cout, t, f);
    return;
  }
  std::ostringstream buf;
  write_table(buf, t, f);
  write_atomic(path, buf.str());
}

/// Reads back a CSV written by write_csv.
inline Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw ConfigError("missing metadata line");
  t.metadata = nlohmann::json::parse(line.substr(2));
  if (!std::getline(in, line)) throw ConfigError("missing header row");
  std::stringstream header(line);
  for (std::string col; std::getline(header, col, ',');) t.columns.push_back(col);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) row.push_back(std::stod(cell));
    t.add_row(std::move(row));
  }
  return t;
}

} // namespace gfsim

#endif
