#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <string>
#include <variant>
#include <vector>

#include "jtpol/core.hpp"

namespace jtpol::io {

/// Cell of a CSV row; doubles print with 15 significant digits.
using Cell = std::variant<double, long, std::string>;

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", *d == 0.0 ? 0.0 : *d);
    return buf;
  }
  if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
  return std::get<std::string>(c);
}

/// In-memory table rendered once and written atomically.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : columns_(header.size()) {
    append_line(header.begin(), header.end(), [](const std::string& s) { return s; });
  }

  void add_row(std::initializer_list<Cell> row) { add_row(std::vector<Cell>(row)); }

  void add_row(const std::vector<Cell>& row) {
    if (row.size() != columns_) throw Error("CsvTable: row has the wrong number of columns");
    append_line(row.begin(), row.end(), format_cell);
    ++rows_;
  }

  std::size_t rows() const noexcept { return rows_; }
  const std::string& text() const noexcept { return text_; }

 private:
  template <class It, class F>
  void append_line(It b, It e, F fmt) {
    for (It it = b; it != e; ++it) {
      if (it != b) text_ += ',';
      text_ += fmt(*it);
    }
    text_ += '\n';
  }

  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Output set of one run: data files plus a JSON manifest listing them.
class RunOutput {
 public:
  RunOutput(std::filesystem::path directory, std::string command)
      : directory_(std::move(directory)) {
    manifest_["command"] = std::move(command);
    manifest_["version"] = JTPOL_VERSION;
    manifest_["files"] = nlohmann::json::array();
  }

  void write(const std::string& name, const CsvTable& table) {
    write_atomic(directory_ / name, table.text());
    manifest_["files"].push_back({{"name", name}, {"rows", table.rows()}});
  }

  nlohmann::json& manifest() noexcept { return manifest_; }
  const std::filesystem::path& directory() const noexcept { return directory_; }

  void finish() { write_atomic(directory_ / "manifest.json", manifest_.dump(2) + "\n"); }

 private:
  std::filesystem::path directory_;
  nlohmann::json manifest_;
};

}  // namespace jtpol::io
