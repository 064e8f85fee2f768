#include "polaron_app/output.hpp"

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "polaron/errors.hpp"

namespace polaron::app {

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw ContractError("table row width does not match columns");
  rows.push_back(std::move(row));
}

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out += (c ? "," : "") + table.columns[c].name;
  }
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format17(row[c]);
    out += "\n";
  }
  return out;
}

std::string plotdata_text(const Table& table) {
  if (table.rows.empty()) throw ContractError("refusing to write plot data for an empty table");
  std::string out = "#";
  for (const auto& col : table.columns) out += " " + col.name;
  out += "\n# units:";
  for (const auto& col : table.columns) out += " " + col.unit;
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? " " : "") + format17(row[c]);
    out += "\n";
  }
  return out;
}

void emit_plotdata(const Table& table, const std::filesystem::path& path) {
  atomic_write(path, plotdata_text(table));
}

Table read_plotdata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table table;
  std::string line;
  int header = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    if (!line.empty() && line.front() == '#') {
      std::string word;
      fields >> word;
      if (header == 0) {
        while (fields >> word) table.columns.push_back({word, ""});
      } else {
        fields >> word;  // "units:"
        for (auto& col : table.columns) fields >> col.unit;
      }
      ++header;
      continue;
    }
    std::vector<double> row;
    std::string token;
    while (fields >> token) row.push_back(std::stod(token));
    if (!row.empty()) table.add(std::move(row));
  }
  return table;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw std::runtime_error("cannot write " + path.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move output into place at " + path.string());
  }
}

}  // namespace polaron::app
