#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace polaron::app {

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless, "flag" for 0/1 columns
};

struct Table {
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
};

/// Numbers as printed everywhere in outputs: 17 significant digits.
std::string format17(double x);

std::string to_csv(const Table& table);

/// Whitespace-separated columns under a '#' header naming columns and units. Rejects an empty
/// table without touching the file system.
void emit_plotdata(const Table& table, const std::filesystem::path& path);
std::string plotdata_text(const Table& table);
Table read_plotdata(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory followed by a rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace polaron::app
