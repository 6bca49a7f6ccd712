// table.hpp
//
// Fixed-schema tables written as CSV, with an optional JSON mirror.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace casimir_fp {

enum class CellKind { kReal, kInteger, kText };

struct Column {
  std::string name;
  CellKind kind = CellKind::kReal;
  bool operator==(const Column&) const = default;
};

using Schema = std::vector<Column>;
using Cell = std::variant<double, std::int64_t, std::string>;
using Row = std::vector<Cell>;

struct Table {
  Schema schema;
  std::vector<Row> rows;

  // Throws ConfigError naming the first column whose cell does not match.
  void validate() const;
  void add(Row row);
};

// Shortest text that reads back to the same double; "nan" for NaN.
std::string format_real(double v);

std::string to_csv(const Table& table, const std::string& header_comment = "");
nlohmann::json to_json(const Table& table);

// Parses CSV produced by to_csv against a known schema; '#' lines skipped.
Table parse_csv(const std::string& text, const Schema& schema);

struct TableTarget {
  std::filesystem::path csv;
  bool json_mirror = false;  // also write <csv stem>.json
};

// Writes the CSV (and mirror) with a "# ... manifest <hash>" comment line.
// I/O failures throw std::runtime_error with the OS message.
void emit_table(const Table& table, const TableTarget& target, const std::string& manifest_hash);

}  // namespace casimir_fp
