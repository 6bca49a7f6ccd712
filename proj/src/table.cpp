#include "casimir_fp/table.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "casimir_fp/errors.hpp"

namespace casimir_fp {

namespace {

const char* kind_name(CellKind k) {
  switch (k) {
    case CellKind::kReal: return "real";
    case CellKind::kInteger: return "integer";
    case CellKind::kText: return "text";
  }
  return "?";
}

bool matches(const Cell& cell, CellKind kind) {
  switch (kind) {
    case CellKind::kReal: return std::holds_alternative<double>(cell);
    case CellKind::kInteger: return std::holds_alternative<std::int64_t>(cell);
    case CellKind::kText: return std::holds_alternative<std::string>(cell);
  }
  return false;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

void Table::validate() const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.size()) {
      std::ostringstream msg;
      msg << "row " << r << " has " << rows[r].size() << " cells, schema has " << schema.size();
      if (rows[r].size() < schema.size()) msg << " (missing column '" << schema[rows[r].size()].name << "')";
      throw ConfigError(msg.str());
    }
    for (std::size_t k = 0; k < schema.size(); ++k)
      if (!matches(rows[r][k], schema[k].kind))
        throw ConfigError("row " + std::to_string(r) + ": column '" + schema[k].name +
                          "' expects a " + kind_name(schema[k].kind) + " value");
  }
}

void Table::add(Row row) {
  rows.push_back(std::move(row));
  try {
    Table probe{schema, {rows.back()}};
    probe.validate();
  } catch (...) {
    rows.pop_back();
    throw;
  }
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string to_csv(const Table& table, const std::string& header_comment) {
  table.validate();
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  for (std::size_t k = 0; k < table.schema.size(); ++k)
    os << (k ? "," : "") << table.schema[k].name;
  os << '\n';
  for (const Row& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) os << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) os << format_real(v);
            else if constexpr (std::is_same_v<T, std::int64_t>) os << v;
            else os << quote(v);
          },
          row[k]);
    }
    os << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const Table& table) {
  table.validate();
  nlohmann::json cols = nlohmann::json::array();
  for (const Column& c : table.schema) cols.push_back(c.name);
  nlohmann::json rows = nlohmann::json::array();
  for (const Row& row : table.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t k = 0; k < row.size(); ++k)
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              if (std::isfinite(v)) r[table.schema[k].name] = v;
              else r[table.schema[k].name] = nullptr;
            } else {
              r[table.schema[k].name] = v;
            }
          },
          row[k]);
    rows.push_back(std::move(r));
  }
  return {{"columns", cols}, {"rows", rows}};
}

Table parse_csv(const std::string& text, const Schema& schema) {
  std::istringstream in(text);
  std::string line;
  bool header = true;
  Table t{schema, {}};
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (header) {
      header = false;
      for (std::size_t k = 0; k < schema.size() || k < fields.size(); ++k) {
        if (k >= fields.size() || k >= schema.size() || fields[k] != schema[k].name)
          throw ConfigError("CSV header mismatch at column " + std::to_string(k) + ": expected '" +
                            (k < schema.size() ? schema[k].name : "") + "', found '" +
                            (k < fields.size() ? fields[k] : "") + "'");
      }
      continue;
    }
    if (fields.size() != schema.size())
      throw ConfigError("CSV row has " + std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(schema.size()));
    Row row;
    for (std::size_t k = 0; k < schema.size(); ++k) {
      const std::string& f = fields[k];
      switch (schema[k].kind) {
        case CellKind::kReal: {
          double v = 0.0;
          if (f == "nan") v = std::nan("");
          else if (f == "inf") v = HUGE_VAL;
          else if (f == "-inf") v = -HUGE_VAL;
          else {
            auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || p != f.data() + f.size())
              throw ConfigError("column '" + schema[k].name + "': bad number '" + f + "'");
          }
          row.emplace_back(v);
          break;
        }
        case CellKind::kInteger: {
          std::int64_t v = 0;
          auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
          if (ec != std::errc() || p != f.data() + f.size())
            throw ConfigError("column '" + schema[k].name + "': bad integer '" + f + "'");
          row.emplace_back(v);
          break;
        }
        case CellKind::kText:
          row.emplace_back(f);
          break;
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (header) throw ConfigError("CSV has no header line");
  return t;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error(path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": " + std::strerror(errno));
  out << content;
  out.close();
  if (!out) throw std::runtime_error(path.string() + ": " + std::strerror(errno));
}

}  // namespace

void emit_table(const Table& table, const TableTarget& target, const std::string& manifest_hash) {
  write_file(target.csv, to_csv(table, "casimir_fp manifest " + manifest_hash));
  if (target.json_mirror) {
    auto mirror = target.csv;
    mirror.replace_extension(".json");
    nlohmann::json doc = to_json(table);
    doc["manifest"] = manifest_hash;
    write_file(mirror, doc.dump(1) + "\n");
  }
}

}  // namespace casimir_fp
