#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sqlfunc {

enum class ColType { Int, Real, Text, Bool, Date };

ColType col_type_from_string(const std::string& s);
const char* col_type_name(ColType t);

struct Column {
  std::string name;  // lowercased
  ColType type = ColType::Text;
};

struct ForeignKey {
  std::string column;
  std::string ref_table;
  std::string ref_column;
};

struct Table {
  std::string name;  // lowercased
  std::vector<Column> columns;
  std::vector<std::string> primary_key;
  std::vector<ForeignKey> foreign_keys;

  const Column* find_column(const std::string& lowered_name) const;
};

struct Schema {
  std::string db_id;
  std::vector<Table> tables;

  const Table* find_table(const std::string& lowered_name) const;
  /// Validates name uniqueness and foreign key targets; throws FormatError.
  void validate() const;
};

/// Parses the schema JSON document:
/// {db_id, tables:[{name, columns:[{name,type}], primary_key:[...],
///  foreign_keys:[[col, table, col]]}]}
Schema schema_from_json(const std::string& json_text);
Schema load_schema_file(const std::string& path);
std::string schema_to_json(const Schema& s);

}  // namespace sqlfunc
