#include "sqlfunc/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sqlfunc/errors.hpp"

namespace sqlfunc {

using nlohmann::json;

namespace {
std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace

ColType col_type_from_string(const std::string& s) {
  std::string t = lower(s);
  if (t == "int" || t == "integer" || t == "number") return ColType::Int;
  if (t == "real" || t == "float" || t == "double" || t == "numeric")
    return ColType::Real;
  if (t == "text" || t == "varchar" || t == "char" || t == "string" ||
      t == "others")
    return ColType::Text;
  if (t == "bool" || t == "boolean") return ColType::Bool;
  if (t == "date" || t == "time" || t == "datetime" || t == "timestamp")
    return ColType::Date;
  throw FormatError(0, "unknown column type: " + s);
}

const char* col_type_name(ColType t) {
  switch (t) {
    case ColType::Int: return "int";
    case ColType::Real: return "real";
    case ColType::Text: return "text";
    case ColType::Bool: return "bool";
    case ColType::Date: return "date";
  }
  return "text";
}

const Column* Table::find_column(const std::string& lowered_name) const {
  for (const Column& c : columns)
    if (c.name == lowered_name) return &c;
  return nullptr;
}

const Table* Schema::find_table(const std::string& lowered_name) const {
  for (const Table& t : tables)
    if (t.name == lowered_name) return &t;
  return nullptr;
}

void Schema::validate() const {
  std::set<std::string> names;
  for (const Table& t : tables) {
    if (!names.insert(t.name).second)
      throw FormatError(0, "duplicate table name: " + t.name);
    std::set<std::string> cols;
    for (const Column& c : t.columns)
      if (!cols.insert(c.name).second)
        throw FormatError(0, "duplicate column " + t.name + "." + c.name);
    for (const std::string& pk : t.primary_key)
      if (!t.find_column(pk))
        throw FormatError(0, "primary key column missing: " + t.name + "." + pk);
  }
  for (const Table& t : tables) {
    for (const ForeignKey& fk : t.foreign_keys) {
      if (!t.find_column(fk.column))
        throw FormatError(0, "foreign key column missing: " + fk.column);
      const Table* rt = find_table(fk.ref_table);
      if (!rt) throw FormatError(0, "foreign key table missing: " + fk.ref_table);
      if (!rt->find_column(fk.ref_column))
        throw FormatError(0, "foreign key target missing: " + fk.ref_table +
                                 "." + fk.ref_column);
    }
  }
}

Schema schema_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(0, std::string("schema JSON: ") + e.what());
  }
  Schema s;
  s.db_id = j.value("db_id", "");
  if (!j.contains("tables") || !j["tables"].is_array())
    throw FormatError(0, "schema JSON: missing tables array");
  for (const auto& jt : j["tables"]) {
    Table t;
    t.name = lower(jt.at("name").get<std::string>());
    for (const auto& jc : jt.at("columns")) {
      Column c;
      c.name = lower(jc.at("name").get<std::string>());
      c.type = col_type_from_string(jc.value("type", "text"));
      t.columns.push_back(std::move(c));
    }
    if (jt.contains("primary_key"))
      for (const auto& pk : jt["primary_key"])
        t.primary_key.push_back(lower(pk.get<std::string>()));
    if (jt.contains("foreign_keys"))
      for (const auto& fk : jt["foreign_keys"]) {
        if (!fk.is_array() || fk.size() != 3)
          throw FormatError(0, "foreign key must be [col, table, col]");
        t.foreign_keys.push_back(ForeignKey{lower(fk[0].get<std::string>()),
                                            lower(fk[1].get<std::string>()),
                                            lower(fk[2].get<std::string>())});
      }
    s.tables.push_back(std::move(t));
  }
  s.validate();
  return s;
}

Schema load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingSchema(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return schema_from_json(ss.str());
}

std::string schema_to_json(const Schema& s) {
  json j;
  j["db_id"] = s.db_id;
  j["tables"] = json::array();
  for (const Table& t : s.tables) {
    json jt;
    jt["name"] = t.name;
    jt["columns"] = json::array();
    for (const Column& c : t.columns)
      jt["columns"].push_back({{"name", c.name}, {"type", col_type_name(c.type)}});
    jt["primary_key"] = t.primary_key;
    jt["foreign_keys"] = json::array();
    for (const ForeignKey& fk : t.foreign_keys)
      jt["foreign_keys"].push_back({fk.column, fk.ref_table, fk.ref_column});
    j["tables"].push_back(std::move(jt));
  }
  return j.dump(2);
}

}  // namespace sqlfunc
