#include <fstream>
#include <set>

#include <json.hpp>

#include "sqlfunc/errors.hpp"
#include "sqlfunc/harness.hpp"

namespace sqlfunc {

using nlohmann::json;

std::vector<PairExample> load_pairs(const std::string& path,
                                    const FieldMap& map) {
  std::ifstream in(path);
  if (!in) throw FormatError(0, "cannot open " + path);
  std::vector<PairExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(lineno, e.what());
    }
    PairExample ex;
    auto need = [&](const std::string& field) -> const json& {
      auto it = j.find(field);
      if (it == j.end())
        throw FormatError(lineno, "missing field '" + field + "'");
      return *it;
    };
    const json& jid = need(map.id);
    ex.id = jid.is_string() ? jid.get<std::string>() : jid.dump();
    ex.db_id = need(map.db_id).get<std::string>();
    ex.ref_sql = need(map.ref_sql).get<std::string>();
    ex.gen_sql = need(map.gen_sql).get<std::string>();
    const json& jl = need(map.label);
    if (jl.is_boolean()) {
      ex.label = jl.get<bool>() ? 1 : 0;
    } else if (jl.is_number_integer()) {
      ex.label = jl.get<int>();
    } else {
      throw FormatError(lineno, "label must be 0/1");
    }
    if (ex.label != 0 && ex.label != 1)
      throw FormatError(lineno, "label must be 0/1");
    if (j.contains(map.prompt) && j[map.prompt].is_string())
      ex.prompt = j[map.prompt].get<std::string>();
    out.push_back(std::move(ex));
  }
  return out;
}

std::map<std::string, Schema> load_schemas_for(
    const std::vector<PairExample>& pairs, const std::string& schema_dir) {
  std::map<std::string, Schema> schemas;
  for (const PairExample& ex : pairs) {
    if (schemas.count(ex.db_id)) continue;
    const std::string path = schema_dir + "/" + ex.db_id + ".json";
    std::ifstream probe(path);
    if (!probe) throw MissingSchema(ex.db_id);
    schemas.emplace(ex.db_id, load_schema_file(path));
  }
  return schemas;
}

}  // namespace sqlfunc
