#pragma once

#include <string>

#include "sqlfunc/parser.hpp"
#include "sqlfunc/resolve.hpp"
#include "sqlfunc/rules.hpp"
#include "sqlfunc/schema.hpp"

inline sqlfunc::Schema test_schema(const std::string& name) {
  return sqlfunc::load_schema_file(std::string(SQLFUNC_TEST_DATA_DIR) +
                                   "/schemas/" + name + ".json");
}

inline std::string test_data_path(const std::string& rel) {
  return std::string(SQLFUNC_TEST_DATA_DIR) + "/" + rel;
}

inline sqlfunc::Rot lower_sql(const std::string& sql,
                              const sqlfunc::Schema& schema) {
  using namespace sqlfunc;
  return lower_to_rot(resolve_names(parse_sql(sql), schema), schema);
}

inline sqlfunc::Rot canon_sql(
    const std::string& sql, const sqlfunc::Schema& schema,
    const sqlfunc::RuleSet& rules = sqlfunc::RuleSet::default_set()) {
  return sqlfunc::canonicalize(lower_sql(sql, schema), rules);
}
