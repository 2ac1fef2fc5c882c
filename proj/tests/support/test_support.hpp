#pragma once

#include "vizgen/sql/schema.hpp"
#include "vizgen/value.hpp"

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace vizgen::testing {

// Unique directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// The seeded 1,000-row sales database, written once per process.
const std::string& sales_db();

sql::ConnectionConfig sales_connection();

// Directory holding committed test data (tests/data).
std::filesystem::path data_dir();

struct ColumnInit {
  std::string name;
  sql::SemanticType type;
  std::vector<Value> values;
};

// Builds a table from columns of equal length.
sql::ResultTable make_table(std::initializer_list<ColumnInit> columns);

std::string read_text(const std::filesystem::path& path);

}  // namespace vizgen::testing
