#pragma once

#include "vizgen/sql/fixture.hpp"
#include "vizgen/sql/schema.hpp"

#include <filesystem>
#include <string>

#include <unistd.h>

namespace vizgen::bench {

// Seeded sales database in the temp directory; removed at exit.
class SalesDb {
 public:
  SalesDb()
      : path_(std::filesystem::temp_directory_path() / ("vizgen-bench-" + std::to_string(::getpid()) + ".db")) {
    sql::write_sales_fixture(path_.string());
  }
  ~SalesDb() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  SalesDb(const SalesDb&) = delete;
  SalesDb& operator=(const SalesDb&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline sql::ConnectionConfig sales_connection() {
  static const SalesDb db;
  return {sql::Dialect::Embedded, db.path().string(), true};
}

}  // namespace vizgen::bench
