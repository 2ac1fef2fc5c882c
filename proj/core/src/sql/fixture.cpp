#include "vizgen/sql/fixture.hpp"

#include "vizgen/error.hpp"
#include "vizgen/json_util.hpp"

#include <fmt/format.h>
#include <sqlite3.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <random>

namespace vizgen::sql {
namespace {

struct DbCloser {
  void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
};
struct StmtFinalizer {
  void operator()(sqlite3_stmt* s) const { sqlite3_finalize(s); }
};

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "sqlite error";
    sqlite3_free(err);
    throw Error(ErrorCode::StorageFailure, msg);
  }
}

}  // namespace

void write_sales_fixture(const std::string& path, std::int64_t rows, std::uint64_t seed) {
  if (rows < 1) throw Error(ErrorCode::InvalidArgument, "rows must be >= 1");
  std::remove(path.c_str());
  sqlite3* raw = nullptr;
  if (sqlite3_open_v2(path.c_str(), &raw, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) !=
      SQLITE_OK) {
    std::unique_ptr<sqlite3, DbCloser> guard(raw);
    throw Error(ErrorCode::StorageFailure, "cannot create " + path);
  }
  std::unique_ptr<sqlite3, DbCloser> db(raw);
  exec(db.get(), "CREATE TABLE sales(month DATE, region TEXT, amount NUMERIC)");
  exec(db.get(), "BEGIN");

  sqlite3_stmt* stmt_raw = nullptr;
  sqlite3_prepare_v2(db.get(), "INSERT INTO sales VALUES (?, ?, ?)", -1, &stmt_raw, nullptr);
  std::unique_ptr<sqlite3_stmt, StmtFinalizer> stmt(stmt_raw);

  static constexpr std::array<const char*, 5> kRegions = {"North", "South", "East", "West",
                                                          "Central"};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 10.0);
  const std::int64_t spike_row = rows * 6 / 10;
  for (std::int64_t i = 0; i < rows; ++i) {
    const std::int64_t month = i * 12 / rows;
    const std::string date = fmt::format("2024-{:02d}-01", month + 1);
    const char* region = kRegions[rng() % kRegions.size()];
    double amount = 100.0 + 15.0 * static_cast<double>(month) + noise(rng);
    if (i == spike_row) amount = 5000.0;
    amount = std::round(amount * 100.0) / 100.0;
    sqlite3_bind_text(stmt.get(), 1, date.c_str(), -1, SQLITE_TRANSIENT);
    sqlite3_bind_text(stmt.get(), 2, region, -1, SQLITE_STATIC);
    sqlite3_bind_double(stmt.get(), 3, amount);
    if (sqlite3_step(stmt.get()) != SQLITE_DONE) {
      throw Error(ErrorCode::StorageFailure, sqlite3_errmsg(db.get()));
    }
    sqlite3_reset(stmt.get());
  }
  exec(db.get(), "COMMIT");
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot read " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

}  // namespace vizgen::sql
