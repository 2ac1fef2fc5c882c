#pragma once

#include "vizgen/sql/schema.hpp"
#include "vizgen/time.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace vizgen::sql {

inline constexpr std::int64_t kDefaultRowCap = 10'000;
inline constexpr std::int64_t kDefaultDeadlineMs = 30'000;

// Semantic type implied by a declared column type alone; nullopt for
// text-like types, which are decided by distinct-value counts instead.
std::optional<SemanticType> semantic_from_declared(std::string_view declared_type);

// categorical when distinct <= max(20, 5% of rows), unknown otherwise.
SemanticType semantic_for_text(std::size_t distinct, std::size_t rows);

// Result-set inference: declared type when it decides, else the values'
// storage classes (all numeric -> quantitative, all text -> text rule).
SemanticType infer_semantic_type(std::span<const Value> values,
                                 std::string_view declared_type = {});

class Connection {
 public:
  virtual ~Connection() = default;
  virtual SchemaSnapshot introspect(const Clock& clock) = 0;
  virtual ResultTable execute(const ValidatedSql& query, std::int64_t row_cap,
                              std::int64_t deadline_ms) = 0;
};

// One per dialect. Server dialects differ only in identifier quoting and the
// type-name mapping table; this build ships a driver for the embedded engine.
class DialectAdapter {
 public:
  virtual ~DialectAdapter() = default;
  virtual Dialect dialect() const = 0;
  virtual std::string quote_identifier(std::string_view name) const = 0;
  virtual SemanticType map_type(std::string_view declared_type, std::size_t distinct,
                                std::size_t rows) const;
  virtual std::unique_ptr<Connection> connect(const ConnectionConfig& config) const = 0;

 protected:
  // Exact (upper-cased) type names that override the generic rules.
  virtual std::optional<SemanticType> dialect_override(std::string_view upper_type) const;
};

const DialectAdapter& adapter_for(Dialect dialect);

// Quotes only when `name` is not a plain identifier.
std::string quote_if_needed(const DialectAdapter& adapter, std::string_view name);

// Connections keyed by (dialect, location); one in-flight statement per
// connection.
class ConnectionPool {
 public:
  template <typename Fn>
  auto with_connection(const ConnectionConfig& config, Fn&& fn) {
    auto entry = acquire(config);
    std::lock_guard lock(entry->mutex);
    return fn(*entry->connection);
  }

  void clear();

 private:
  struct Entry {
    std::mutex mutex;
    std::unique_ptr<Connection> connection;
  };
  std::shared_ptr<Entry> acquire(const ConnectionConfig& config);

  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
};

ConnectionPool& default_pool();

// Throws ConnectionFailed / PermissionDenied.
SchemaSnapshot retrieve_metadata(const ConnectionConfig& config, const Clock& clock = SystemClock{});

// Throws ExecutionTimeout / ExecutionFailed / ConnectionFailed.
ResultTable execute_sql(const ValidatedSql& query, const ConnectionConfig& config,
                        std::int64_t row_cap = kDefaultRowCap,
                        std::int64_t deadline_ms = kDefaultDeadlineMs);

}  // namespace vizgen::sql
