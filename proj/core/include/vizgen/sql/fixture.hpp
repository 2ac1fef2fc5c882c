#pragma once

#include <cstdint>
#include <string>

namespace vizgen::sql {

inline constexpr std::uint64_t kFixtureSeed = 20240101;

// Writes sales(month DATE, region TEXT, amount NUMERIC) with `rows` rows
// spread evenly over the twelve months of 2024, inserted in month order.
// amount grows linearly per month plus noise; one row carries a spike.
// Replaces any existing file at `path`. Same (rows, seed) -> same bytes.
void write_sales_fixture(const std::string& path, std::int64_t rows = 1000,
                         std::uint64_t seed = kFixtureSeed);

// sha256 of the file contents.
std::string file_checksum(const std::string& path);

}  // namespace vizgen::sql
