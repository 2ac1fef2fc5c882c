#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vizgen::testing {

struct CorpusStatement {
  std::string sql;
  bool single_select = false;  // ground truth by construction
};

// Deterministic mix of read queries, DML, DDL, admin statements and
// multi-statement scripts against the sales fixture schema, with case,
// comment and whitespace mutations.
std::vector<CorpusStatement> sql_fuzz_corpus(std::size_t count = 1000, std::uint64_t seed = 7);

}  // namespace vizgen::testing
