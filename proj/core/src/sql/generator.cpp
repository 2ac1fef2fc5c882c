#include "vizgen/sql/generator.hpp"

#include "vizgen/error.hpp"
#include "vizgen/sql/database.hpp"

#include <algorithm>
#include <cctype>

namespace vizgen::sql {
namespace {

bool has_token(const std::vector<std::string>& tokens, std::string_view t) {
  return std::find(tokens.begin(), tokens.end(), t) != tokens.end();
}

bool has_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      return true;
    }
  }
  return false;
}

// Column "order_date" matches the token run "order date" as well as the
// single token "order_date" would, were underscores kept.
bool names_match(const std::vector<std::string>& tokens, std::string_view name) {
  return has_phrase(tokens, question_tokens(name));
}

bool table_named(const std::vector<std::string>& tokens, std::string_view table) {
  const std::string lower = to_lower(table);
  if (names_match(tokens, lower)) return true;
  // Singular and plural spellings of a one-word table name.
  if (lower.size() > 1 && lower.back() == 's' && has_token(tokens, lower.substr(0, lower.size() - 1))) {
    return true;
  }
  return has_token(tokens, lower + "s");
}

}  // namespace

std::vector<std::string> question_tokens(std::string_view question) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : question) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string describe_schema(std::string_view question, const SchemaSnapshot& snapshot) {
  std::string out = "Question: " + std::string(question) + "\nTables:\n";
  for (const auto& table : snapshot.tables) {
    out += "- " + table.name + " (" + std::to_string(table.row_count) + " rows)\n";
    for (const auto& col : table.columns) {
      out += "  - " + col.name + " " + (col.declared_type.empty() ? "ANY" : col.declared_type) +
             " " + std::string(to_string(col.semantic_type));
      if (!col.sample_values.empty()) {
        out += " e.g.";
        for (const auto& s : col.sample_values) out += " " + s + ";";
        out.pop_back();
      }
      out += "\n";
    }
  }
  out += "Reply with one read-only SELECT statement.";
  return out;
}

SqlPlan fallback_generate_sql(std::string_view question, const SchemaSnapshot& snapshot) {
  if (snapshot.tables.empty()) throw Error(ErrorCode::NoTables, "the database has no tables");
  const auto tokens = question_tokens(question);

  std::vector<const TableMeta*> candidates;
  for (const auto& t : snapshot.tables) {
    const bool has_measure = std::any_of(t.columns.begin(), t.columns.end(), [](const ColumnMeta& c) {
      return c.semantic_type == SemanticType::Quantitative;
    });
    if (has_measure) candidates.push_back(&t);
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::NoUsableColumns, "no quantitative column in any table");
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const TableMeta* a, const TableMeta* b) {
    return to_lower(a->name) < to_lower(b->name);
  });

  const TableMeta* table = nullptr;
  int best = -1;
  for (const TableMeta* t : candidates) {
    int score = table_named(tokens, t->name) ? 1 : 0;
    for (const auto& c : t->columns) score += names_match(tokens, c.name) ? 1 : 0;
    if (score > best) {
      best = score;
      table = t;
    }
  }

  const ColumnMeta* measure = nullptr;
  const ColumnMeta* temporal = nullptr;
  const ColumnMeta* categorical = nullptr;
  for (const auto& c : table->columns) {
    if (!names_match(tokens, c.name)) continue;
    if (!measure && c.semantic_type == SemanticType::Quantitative) measure = &c;
    if (!temporal && c.semantic_type == SemanticType::Temporal) temporal = &c;
    if (!categorical && c.semantic_type == SemanticType::Categorical) categorical = &c;
  }
  if (!measure) {
    for (const auto& c : table->columns) {
      if (c.semantic_type == SemanticType::Quantitative) {
        measure = &c;
        break;
      }
    }
  }
  const ColumnMeta* dimension = temporal ? temporal : categorical;

  std::string aggregate = "SUM";
  if (has_token(tokens, "average") || has_token(tokens, "mean")) {
    aggregate = "AVG";
  } else if (has_token(tokens, "count") || has_phrase(tokens, {"number", "of"})) {
    aggregate = "COUNT";
  }

  const DialectAdapter& q = adapter_for(Dialect::Embedded);
  const std::string t = quote_if_needed(q, table->name);
  const std::string m = quote_if_needed(q, measure->name);
  SqlPlan plan;
  plan.generator = Generator::Fallback;
  plan.referenced_tables = {table->name};
  if (dimension) {
    const std::string d = quote_if_needed(q, dimension->name);
    plan.raw_sql = "SELECT " + d + ", " + aggregate + "(" + m + ") FROM " + t + " GROUP BY " + d +
                   " ORDER BY " + d;
    plan.rationale = aggregate + " of " + measure->name + " per " + dimension->name + " from " +
                     table->name + " (keyword match)";
  } else {
    plan.raw_sql = "SELECT " + m + " FROM " + t;
    plan.rationale = measure->name + " from " + table->name + " (keyword match, no dimension)";
  }
  return plan;
}

SqlPlan generate_sql(std::string_view question, const SchemaSnapshot& snapshot,
                     const providers::Providers& providers, providers::ModelUsage* usage) {
  using providers::FieldKind;
  if (snapshot.tables.empty()) throw Error(ErrorCode::NoTables, "the database has no tables");
  if (providers.model_for(providers::TaskTag::SqlGenerate)->enabled()) {
    providers::StructuredPrompt prompt{providers::TaskTag::SqlGenerate,
                                       describe_schema(question, snapshot),
                                       {{"sql", FieldKind::String, true},
                                        {"rationale", FieldKind::String, true},
                                        {"tables", FieldKind::Array, true}}};
    try {
      const auto reply = providers::complete(providers, prompt, usage).value;
      SqlPlan plan;
      plan.raw_sql = reply.at("sql").get<std::string>();
      plan.rationale = reply.at("rationale").get<std::string>();
      for (const auto& t : reply.at("tables")) {
        if (t.is_string()) plan.referenced_tables.push_back(t.get<std::string>());
      }
      plan.generator = Generator::Model;
      if (!plan.raw_sql.empty()) return plan;
    } catch (const Error&) {
      // Falls through to the deterministic generator.
    } catch (const Json::exception&) {
    }
  }
  try {
    return fallback_generate_sql(question, snapshot);
  } catch (const Error& e) {
    throw Error(ErrorCode::GenerationFailed, e.message(), std::string(to_string(e.code())));
  }
}

}  // namespace vizgen::sql
