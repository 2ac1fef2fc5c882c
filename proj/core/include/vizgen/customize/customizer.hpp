#pragma once

#include "vizgen/json_util.hpp"
#include "vizgen/providers/providers.hpp"
#include "vizgen/viz/chart_spec.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::customize {

enum class OpKind { Set, Remove };

struct PatchOp {
  OpKind op = OpKind::Set;
  std::string path;          // dotted, from the allowlist
  std::optional<Json> value;  // present iff op == Set

  bool operator==(const PatchOp&) const = default;
};

struct ChartPatch {
  std::string target_chart;
  std::vector<PatchOp> ops;  // non-empty

  bool operator==(const ChartPatch&) const = default;
};

void to_json(Json& j, const PatchOp& op);
void from_json(const Json& j, PatchOp& op);
void to_json(Json& j, const ChartPatch& p);
void from_json(const Json& j, ChartPatch& p);

// mark, title, style.{mark_color,palette,x_label,y_label} and
// encodings.<channel>.{sort,aggregate,field}.
bool path_allowed(std::string_view path);

const std::vector<std::string_view>& palette_names();

// Lexicon first; phrasings it does not cover go to the model, whose ops are
// filtered to the allowlist. Throws Unparseable.
ChartPatch parse_customization(std::string_view command, const viz::ChartSpec& chart,
                               const providers::Providers& providers,
                               providers::ModelUsage* usage = nullptr);

// Deterministic part of parse_customization; empty ops when nothing matches.
ChartPatch lexicon_parse(std::string_view command, const viz::ChartSpec& chart);

struct ValidatedPatch {
  ChartPatch patch;                   // input ops plus recorded reassignments
  std::vector<std::string> warnings;  // e.g. a forced mark that ranks poorly
};

inline constexpr double kPoorMarkScore = 0.5;

// Throws IllegalPath, BadValue, IncompatibleMark, UnknownChart (target
// mismatch), InvalidArgument (no ops).
ValidatedPatch validate_patch(const viz::ChartSpec& chart, const ChartPatch& patch);

// Validates, then applies every op to a copy. chart_id is kept and revision
// goes up by one; `chart` itself is never modified.
viz::ChartSpec apply_patch(const viz::ChartSpec& chart, const ChartPatch& patch);

}  // namespace vizgen::customize
