#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecgbench/features/features.hpp"

namespace ecgbench {

// ---------------------------------------------------------------------------
// Predicate language
//
//   expr    := or
//   or      := and ('or' and)*
//   and     := not ('and' not)*
//   not     := 'not' not | cmp
//   cmp     := sum (('<' | '<=' | '>' | '>=' | '==' | '!=') sum)?
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | primary
//   primary := number | '(' expr ')' | call | field
//   field   := ident ('[' lead ']')?
//   call    := ident '(' [arg (',' arg)*] ')'
//   leads   := group-name | '{' lead (',' lead)* '}'
//
// Functions: majority(e), any_beat(e), all_beats(e), count_beats(e), median(e),
// count_leads(leads, e), any_lead(leads, e), all_leads(leads, e), max(e, ...),
// min(e, ...), abs(e).
//
// Values are numbers or undefined; comparisons yield 1 or 0. Boolean operators
// use three-valued logic. Per-beat fields outside a beat quantifier evaluate to
// their median over beats. Per-lead fields without a subscript take the lead
// bound by the innermost lead quantifier.

using Value = std::optional<double>;

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Number, Field, Unary, Binary, Call };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;  // field, operator or function
  std::optional<Lead> lead;
  std::vector<Lead> lead_set;  // for lead quantifiers
  std::vector<ExprPtr> args;
};

/// Throws SchemaError naming the offset of the problem.
ExprPtr parse_predicate(const std::string& text);

/// Names of all fields referenced by the expression.
std::vector<std::string> referenced_fields(const ExprPtr& e);

bool is_known_field(const std::string& name);
bool is_lead_field(const std::string& name);

struct EvalContext {
  const BeatMeasurements* m = nullptr;
  std::optional<std::size_t> beat;
  std::optional<Lead> lead;
};

Value evaluate(const ExprPtr& e, const EvalContext& ctx);

// ---------------------------------------------------------------------------
// Catalog

enum class GroundingKind { Lead, Wave, Measurement };

std::string_view grounding_kind_name(GroundingKind k);

struct LeadGroundingSpec {
  std::vector<Lead> candidates;
  ExprPtr where;  // evaluated with each candidate bound; null keeps all
  std::string where_text;
};

struct WaveGroundingSpec {
  std::string source;  // P, QRS, T, PR, QT, ST, orphan_P, beat
  ExprPtr where;       // per beat; null keeps every beat
  std::string where_text;
};

struct MeasurementGroundingSpec {
  ExprPtr expr;
  std::string expr_text;
  std::string unit;  // ms, mV, deg, bpm, count
  ExprPtr where;
  std::string where_text;
};

struct CriterionSpec {
  std::string finding_id;
  std::string display_name;
  std::string category;
  std::string predicate_text;
  ExprPtr predicate;
  std::vector<GroundingKind> grounding_kinds;  // in Lead, Wave, Measurement order
  std::optional<LeadGroundingSpec> lead;
  std::optional<WaveGroundingSpec> wave;
  std::optional<MeasurementGroundingSpec> measurement;
  std::string lead_group;
  std::string reference;
};

struct Catalog {
  std::vector<CriterionSpec> criteria;
  std::vector<std::vector<std::string>> exclusive_groups;

  const CriterionSpec* find(const std::string& id) const;
  const CriterionSpec& at(const std::string& id) const;
  std::vector<std::string> categories() const;
};

Catalog parse_catalog(const std::string& json_text);
Catalog load_catalog(const std::filesystem::path& path);
std::filesystem::path default_config_dir();
const Catalog& default_catalog();

// ---------------------------------------------------------------------------
// Findings

struct TimeSpan {
  double onset_s = 0.0;
  double offset_s = 0.0;
};

struct MeasuredValue {
  double value = 0.0;
  std::string unit;
};

struct Grounding {
  std::vector<Lead> leads;
  std::vector<TimeSpan> segments;
  std::optional<MeasuredValue> value;
};

struct Finding {
  std::string finding_id;
  bool present = false;
  bool undefined = false;  // predicate could not be evaluated
  Grounding grounding;
};

std::vector<Finding> evaluate_findings(const BeatMeasurements& m, const Catalog& catalog);

const Finding* find_finding(const std::vector<Finding>& findings, const std::string& id);

std::vector<Finding> findings_by_category(const std::vector<Finding>& findings,
                                          const Catalog& catalog, const std::string& category);

/// Bin width used for measurement option ranges of a unit.
double unit_bin_width(const std::string& unit);

}  // namespace ecgbench
