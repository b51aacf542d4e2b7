#include <algorithm>
#include <cstdlib>
#include <set>

#include <json.hpp>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"
#include "ecgbench/findings/findings.hpp"

#ifndef ECGBENCH_CONFIG_DIR
#define ECGBENCH_CONFIG_DIR "config"
#endif

namespace ecgbench {

using json = nlohmann::json;

std::string_view grounding_kind_name(GroundingKind k) {
  switch (k) {
    case GroundingKind::Lead: return "lead";
    case GroundingKind::Wave: return "wave";
    case GroundingKind::Measurement: return "measurement";
  }
  return "?";
}

namespace {

const std::set<std::string> kWaveSources = {"P", "QRS", "T", "PR", "QT", "ST", "orphan_P", "beat"};
const std::set<std::string> kUnits = {"ms", "mV", "deg", "bpm", "count"};

std::string req_string(const json& o, const std::string& key, const std::string& ptr) {
  if (!o.contains(key) || !o[key].is_string() || o[key].get<std::string>().empty()) {
    throw SchemaError(ptr + "/" + key + ": required non-empty string");
  }
  return o[key].get<std::string>();
}

ExprPtr parse_at(const std::string& text, const std::string& ptr) {
  try {
    return parse_predicate(text);
  } catch (const SchemaError& e) {
    throw SchemaError(ptr + ": " + e.what());
  }
}

ExprPtr optional_where(const json& o, const std::string& ptr, std::string& text) {
  if (!o.contains("where")) return nullptr;
  text = req_string(o, "where", ptr);
  return parse_at(text, ptr + "/where");
}

}  // namespace

const CriterionSpec* Catalog::find(const std::string& id) const {
  for (const auto& c : criteria) {
    if (c.finding_id == id) return &c;
  }
  return nullptr;
}

const CriterionSpec& Catalog::at(const std::string& id) const {
  if (const auto* c = find(id)) return *c;
  throw MissingFindingError("finding '" + id + "' is not in the catalog");
}

std::vector<std::string> Catalog::categories() const {
  std::vector<std::string> out;
  for (const auto& c : criteria) {
    if (std::find(out.begin(), out.end(), c.category) == out.end()) out.push_back(c.category);
  }
  return out;
}

Catalog parse_catalog(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("/: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("/: expected an object");
  if (!doc.contains("criteria") || !doc["criteria"].is_array() || doc["criteria"].empty()) {
    throw SchemaError("/criteria: required non-empty array");
  }
  Catalog cat;
  std::set<std::string> ids;
  const auto& arr = doc["criteria"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ptr = "/criteria/" + std::to_string(i);
    const auto& o = arr[i];
    if (!o.is_object()) throw SchemaError(ptr + ": expected an object");
    CriterionSpec c;
    c.finding_id = req_string(o, "id", ptr);
    if (!ids.insert(c.finding_id).second) {
      throw SchemaError(ptr + "/id: duplicate finding_id '" + c.finding_id + "'");
    }
    c.display_name = req_string(o, "name", ptr);
    c.category = req_string(o, "category", ptr);
    c.predicate_text = req_string(o, "predicate", ptr);
    c.predicate = parse_at(c.predicate_text, ptr + "/predicate");
    c.reference = o.value("reference", std::string{});
    c.lead_group = o.value("lead_group", std::string{});
    if (!c.lead_group.empty() && !lead_group(c.lead_group)) {
      throw SchemaError(ptr + "/lead_group: unknown group '" + c.lead_group + "'");
    }

    if (!o.contains("grounding") || !o["grounding"].is_object() || o["grounding"].empty()) {
      throw SchemaError(ptr + "/grounding: at least one grounding kind is required");
    }
    const auto& g = o["grounding"];
    const std::string gptr = ptr + "/grounding";
    for (const auto& [key, _] : g.items()) {
      if (key != "lead" && key != "wave" && key != "measurement") {
        throw SchemaError(gptr + "/" + key + ": unknown grounding kind");
      }
    }
    if (g.contains("lead")) {
      const auto& l = g["lead"];
      LeadGroundingSpec spec;
      const std::string lptr = gptr + "/lead";
      if (l.contains("leads")) {
        for (const auto& name : l["leads"]) {
          auto lead = parse_lead(name.get<std::string>());
          if (!lead) throw SchemaError(lptr + "/leads: unknown lead '" + name.get<std::string>() + "'");
          spec.candidates.push_back(*lead);
        }
      } else {
        const std::string group = l.value("group", c.lead_group);
        auto leads = lead_group(group);
        if (!leads) throw SchemaError(lptr + "/group: unknown group '" + group + "'");
        spec.candidates = *leads;
      }
      spec.where = optional_where(l, lptr, spec.where_text);
      c.lead = std::move(spec);
      c.grounding_kinds.push_back(GroundingKind::Lead);
    }
    if (g.contains("wave")) {
      const auto& w = g["wave"];
      const std::string wptr = gptr + "/wave";
      WaveGroundingSpec spec;
      spec.source = req_string(w, "source", wptr);
      if (!kWaveSources.count(spec.source)) {
        throw SchemaError(wptr + "/source: unknown wave source '" + spec.source + "'");
      }
      spec.where = optional_where(w, wptr, spec.where_text);
      c.wave = std::move(spec);
      c.grounding_kinds.push_back(GroundingKind::Wave);
    }
    if (g.contains("measurement")) {
      const auto& mm = g["measurement"];
      const std::string mptr = gptr + "/measurement";
      MeasurementGroundingSpec spec;
      spec.expr_text = req_string(mm, "expr", mptr);
      spec.expr = parse_at(spec.expr_text, mptr + "/expr");
      spec.unit = req_string(mm, "unit", mptr);
      if (!kUnits.count(spec.unit)) throw SchemaError(mptr + "/unit: unknown unit '" + spec.unit + "'");
      spec.where = optional_where(mm, mptr, spec.where_text);
      c.measurement = std::move(spec);
      c.grounding_kinds.push_back(GroundingKind::Measurement);
    }
    cat.criteria.push_back(std::move(c));
  }

  if (doc.contains("exclusive")) {
    const auto& ex = doc["exclusive"];
    for (std::size_t i = 0; i < ex.size(); ++i) {
      std::vector<std::string> group;
      for (const auto& id : ex[i]) {
        const auto s = id.get<std::string>();
        if (!ids.count(s)) {
          throw SchemaError("/exclusive/" + std::to_string(i) + ": unknown finding '" + s + "'");
        }
        group.push_back(s);
      }
      cat.exclusive_groups.push_back(std::move(group));
    }
  }
  return cat;
}

Catalog load_catalog(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return parse_catalog(text);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::filesystem::path default_config_dir() {
  if (const char* env = std::getenv("ECGBENCH_CONFIG_DIR")) return env;
  return ECGBENCH_CONFIG_DIR;
}

const Catalog& default_catalog() {
  static const Catalog cat = load_catalog(default_config_dir() / "catalog.json");
  return cat;
}

}  // namespace ecgbench
