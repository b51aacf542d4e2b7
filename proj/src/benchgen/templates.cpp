#include <json.hpp>

#include "ecgbench/benchgen/benchgen.hpp"
#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"

namespace ecgbench {

namespace {

constexpr std::array<std::pair<Step, std::string_view>, 7> kSteps = {{
    {Step::Initial, "INITIAL"},
    {Step::CriterionSelection, "CRITERION_SELECTION"},
    {Step::FindingIdentification, "FINDING_IDENTIFICATION"},
    {Step::GroundLead, "GROUND_LEAD"},
    {Step::GroundWave, "GROUND_WAVE"},
    {Step::GroundMeasurement, "GROUND_MEASUREMENT"},
    {Step::DiagnosticDecision, "DIAGNOSTIC_DECISION"},
}};

}  // namespace

std::string_view step_name(Step s) {
  for (const auto& [k, v] : kSteps) {
    if (k == s) return v;
  }
  return "?";
}

std::optional<Step> parse_step(std::string_view name) {
  for (const auto& [k, v] : kSteps) {
    if (v == name) return k;
  }
  return std::nullopt;
}

int loop_stage(Step s) {
  switch (s) {
    case Step::Initial: return 0;
    case Step::CriterionSelection: return 1;
    case Step::FindingIdentification: return 2;
    case Step::GroundLead:
    case Step::GroundWave:
    case Step::GroundMeasurement: return 3;
    case Step::DiagnosticDecision: return 4;
  }
  return 0;
}

std::string option_letter(std::size_t i) { return std::string(1, static_cast<char>('A' + i)); }

const std::string& Templates::at(const std::string& name) const {
  auto it = text.find(name);
  if (it == text.end()) throw ConfigError("missing prompt template '" + name + "'");
  return it->second;
}

std::string Templates::render(const std::string& name,
                              const std::map<std::string, std::string>& vars) const {
  const std::string& t = at(name);
  std::string out;
  for (std::size_t i = 0; i < t.size();) {
    if (t[i] == '{') {
      const auto close = t.find('}', i);
      if (close != std::string::npos) {
        const auto key = t.substr(i + 1, close - i - 1);
        auto it = vars.find(key);
        if (it == vars.end()) {
          throw ConfigError("template '" + name + "' uses unknown placeholder {" + key + "}");
        }
        out += it->second;
        i = close + 1;
        continue;
      }
    }
    out += t[i++];
  }
  return out;
}

Templates parse_templates(const std::string& json_text) {
  Templates t;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    for (const auto& [k, v] : doc.at("templates").items()) t.text[k] = v.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("templates: ") + e.what());
  }
  return t;
}

Templates load_templates(const std::filesystem::path& path) {
  return parse_templates(read_file(path));
}

const Templates& default_templates() {
  static const Templates t = load_templates(default_config_dir() / "templates.json");
  return t;
}

}  // namespace ecgbench
