#include <fstream>

#include <json.hpp>

#include "ecgbench/benchgen/benchgen.hpp"
#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"

namespace ecgbench {

using ojson = nlohmann::ordered_json;

std::string case_to_json(const BenchmarkCase& c) {
  ojson o;
  o["schema_version"] = kCaseSchemaVersion;
  o["case_id"] = c.case_id;
  o["record"] = {{"id", c.record_id}, {"path", c.record_path}};
  o["diagnosis_id"] = c.diagnosis_id;
  o["polarity"] = c.polarity == Leaf::Positive ? "+" : "-";
  o["path_id"] = c.path.path_id();
  auto steps = ojson::array();
  for (const auto& s : c.path.steps) steps.push_back({{"finding", s.finding_id}, {"present", s.outcome}});
  o["path"] = std::move(steps);
  o["n_reasoning_turns"] = c.n_reasoning_turns;
  o["distractor_fallback"] = c.distractor_fallback;
  auto loops = ojson::array();
  for (const auto& l : c.loops) {
    loops.push_back({{"finding", l.finding_id}, {"present", l.present}, {"grounding_n", l.grounding_n}});
  }
  o["loops"] = std::move(loops);
  auto turns = ojson::array();
  for (const auto& t : c.turns) {
    ojson jt;
    jt["step"] = step_name(t.step);
    jt["loop"] = t.loop ? ojson(*t.loop) : ojson(nullptr);
    jt["finding"] = t.finding_id;
    jt["prompt"] = t.prompt;
    jt["options"] = t.options;
    jt["gt_answer"] = t.gt_answer;
    jt["gt_rationale"] = t.gt_rationale;
    jt["fallback"] = t.fallback;
    turns.push_back(std::move(jt));
  }
  o["turns"] = std::move(turns);
  return o.dump();
}

BenchmarkCase case_from_json(const std::string& line) {
  BenchmarkCase c;
  try {
    const auto o = ojson::parse(line);
    if (o.at("schema_version").get<int>() != kCaseSchemaVersion) {
      throw SchemaError("unsupported case schema version");
    }
    c.case_id = o.at("case_id").get<std::string>();
    c.record_id = o.at("record").at("id").get<std::string>();
    c.record_path = o.at("record").at("path").get<std::string>();
    c.diagnosis_id = o.at("diagnosis_id").get<std::string>();
    c.polarity = o.at("polarity").get<std::string>() == "+" ? Leaf::Positive : Leaf::Negative;
    c.path.diagnosis_id = c.diagnosis_id;
    c.path.leaf = c.polarity;
    for (const auto& s : o.at("path")) {
      c.path.steps.push_back({s.at("finding").get<std::string>(), s.at("present").get<bool>()});
    }
    c.n_reasoning_turns = o.at("n_reasoning_turns").get<int>();
    c.distractor_fallback = o.value("distractor_fallback", false);
    for (const auto& l : o.at("loops")) {
      c.loops.push_back({l.at("finding").get<std::string>(), l.at("present").get<bool>(),
                         l.at("grounding_n").get<int>()});
    }
    for (const auto& jt : o.at("turns")) {
      Turn t;
      auto step = parse_step(jt.at("step").get<std::string>());
      if (!step) throw SchemaError("unknown step '" + jt.at("step").get<std::string>() + "'");
      t.step = *step;
      if (!jt.at("loop").is_null()) t.loop = jt.at("loop").get<int>();
      t.finding_id = jt.at("finding").get<std::string>();
      t.prompt = jt.at("prompt").get<std::string>();
      t.options = jt.at("options").get<std::vector<std::string>>();
      t.gt_answer = jt.at("gt_answer").get<std::string>();
      t.gt_rationale = jt.at("gt_rationale").get<std::string>();
      t.fallback = jt.value("fallback", false);
      c.turns.push_back(std::move(t));
    }
  } catch (const ojson::exception& e) {
    throw SchemaError(std::string("case: ") + e.what());
  }
  return c;
}

void write_cases(const std::vector<BenchmarkCase>& cases, const std::filesystem::path& path) {
  std::string out;
  for (const auto& c : cases) out += case_to_json(c) + "\n";
  write_file(path, out);
}

std::vector<BenchmarkCase> read_cases(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<BenchmarkCase> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(case_from_json(line));
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ecgbench
