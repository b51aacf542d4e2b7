#include <json.hpp>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"
#include "ecgbench/core/rng.hpp"
#include "ecgbench/harness/harness.hpp"

namespace ecgbench {

namespace {

const Turn& turn_of(const ChatRequest& r) {
  if (!r.turn) throw EndpointError("mock model needs the current turn");
  return *r.turn;
}

std::string correct_answer(const Turn& t) { return t.gt_answer; }

}  // namespace

std::string wrong_answer(const Turn& t) {
  if (t.options.empty()) {
    return normalize_reply(t.gt_answer) == "yes" ? default_templates().at("answer_no")
                                                  : default_templates().at("answer_yes");
  }
  for (const auto& o : t.options) {
    if (o != t.gt_answer) return o;
  }
  return "";
}

std::string PerfectModel::reply(const ChatRequest& r) { return correct_answer(turn_of(r)); }

std::string WrongModel::reply(const ChatRequest& r) { return wrong_answer(turn_of(r)); }

std::string RandomModel::describe() const { return "mock:random:" + std::to_string(seed_); }

std::string RandomModel::reply(const ChatRequest& r) {
  const Turn& t = turn_of(r);
  const std::string key = (r.bench_case ? r.bench_case->case_id : std::string()) + "#" +
                          std::to_string(r.turn_index) + (r.gt_rda ? "#rda" : "");
  Rng rng(derive_seed(seed_, key));
  if (t.options.empty()) {
    return rng.coin() ? default_templates().at("answer_yes") : default_templates().at("answer_no");
  }
  return option_letter(rng.index(t.options.size()));
}

ScriptedModel::ScriptedModel(const std::string& json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    default_ = j.value("default", "correct");
    initial_ = j.value("initial", "");
    gt_rda_ = j.value("gt_rda", "");
    for (const auto& jr : j.value("rules", nlohmann::json::array())) {
      Rule r;
      if (jr.contains("case") && jr["case"] != "*") r.case_id = jr["case"].get<std::string>();
      if (jr.contains("diagnosis")) r.diagnosis = jr["diagnosis"].get<std::string>();
      if (jr.contains("loop")) r.loop = jr["loop"].get<int>();
      if (jr.contains("step")) {
        r.step = parse_step(jr["step"].get<std::string>());
        if (!r.step) throw ConfigError("script: unknown step " + jr["step"].get<std::string>());
      }
      if (jr.contains("sub")) r.sub = jr["sub"].get<int>();
      r.answer = jr.at("answer").get<std::string>();
      rules_.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("script: ") + e.what());
  }
}

ScriptedModel ScriptedModel::load(const std::filesystem::path& path) {
  return ScriptedModel(read_file(path));
}

std::string ScriptedModel::reply(const ChatRequest& r) {
  const Turn& t = turn_of(r);
  auto resolve = [&](const std::string& answer) {
    if (answer == "correct") return correct_answer(t);
    if (answer == "wrong") return wrong_answer(t);
    return answer;
  };
  if (r.gt_rda && !gt_rda_.empty()) return resolve(gt_rda_);
  if (!r.gt_rda && t.step == Step::Initial && !initial_.empty()) return resolve(initial_);

  int sub = 0;
  if (r.bench_case && !r.gt_rda) {
    for (std::size_t i = 0; i < r.turn_index && i < r.bench_case->turns.size(); ++i) {
      const auto& prev = r.bench_case->turns[i];
      if (prev.step == t.step && prev.loop == t.loop) ++sub;
    }
  }
  for (const auto& rule : rules_) {
    if (r.gt_rda) break;
    if (rule.case_id && (!r.bench_case || *rule.case_id != r.bench_case->case_id)) continue;
    if (rule.diagnosis && (!r.bench_case || *rule.diagnosis != r.bench_case->diagnosis_id)) continue;
    if (rule.loop && (!t.loop || *rule.loop != *t.loop)) continue;
    if (rule.step && *rule.step != t.step) continue;
    if (rule.sub && *rule.sub != sub) continue;
    return resolve(rule.answer);
  }
  return resolve(default_);
}

std::unique_ptr<ChatModel> make_mock(const std::string& spec) {
  if (spec == "perfect") return std::make_unique<PerfectModel>();
  if (spec == "wrong") return std::make_unique<WrongModel>();
  if (spec.rfind("random", 0) == 0) {
    std::uint64_t seed = 0;
    if (spec.size() > 7 && spec[6] == ':') {
      try {
        seed = std::stoull(spec.substr(7));
      } catch (const std::exception&) {
        throw ConfigError("bad random mock seed in '" + spec + "'");
      }
    }
    return std::make_unique<RandomModel>(seed);
  }
  if (spec.rfind("script:", 0) == 0) {
    return std::make_unique<ScriptedModel>(ScriptedModel::load(spec.substr(7)));
  }
  throw ConfigError("unknown mock '" + spec + "' (perfect, wrong, random:<seed>, script:<path>)");
}

}  // namespace ecgbench
