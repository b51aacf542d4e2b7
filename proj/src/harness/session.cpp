#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <json.hpp>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"
#include "ecgbench/core/render.hpp"
#include "ecgbench/findings/findings.hpp"
#include "ecgbench/harness/harness.hpp"

namespace ecgbench {

namespace {

using ojson = nlohmann::ordered_json;

struct Exchange {
  const BenchmarkCase& c;
  ChatModel& model;
  const Verifier& verifier;
  SessionTranscript& out;
  std::vector<Message> messages;
  int gt_loops = 0;

  // Sends turn i on top of the running history and records the outcome.
  bool ask(std::size_t i) {
    const Turn& t = c.turns[i];
    messages.push_back({"user", t.prompt, ""});
    ChatRequest req{&messages, &c, &t, i, false};
    const std::string reply = model.reply(req);
    messages.push_back({"assistant", reply, ""});
    const Verdict v = verifier.verify(reply, t);
    TurnRecord rec;
    rec.turn_index = i;
    rec.step = t.step;
    rec.loop = t.loop;
    rec.prompt = t.prompt;
    rec.reply = reply;
    rec.correct = v.correct;
    rec.ambiguous = v.ambiguous;
    rec.verifier = std::string(verifier_kind_name(verifier.kind()));
    rec.gt_loops_in_history = gt_loops;
    out.turns.push_back(std::move(rec));
    return v.correct;
  }
};

std::string record_image(const BenchmarkCase& c) {
  const auto rec = read_record(c.record_path);
  return base64_encode(render_ecg_image(rec, ImageLayout::Grid3x4PlusRhythm).png);
}

}  // namespace

std::string default_system_prompt() {
  try {
    return read_file(default_config_dir() / "system_prompt.txt");
  } catch (const IoError&) {
    return "";
  }
}

double loop_depth(bool step1, bool step2, const std::vector<bool>& grounding, bool step4) {
  if (!step1) return 0.0;
  if (!step2) return 1.0;
  double depth = 2.0;
  if (grounding.empty()) {
    depth += 1.0;  // nothing to ground for an absent finding
  } else {
    std::size_t k = 0;
    for (bool g : grounding) k += g ? 1 : 0;
    depth += static_cast<double>(k) / grounding.size();
    if (k < grounding.size()) return depth;
  }
  return step4 ? depth + 1.0 : depth;
}

SessionTranscript run_session(const BenchmarkCase& c, ChatModel& model, const Verifier& verifier,
                              const SessionOptions& options) {
  const Templates& tpl = options.templates ? *options.templates : default_templates();
  SessionTranscript out;
  out.case_id = c.case_id;
  out.diagnosis_id = c.diagnosis_id;
  out.model = model.describe();
  if (c.turns.empty() || c.turns.front().step != Step::Initial) {
    throw SchemaError(c.case_id + ": case does not start with an INITIAL turn");
  }

  try {
    std::string image;
    if (options.attach_image) image = record_image(c);

    Exchange ex{c, model, verifier, out, {}, 0};
    if (!options.system_prompt.empty()) ex.messages.push_back({"system", options.system_prompt, ""});
    ex.messages.push_back({"user", c.turns[0].prompt, image});
    {
      ChatRequest req{&ex.messages, &c, &c.turns[0], 0, false};
      const std::string reply = model.reply(req);
      ex.messages.push_back({"assistant", reply, ""});
      const Verdict v = verifier.verify(reply, c.turns[0]);
      out.turns.push_back({0, Step::Initial, std::nullopt, c.turns[0].prompt, reply, v.correct,
                           v.ambiguous, std::string(verifier_kind_name(verifier.kind())), 0});
      out.initial_correct = v.correct;
    }

    bool clean = true;
    std::size_t i = 1;
    for (std::size_t li = 0; li < c.loops.size(); ++li) {
      // Turn range of this loop.
      const std::size_t begin = i;
      std::size_t end = begin;
      while (end < c.turns.size() && c.turns[end].loop && *c.turns[end].loop == static_cast<int>(li)) ++end;
      if (end == begin) throw SchemaError(c.case_id + ": loop " + std::to_string(li) + " has no turns");
      i = end;

      const std::size_t mark = ex.messages.size();
      LoopScore score{c.loops[li].finding_id, c.loops[li].grounding_n, 0, 0.0};
      bool s1 = false, s2 = false, s4 = false;
      std::vector<bool> grounding;
      bool broken = false;
      for (std::size_t ti = begin; ti < end && !broken; ++ti) {
        const int stage = loop_stage(c.turns[ti].step);
        if (stage == 3) {
          const bool ok = ex.ask(ti);
          grounding.push_back(ok);
          broken = !ok;
          continue;
        }
        const bool ok = ex.ask(ti);
        if (stage == 1) s1 = ok;
        if (stage == 2) s2 = ok;
        if (stage == 4) s4 = ok;
        broken = !ok;
      }
      // sub-tasks left unasked after a grounding error earn nothing
      if (s2) grounding.resize(static_cast<std::size_t>(c.loops[li].grounding_n), false);
      score.grounding_correct = static_cast<int>(std::count(grounding.begin(), grounding.end(), true));
      score.depth = loop_depth(s1, s2, grounding, s4);
      out.loops.push_back(score);

      if (broken) {
        clean = false;
        // Replace this loop's exchange with the ground truth and carry on.
        ex.messages.resize(mark);
        for (std::size_t ti = begin; ti < end; ++ti) {
          ex.messages.push_back({"user", c.turns[ti].prompt, ""});
          ex.messages.push_back({"assistant", c.turns[ti].gt_answer, ""});
        }
        ++ex.gt_loops;
      }
    }
    out.completion_clean = clean;

    // Ground-truth-conditioned decision in a fresh exchange.
    const std::size_t final_index = c.turns.size() - 1;
    const Turn& final_turn = c.turns[final_index];
    std::string history;
    for (std::size_t ti = 1; ti < final_index; ++ti) {
      if (!history.empty()) history += "\n\n";
      history += tpl.render("gt_history", {{"question", c.turns[ti].prompt},
                                           {"answer", c.turns[ti].gt_answer}});
    }
    out.gt_rda_prompt = tpl.render("gt_rda", {{"history", history}, {"question", final_turn.prompt}});
    std::vector<Message> fresh;
    if (!options.system_prompt.empty()) fresh.push_back({"system", options.system_prompt, ""});
    fresh.push_back({"user", out.gt_rda_prompt, image});
    ChatRequest req{&fresh, &c, &final_turn, final_index, true};
    out.gt_rda_reply = model.reply(req);
    out.gt_rda_correct = verifier.verify(out.gt_rda_reply, final_turn).correct;
  } catch (const EndpointError& e) {
    out.failed = true;
    out.error = e.what();
  } catch (const VerifierError& e) {
    out.failed = true;
    out.error = e.what();
  } catch (const IoError& e) {
    out.failed = true;
    out.error = e.what();
  } catch (const FormatError& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

std::string transcript_to_json(const SessionTranscript& t) {
  ojson o;
  o["case_id"] = t.case_id;
  o["diagnosis_id"] = t.diagnosis_id;
  o["model"] = t.model;
  o["failed"] = t.failed;
  o["error"] = t.error;
  o["initial_correct"] = t.initial_correct;
  o["completion_clean"] = t.completion_clean;
  o["gt_rda_correct"] = t.gt_rda_correct;
  auto loops = ojson::array();
  for (const auto& l : t.loops) {
    loops.push_back({{"finding", l.finding_id},
                     {"grounding_n", l.grounding_n},
                     {"grounding_correct", l.grounding_correct},
                     {"depth", l.depth}});
  }
  o["loops"] = std::move(loops);
  auto turns = ojson::array();
  for (const auto& r : t.turns) {
    ojson j;
    j["turn"] = r.turn_index;
    j["step"] = step_name(r.step);
    j["loop"] = r.loop ? ojson(*r.loop) : ojson(nullptr);
    j["prompt"] = r.prompt;
    j["reply"] = r.reply;
    j["correct"] = r.correct;
    j["ambiguous"] = r.ambiguous;
    j["verifier"] = r.verifier;
    j["gt_loops_in_history"] = r.gt_loops_in_history;
    turns.push_back(std::move(j));
  }
  o["turns"] = std::move(turns);
  o["gt_rda"] = {{"prompt", t.gt_rda_prompt}, {"reply", t.gt_rda_reply}};
  return o.dump();
}

SessionTranscript transcript_from_json(const std::string& line) {
  SessionTranscript t;
  try {
    const auto o = ojson::parse(line);
    t.case_id = o.at("case_id").get<std::string>();
    t.diagnosis_id = o.at("diagnosis_id").get<std::string>();
    t.model = o.at("model").get<std::string>();
    t.failed = o.at("failed").get<bool>();
    t.error = o.value("error", "");
    t.initial_correct = o.at("initial_correct").get<bool>();
    t.completion_clean = o.at("completion_clean").get<bool>();
    t.gt_rda_correct = o.at("gt_rda_correct").get<bool>();
    for (const auto& l : o.at("loops")) {
      t.loops.push_back({l.at("finding").get<std::string>(), l.at("grounding_n").get<int>(),
                         l.at("grounding_correct").get<int>(), l.at("depth").get<double>()});
    }
    for (const auto& j : o.at("turns")) {
      TurnRecord r;
      r.turn_index = j.at("turn").get<std::size_t>();
      auto step = parse_step(j.at("step").get<std::string>());
      if (!step) throw SchemaError("unknown step in transcript");
      r.step = *step;
      if (!j.at("loop").is_null()) r.loop = j.at("loop").get<int>();
      r.prompt = j.at("prompt").get<std::string>();
      r.reply = j.at("reply").get<std::string>();
      r.correct = j.at("correct").get<bool>();
      r.ambiguous = j.value("ambiguous", false);
      r.verifier = j.at("verifier").get<std::string>();
      r.gt_loops_in_history = j.value("gt_loops_in_history", 0);
      t.turns.push_back(std::move(r));
    }
    t.gt_rda_prompt = o.at("gt_rda").at("prompt").get<std::string>();
    t.gt_rda_reply = o.at("gt_rda").at("reply").get<std::string>();
  } catch (const ojson::exception& e) {
    throw SchemaError(std::string("transcript: ") + e.what());
  }
  return t;
}

std::vector<SessionTranscript> read_transcripts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<SessionTranscript> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(transcript_from_json(line));
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void append_transcripts(const std::vector<SessionTranscript>& ts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& t : ts) out << transcript_to_json(t) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<SessionTranscript> evaluate_cases(const std::vector<BenchmarkCase>& cases,
                                              ChatModel& model, const Verifier& verifier,
                                              const SessionOptions& session,
                                              const EvaluationOptions& options) {
  std::map<std::string, SessionTranscript> done;
  const bool persist = !options.transcripts_path.empty();
  if (persist && options.resume && std::filesystem::exists(options.transcripts_path)) {
    for (auto& t : read_transcripts(options.transcripts_path)) {
      if (!t.failed) done[t.case_id] = std::move(t);
    }
  } else if (persist) {
    write_file(options.transcripts_path, "");
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (!done.count(cases[i].case_id)) pending.push_back(i);
  }

  const std::size_t jobs = std::max<std::size_t>(1, options.jobs);
  const std::size_t chunk = jobs * 4;
  for (std::size_t start = 0; start < pending.size(); start += chunk) {
    const std::size_t stop = std::min(pending.size(), start + chunk);
    std::vector<SessionTranscript> results(stop - start);
    std::atomic<std::size_t> next{start};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
      for (std::size_t k; (k = next.fetch_add(1)) < stop;) {
        try {
          results[k - start] = run_session(cases[pending[k]], model, verifier, session);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> threads;
    for (std::size_t w = 1; w < std::min(jobs, stop - start); ++w) threads.emplace_back(worker);
    worker();
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
    if (persist) append_transcripts(results, options.transcripts_path);
    for (auto& r : results) done[r.case_id] = std::move(r);
  }

  std::vector<SessionTranscript> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(done.at(c.case_id));
  return out;
}

}  // namespace ecgbench
