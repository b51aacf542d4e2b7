#include <cstdio>

#include <json.hpp>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/harness/harness.hpp"

namespace ecgbench {

namespace {

struct Tally {
  std::size_t sessions = 0, initial = 0, clean = 0, clean_initial = 0, rda = 0;
  std::size_t loops = 0;
  double depth = 0.0;
  std::size_t choice = 0, choice_ok = 0, yn = 0, yn_ok = 0, ambiguous = 0;

  void add(const SessionTranscript& t) {
    ++sessions;
    initial += t.initial_correct;
    clean += t.completion_clean;
    clean_initial += t.completion_clean && t.initial_correct;
    rda += t.gt_rda_correct;
    for (const auto& l : t.loops) {
      ++loops;
      depth += l.depth;
    }
    for (const auto& r : t.turns) {
      const bool yes_no = r.step == Step::Initial || r.step == Step::FindingIdentification;
      (yes_no ? yn : choice)++;
      if (r.correct) (yes_no ? yn_ok : choice_ok)++;
      ambiguous += r.ambiguous;
    }
    ++choice;  // the ground-truth-conditioned decision
    choice_ok += t.gt_rda_correct;
  }

  MetricsBlock block() const {
    auto pct = [](std::size_t k, std::size_t n) { return n ? 100.0 * k / n : 0.0; };
    MetricsBlock b;
    b.sessions = sessions;
    b.loops = loops;
    b.ida = pct(initial, sessions);
    b.completion = pct(clean, sessions);
    b.completion_with_initial = pct(clean_initial, sessions);
    b.depth = loops ? depth / loops : 0.0;
    b.gt_rda = pct(rda, sessions);
    b.choice_turns = choice;
    b.choice_accuracy = pct(choice_ok, choice);
    b.yes_no_turns = yn;
    b.yes_no_accuracy = pct(yn_ok, yn);
    b.ambiguous_replies = ambiguous;
    return b;
  }
};

nlohmann::ordered_json block_json(const MetricsBlock& b) {
  return {{"sessions", b.sessions},
          {"loops", b.loops},
          {"ida", b.ida},
          {"completion", b.completion},
          {"completion_with_initial", b.completion_with_initial},
          {"depth", b.depth},
          {"gt_rda", b.gt_rda},
          {"choice_turns", b.choice_turns},
          {"choice_accuracy", b.choice_accuracy},
          {"yes_no_turns", b.yes_no_turns},
          {"yes_no_accuracy", b.yes_no_accuracy},
          {"ambiguous_replies", b.ambiguous_replies}};
}

std::string row(const std::string& name, const MetricsBlock& b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %6zu %7.1f %11.1f %6.2f %7.1f\n", name.c_str(), b.sessions,
                b.ida, b.completion, b.depth, b.gt_rda);
  return buf;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<SessionTranscript>& transcripts) {
  MetricsReport report;
  Tally all;
  std::map<std::string, Tally> per;
  for (const auto& t : transcripts) {
    if (t.failed) {
      ++report.failed_sessions;
      continue;
    }
    all.add(t);
    per[t.diagnosis_id].add(t);
  }
  if (all.sessions == 0) throw EmptyInput("no completed sessions to score");
  report.overall = all.block();
  for (const auto& [dx, tally] : per) report.per_diagnosis[dx] = tally.block();
  return report;
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::ordered_json o;
  o["overall"] = block_json(report.overall);
  o["failed_sessions"] = report.failed_sessions;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [dx, b] : report.per_diagnosis) per[dx] = block_json(b);
  o["per_diagnosis"] = std::move(per);
  return o.dump(2) + "\n";
}

std::string format_metrics_table(const MetricsReport& report) {
  std::string out = "diagnosis  cases     IDA  Completion  Depth  GT-RDA\n";
  for (const auto& [dx, b] : report.per_diagnosis) out += row(dx, b);
  out += row("overall", report.overall);
  if (report.failed_sessions) {
    out += "failed sessions (excluded): " + std::to_string(report.failed_sessions) + "\n";
  }
  return out;
}

}  // namespace ecgbench
