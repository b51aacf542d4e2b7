#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "ecgbench/benchgen/benchgen.hpp"
#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/rng.hpp"

namespace ecgbench {

namespace {

constexpr std::size_t kOptionCount = 4;

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

int unit_decimals(const std::string& unit) { return unit == "mV" ? 3 : 1; }

std::string display(const Catalog& catalog, const std::string& id) {
  const auto* c = catalog.find(id);
  return c ? c->display_name : id;
}

std::string with_options(const Templates& t, const std::string& question,
                         const std::vector<std::string>& options) {
  std::string out = question + "\n" + t.at("options_header") + "\n";
  for (std::size_t i = 0; i < options.size(); ++i) {
    out += option_letter(i) + ". " + options[i] + "\n";
  }
  return out + t.at("answer_instruction");
}

std::vector<std::string> shuffled(std::vector<std::string> options, Rng& rng) {
  rng.shuffle(std::span<std::string>(options));
  return options;
}

std::vector<std::string> lead_distractors(const std::vector<Lead>& correct, Rng& rng) {
  std::set<Lead> base(correct.begin(), correct.end());
  std::vector<std::string> out;
  std::set<std::string> seen = {join_leads(correct)};
  for (int attempt = 0; attempt < 200 && out.size() < kOptionCount - 1; ++attempt) {
    std::set<Lead> s = base;
    std::vector<Lead> in(s.begin(), s.end());
    std::vector<Lead> outside;
    for (Lead l : kAllLeads) {
      if (!s.count(l)) outside.push_back(l);
    }
    const int op = static_cast<int>(rng.index(3));
    if (op == 0 && in.size() > 1) {
      s.erase(in[rng.index(in.size())]);
    } else if (op == 1 && !outside.empty()) {
      s.insert(outside[rng.index(outside.size())]);
    } else if (!outside.empty()) {
      s.erase(in[rng.index(in.size())]);
      s.insert(outside[rng.index(outside.size())]);
    } else {
      s.erase(in[rng.index(in.size())]);
    }
    if (s.empty()) continue;
    const auto text = join_leads(std::vector<Lead>(s.begin(), s.end()));
    if (seen.insert(text).second) out.push_back(text);
  }
  return out;
}

}  // namespace

std::vector<std::pair<double, double>> measurement_bins(double value, double width, int position) {
  double lo = std::floor(value / width) * width;
  const double eps = 1e-9 * width;
  // keep the value strictly inside its bin
  if (value - lo <= eps || lo + width - value <= eps) {
    lo = std::round(value / width) * width - 0.5 * width;
  }
  lo -= position * width;
  std::vector<std::pair<double, double>> bins;
  for (std::size_t i = 0; i < kOptionCount; ++i) {
    bins.emplace_back(lo + i * width, lo + (i + 1) * width);
  }
  return bins;
}

std::string format_bin(double lo, double hi, const std::string& unit) {
  const int d = unit_decimals(unit);
  return fmt(lo, d) + " to " + fmt(hi, d) + " " + unit;
}

std::vector<std::pair<double, double>> wave_windows(double duration_s,
                                                    const std::vector<double>& boundaries_s) {
  std::vector<double> cuts;
  double prev = 0.0;
  for (int k = 1; k < static_cast<int>(kOptionCount); ++k) {
    const double target = duration_s * k / kOptionCount;
    double best = target;
    double best_d = 1e300;
    for (double b : boundaries_s) {
      if (b <= prev || b >= duration_s) continue;
      if (std::abs(b - target) < best_d) {
        best_d = std::abs(b - target);
        best = b;
      }
    }
    // a snapped cut may not swallow a whole window
    if (best <= prev || best_d > duration_s / (2.0 * kOptionCount)) best = target;
    if (best <= prev) best = prev + (duration_s - prev) / (kOptionCount - k + 1);
    cuts.push_back(best);
    prev = best;
  }
  std::vector<std::pair<double, double>> out;
  double start = 0.0;
  for (double c : cuts) {
    out.emplace_back(start, c);
    start = c;
  }
  out.emplace_back(start, duration_s);
  return out;
}

BenchmarkCase build_case(const AnalysisResult& analysis, const DiagnosisResult& result,
                         const CaseContext& ctx, std::uint64_t seed) {
  const auto& t = ctx.templates;
  const auto& diagram = ctx.diagrams.at(result.diagnosis_id);
  const bool positive = result.decision == Leaf::Positive;

  BenchmarkCase c;
  c.record_id = analysis.record_id;
  c.record_path = analysis.record_path;
  c.diagnosis_id = result.diagnosis_id;
  c.polarity = result.decision;
  c.path = result.path;
  c.case_id = analysis.record_id + ":" + result.diagnosis_id + ":" + (positive ? "+" : "-") +
              result.path.path_id();
  Rng rng(derive_seed(seed, c.case_id));

  const std::map<std::string, std::string> dx_vars = {
      {"diagnosis", diagram.name},
      {"polarity", positive ? "positive" : "negative"}};
  const std::string yes = t.at("answer_yes");
  const std::string no = t.at("answer_no");

  Turn initial;
  initial.step = Step::Initial;
  initial.prompt = t.render("initial", dx_vars);
  initial.gt_answer = positive ? yes : no;
  initial.gt_rationale = t.render("rationale_initial", dx_vars);
  c.turns.push_back(std::move(initial));

  std::set<std::string> on_path;
  for (const auto& s : result.path.steps) on_path.insert(s.finding_id);

  for (std::size_t li = 0; li < result.path.steps.size(); ++li) {
    const auto& step = result.path.steps[li];
    const auto& spec = ctx.catalog.at(step.finding_id);
    const Finding* f = li < result.evidence.size() ? &result.evidence[li]
                                                   : find_finding(analysis.findings, step.finding_id);
    if (!f) throw MissingFindingError("finding '" + step.finding_id + "' was not evaluated");
    const int loop = static_cast<int>(li);
    auto vars = dx_vars;
    vars["finding"] = spec.display_name;
    vars["state"] = step.outcome ? "present" : "absent";

    // Step 1: criterion selection
    {
      Turn turn;
      turn.step = Step::CriterionSelection;
      turn.loop = loop;
      turn.finding_id = step.finding_id;
      std::set<std::string> used = {step.finding_id};
      std::vector<std::string> same, present, other;
      for (const auto& cr : ctx.catalog.criteria) {
        if (used.count(cr.finding_id)) continue;
        if (cr.category == spec.category) same.push_back(cr.finding_id);
        const auto* pf = find_finding(analysis.findings, cr.finding_id);
        if (pf && pf->present && !on_path.count(cr.finding_id)) present.push_back(cr.finding_id);
        if (cr.category != spec.category) other.push_back(cr.finding_id);
      }
      rng.shuffle(std::span<std::string>(same));
      rng.shuffle(std::span<std::string>(present));
      rng.shuffle(std::span<std::string>(other));
      std::vector<std::string> picked;
      auto take = [&](const std::vector<std::string>& pool, std::size_t n) {
        std::size_t got = 0;
        for (const auto& id : pool) {
          if (got == n || picked.size() == kOptionCount - 1) break;
          if (used.insert(id).second) {
            picked.push_back(id);
            ++got;
          }
        }
        return got;
      };
      const std::size_t n_same = take(same, 2);
      const std::size_t n_present = take(present, 1);
      turn.fallback = n_same < 2 || n_present < 1;
      take(present, kOptionCount);
      take(same, kOptionCount);
      take(other, kOptionCount);
      std::vector<std::string> options = {spec.display_name};
      for (const auto& id : picked) options.push_back(display(ctx.catalog, id));
      options = shuffled(std::move(options), rng);
      turn.prompt = with_options(t, t.render("criterion_selection", vars), options);
      turn.options = std::move(options);
      turn.gt_answer = spec.display_name;
      turn.gt_rationale = t.render("rationale_criterion", vars);
      c.distractor_fallback = c.distractor_fallback || turn.fallback;
      c.turns.push_back(std::move(turn));
    }

    // Step 2: finding identification
    {
      Turn turn;
      turn.step = Step::FindingIdentification;
      turn.loop = loop;
      turn.finding_id = step.finding_id;
      turn.prompt = t.render("finding_identification", vars);
      turn.gt_answer = step.outcome ? yes : no;
      turn.gt_rationale = t.render("rationale_identification", vars);
      c.turns.push_back(std::move(turn));
    }

    // Step 3: grounding, only for present findings
    FindingLoop info{step.finding_id, step.outcome, 0};
    if (step.outcome) {
      for (GroundingKind kind : spec.grounding_kinds) {
        Turn turn;
        turn.loop = loop;
        turn.finding_id = step.finding_id;
        auto gv = vars;
        if (kind == GroundingKind::Lead) {
          if (f->grounding.leads.empty()) {
            throw GroundingUnavailable(c.case_id + ": " + step.finding_id + " has no lead evidence");
          }
          turn.step = Step::GroundLead;
          const auto correct = join_leads(f->grounding.leads);
          std::vector<std::string> options = {correct};
          for (auto& d : lead_distractors(f->grounding.leads, rng)) options.push_back(std::move(d));
          options = shuffled(std::move(options), rng);
          gv["leads"] = correct;
          turn.prompt = with_options(t, t.render("ground_lead", gv), options);
          turn.options = std::move(options);
          turn.gt_answer = correct;
          turn.gt_rationale = t.render("rationale_lead", gv);
        } else if (kind == GroundingKind::Wave) {
          if (f->grounding.segments.empty()) {
            throw GroundingUnavailable(c.case_id + ": " + step.finding_id + " has no wave evidence");
          }
          turn.step = Step::GroundWave;
          const auto& seg = f->grounding.segments.front();
          const double mid = 0.5 * (seg.onset_s + seg.offset_s);
          const auto windows = wave_windows(analysis.duration_s, analysis.beat_boundaries_s);
          for (std::size_t i = 0; i < windows.size(); ++i) {
            const auto text = fmt(windows[i].first, 2) + " s to " + fmt(windows[i].second, 2) + " s";
            const bool last = i + 1 == windows.size();
            if (mid >= windows[i].first && (mid < windows[i].second || last)) turn.gt_answer = text;
            turn.options.push_back(text);
          }
          gv["onset"] = fmt(seg.onset_s, 3);
          gv["offset"] = fmt(seg.offset_s, 3);
          turn.prompt = with_options(t, t.render("ground_wave", gv), turn.options);
          turn.gt_rationale = t.render("rationale_wave", gv);
        } else {
          if (!f->grounding.value) {
            throw GroundingUnavailable(c.case_id + ": " + step.finding_id +
                                       " has no measured value");
          }
          turn.step = Step::GroundMeasurement;
          const auto& v = *f->grounding.value;
          const int pos = static_cast<int>(rng.index(kOptionCount));
          const auto bins = measurement_bins(v.value, unit_bin_width(v.unit), pos);
          for (const auto& [lo, hi] : bins) turn.options.push_back(format_bin(lo, hi, v.unit));
          turn.gt_answer = turn.options[pos];
          gv["unit"] = v.unit;
          gv["value"] = fmt(v.value, unit_decimals(v.unit));
          turn.prompt = with_options(t, t.render("ground_measurement", gv), turn.options);
          turn.gt_rationale = t.render("rationale_measurement", gv);
        }
        ++info.grounding_n;
        c.turns.push_back(std::move(turn));
      }
    }
    c.loops.push_back(info);

    // Step 4: diagnostic decision
    {
      Turn turn;
      turn.step = Step::DiagnosticDecision;
      turn.loop = loop;
      turn.finding_id = step.finding_id;
      const bool last = li + 1 == result.path.steps.size();
      const std::string further = t.at("decision_further");
      std::vector<std::string> options = {yes, no, further, t.at("decision_undetermined")};
      options = shuffled(std::move(options), rng);
      turn.prompt = with_options(t, t.render("diagnostic_decision", vars), options);
      turn.options = std::move(options);
      turn.gt_answer = last ? (positive ? yes : no) : further;
      turn.gt_rationale =
          t.render(last ? "rationale_decision_final" : "rationale_decision_continue", vars);
      c.turns.push_back(std::move(turn));
    }
  }
  c.n_reasoning_turns = static_cast<int>(c.turns.size()) - 1;
  return c;
}

Leaf replay_case(const BenchmarkCase& c, const DiagramSet& diagrams, const Templates& templates) {
  const auto& d = diagrams.at(c.diagnosis_id);
  std::string outcomes;
  std::vector<std::string> ids;
  for (const auto& t : c.turns) {
    if (t.step != Step::FindingIdentification) continue;
    ids.push_back(t.finding_id);
    outcomes += t.gt_answer == templates.at("answer_yes") ? 'Y' : 'N';
  }
  const auto path = replay_path(d, outcomes);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (path.steps[i].finding_id != ids[i]) {
      throw SchemaError(c.case_id + ": loop " + std::to_string(i) + " asks " + ids[i] +
                        " but the diagram expects " + path.steps[i].finding_id);
    }
  }
  return path.leaf;
}

}  // namespace ecgbench
