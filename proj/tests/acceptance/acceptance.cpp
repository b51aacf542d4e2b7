#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "ecgbench/cli/cli.hpp"
#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/rng.hpp"
#include "ecgbench/harness/harness.hpp"
#include "test_util.hpp"

using namespace ecgbench;
using ecgbench::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int n, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
  std::ostringstream t;
  t.precision(2);
  t << std::fixed << secs;
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << title << " (" << o.detail << "; "
            << t.str() << " s)" << std::endl;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// Shared corpus: scenario records analysed once and reused by several criteria.

struct Corpus {
  std::vector<Scenario> scenarios;
  std::vector<AnalysisResult> analyses;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    Corpus out;
    out.scenarios = scenario_suite(1320, 2024);
    out.analyses.resize(out.scenarios.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < out.scenarios.size(); i += workers) {
          out.analyses[i] = analyze_scenario(out.scenarios[i], default_catalog(), default_diagrams());
        }
      });
    }
    for (auto& t : pool) t.join();
    return out;
  }();
  return c;
}

const CaseContext& ctx() {
  static const CaseContext c{default_catalog(), default_diagrams(), default_templates()};
  return c;
}

// One case per corpus record, built for the diagnosis the scenario targets.
std::vector<BenchmarkCase> target_cases(std::size_t limit) {
  const auto& c = corpus();
  std::vector<BenchmarkCase> out;
  for (std::size_t i = 0; i < c.scenarios.size() && out.size() < limit; ++i) {
    const auto& a = c.analyses[i];
    out.push_back(build_case(a, a.diagnosis(c.scenarios[i].diagnosis), ctx(), derive_seed(7, a.record_id)));
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome worked_example() {
  const auto a = analyze_scenario(make_scenario("CLBBB/YYYY", 1), default_catalog(), default_diagrams());
  const auto c = build_case(a, a.diagnosis("CLBBB"), ctx(), 1);
  ScriptedModel model(R"({"rules": [
    {"loop": 0, "step": "GROUND_MEASUREMENT", "answer": "wrong"},
    {"loop": 2, "step": "FINDING_IDENTIFICATION", "answer": "wrong"},
    {"loop": 3, "step": "GROUND_LEAD", "answer": "wrong"}]})");
  const auto t = run_session(c, model, Verifier{});
  if (t.failed) return {false, t.error};
  std::string depths;
  for (const auto& l : t.loops) depths += (depths.empty() ? "" : ", ") + fmt(l.depth, 1);
  const auto report = compute_metrics({t});
  const std::vector<double> expect = {2.5, 4.0, 1.0, 2.0};
  bool ok = t.loops.size() == expect.size() && report.overall.depth == 2.375;
  for (std::size_t i = 0; ok && i < expect.size(); ++i) ok = t.loops[i].depth == expect[i];
  return {ok, "loop depths " + depths + ", micro-average " + fmt(report.overall.depth)};
}

Outcome metric_extremes() {
  const auto cases = target_cases(68);
  PerfectModel perfect;
  WrongModel wrong;
  EvaluationOptions opt;
  opt.jobs = 4;
  const auto p = compute_metrics(evaluate_cases(cases, perfect, Verifier{}, {}, opt)).overall;
  const auto w = compute_metrics(evaluate_cases(cases, wrong, Verifier{}, {}, opt)).overall;
  const bool ok = p.ida == 100.0 && p.completion == 100.0 && p.gt_rda == 100.0 && p.depth == 4.0 &&
                  w.ida == 0.0 && w.completion == 0.0 && w.gt_rda == 0.0 && w.depth == 0.0;
  return {ok, std::to_string(cases.size()) + " cases; perfect " + fmt(p.ida, 1) + "/" + fmt(p.completion, 1) + "/" +
                  fmt(p.depth) + "/" + fmt(p.gt_rda, 1) + ", wrong " + fmt(w.ida, 1) + "/" + fmt(w.completion, 1) +
                  "/" + fmt(w.depth) + "/" + fmt(w.gt_rda, 1)};
}

Outcome pipeline_oracle() {
  const auto scenarios = scenario_suite(264, 77);
  std::size_t findings = 0, finding_hits = 0, paths = 0;
  std::vector<std::string> misses;
  for (const auto& sc : scenarios) {
    const auto a = analyze_scenario(sc, default_catalog(), default_diagrams());
    for (const auto& [id, expected] : sc.programmed) {
      ++findings;
      const auto* f = find_finding(a.findings, id);
      if (f && f->present == expected) {
        ++finding_hits;
      } else if (misses.size() < 3) {
        misses.push_back(sc.name + ":" + id);
      }
    }
    if (a.diagnosis(sc.diagnosis).path.path_id() == sc.path_id) {
      ++paths;
    } else if (misses.size() < 3) {
      misses.push_back(sc.name + " path " + a.diagnosis(sc.diagnosis).path.path_id());
    }
  }
  std::string detail = std::to_string(scenarios.size()) + " records, findings " + std::to_string(finding_hits) + "/" +
                       std::to_string(findings) + ", paths " + std::to_string(paths) + "/" +
                       std::to_string(scenarios.size());
  for (const auto& m : misses) detail += ", miss " + m;
  return {finding_hits == findings && paths == scenarios.size(), detail};
}

// 1000 Hz, QRS of 1 mV at 200/1200/2200, labelled P before the second; candidate plateau at 600.
std::size_t recovered(long plateau_samples, double amp) {
  std::vector<float> x(3000, 0.0f);
  for (long q : {200L, 1200L, 2200L}) ecgbench::testing::add_triangle(x, q, q + 80, 1.0);
  ecgbench::testing::add_triangle(x, 1050, 1150, 0.15);
  for (long k = 600; k < 600 + plateau_samples; ++k) x[k] = static_cast<float>(amp);
  const auto rec = ecgbench::testing::uniform_record("p", 1000, x);
  PerLeadSegments segs;
  for (Lead l : kAllLeads) {
    auto& v = segs[index_of(l)];
    for (long q : {200L, 1200L, 2200L}) v.push_back({WaveClass::QRS, LeadRef::of(l), q, q + 80, q + 40});
    v.push_back({WaveClass::P, LeadRef::of(l), 1050, 1150, 1100});
    sort_segments(v);
  }
  std::size_t n = 0;
  const auto out = recover_p_waves(rec, segs);
  for (const auto& s : out[index_of(Lead::II)]) {
    if (s.wave_class == WaveClass::P && s.onset > 280 && s.offset < 1000) ++n;
  }
  return n;
}

Outcome post_processing() {
  // plateau of n samples spans n + 1 ms between its zero ends
  const bool d59 = recovered(58, 0.15) == 0, d60 = recovered(59, 0.15) == 1, d61 = recovered(60, 0.15) == 1;
  const bool a49 = recovered(80, 0.049) == 0, a51 = recovered(80, 0.051) == 1;

  auto cluster = [](const std::vector<Lead>& leads, const std::vector<long>& on, const std::vector<long>& off) {
    PerLeadSegments segs;
    for (std::size_t i = 0; i < leads.size(); ++i) {
      segs[index_of(leads[i])].push_back({WaveClass::P, LeadRef::of(leads[i]), on[i], off[i], (on[i] + off[i]) / 2});
    }
    return build_consensus(segs, 500).consensus;
  };
  const auto four = cluster({Lead::I, Lead::II, Lead::III, Lead::aVF}, {100, 102, 98, 101}, {140, 145, 139, 141});
  const auto three = cluster({Lead::I, Lead::II, Lead::III}, {100, 102, 98}, {140, 145, 139});
  const bool consensus = four.size() == 1 && four[0].onset == 98 && four[0].offset == 145 && three.empty();
  const bool ok = d59 && d60 && d61 && a49 && a51 && consensus;
  return {ok, std::string("59/60/61 ms -> ") + (d59 ? "reject" : "accept?") + "/" + (d60 ? "accept" : "reject?") + "/" +
                  (d61 ? "accept" : "reject?") + ", 4.9%/5.1% -> " + (a49 ? "reject" : "accept?") + "/" +
                  (a51 ? "accept" : "reject?") + ", consensus " + (consensus ? "4 leads [98, 145], 3 leads none" : "wrong")};
}

DelineationSet shifted(const DelineationSet& in, long delta) {
  DelineationSet out = in;
  for (auto& s : out.consensus) {
    s.onset += delta;
    s.offset += delta;
    s.peak += delta;
  }
  return out;
}

Outcome segmentation_scorer() {
  SyntheticSpec spec;
  spec.sampling_rate = 1000;
  const auto truth = truth_delineation(synthesize(spec).truth);
  const std::size_t n = truth.consensus.size();
  bool ok = true;
  std::string detail;
  for (long ms : {0L, 140L, 151L}) {
    const auto s = score_segmentation(shifted(truth, ms), truth, 1000, 150.0);
    double recall = 0, precision = 0;
    std::size_t fn = 0, fp = 0;
    for (const auto& cls : s.scores) {
      for (const auto& b : cls) {
        recall += b.recall();
        precision += b.precision();
        fn += b.fn;
        fp += b.fp;
      }
    }
    recall /= 2 * kWaveClassCount;
    precision /= 2 * kWaveClassCount;
    if (ms < 151) ok = ok && recall == 1.0 && precision == 1.0 && fn == 0 && fp == 0;
    else ok = ok && recall == 0.0 && precision == 0.0 && fn == 2 * n && fp == 2 * n;
    detail += std::to_string(ms) + " ms R/P " + fmt(recall, 2) + "/" + fmt(precision, 2) + " (FN " + std::to_string(fn) +
              ", FP " + std::to_string(fp) + "); ";
  }
  auto partial = shifted(truth, 30);
  partial.consensus.erase(partial.consensus.begin());
  partial.consensus.push_back({WaveClass::T, LeadRef::consensus(), 9800, 9900, 9850});
  const auto a = score_segmentation(partial, truth, 1000);
  const auto b = score_segmentation(truth, partial, 1000);
  bool swap = true;
  for (std::size_t c = 0; c < kWaveClassCount; ++c) {
    for (std::size_t k = 0; k < 2; ++k) {
      swap = swap && a.scores[c][k].recall() == b.scores[c][k].precision() &&
             a.scores[c][k].precision() == b.scores[c][k].recall();
    }
  }
  return {ok && swap, detail + "swap " + (swap ? "exact" : "mismatch")};
}

std::vector<Candidate> pool(const std::string& dx, Leaf polarity, const std::vector<std::string>& paths, std::size_t per) {
  std::vector<Candidate> out;
  for (const auto& p : paths) {
    for (std::size_t i = 0; i < per; ++i) out.push_back({out.size(), dx + p + std::to_string(i), dx, polarity, p});
  }
  return out;
}

Outcome sampler_arithmetic() {
  std::string nodes;
  const char* ids[] = {"prolonged_pr", "prolonged_qrs", "left_axis_deviation", "premature_beat",
                       "lvh_ravl", "t_inversion_lateral", "st_elevation_inferior"};
  for (int i = 0; i < 7; ++i) {
    nodes += std::string(i ? "," : "") + "{\"id\": \"n" + std::to_string(i) + "\", \"finding\": \"" + ids[i] +
             "\", \"yes\": \"" + (i == 6 ? std::string("POS") : "n" + std::to_string(i + 1)) + "\", \"no\": \"NEG\"}";
  }
  const auto chain = parse_diagrams("{\"diagrams\": [{\"id\": \"C7\", \"name\": \"C7\", \"root\": \"n0\", \"nodes\": [" +
                                        nodes + "]}]}",
                                    default_catalog());
  std::vector<std::string> seven;
  for (const auto& p : enumerate_paths(chain.at("C7"))) {
    if (p.leaf == Leaf::Negative) seven.push_back(p.path_id());
  }

  auto summary = [](const SampleResult& r, Leaf polarity, std::size_t& total) {
    std::set<std::size_t> quotas;
    total = 0;
    for (const auto& a : r.allocations) {
      if (a.polarity != polarity) continue;
      total += a.selected;
      quotas.insert(a.selected);
    }
    return quotas;
  };
  std::size_t t3 = 0, t7 = 0, t1 = 0;
  const auto q3 = summary(stratified_sample(pool("CRBBB", Leaf::Negative, {"YYN", "YN", "N"}, 60), default_diagrams(),
                                           {100, {"CRBBB"}}, 1),
                          Leaf::Negative, t3);
  const auto q7 = summary(stratified_sample(pool("C7", Leaf::Negative, seven, 30), chain, {100, {}}, 1), Leaf::Negative, t7);
  const auto q1 = summary(stratified_sample(pool("1AVB", Leaf::Positive, {"YN"}, 150), default_diagrams(),
                                           {100, {"1AVB"}}, 1),
                          Leaf::Positive, t1);
  const bool ok = t3 == 102 && q3 == std::set<std::size_t>{34} && t7 == 105 && q7 == std::set<std::size_t>{15} &&
                  t1 == 100 && q1 == std::set<std::size_t>{100};
  return {ok, "3 paths -> " + std::to_string(t3) + " (34 each), 7 paths -> " + std::to_string(t7) +
                  " (15 each), 1 path -> " + std::to_string(t1)};
}

std::vector<BenchmarkCase> generated_set() {
  const auto& c = corpus();
  const auto sample = stratified_sample(candidates_from(c.analyses), default_diagrams(), {100, {}}, 11);
  std::vector<BenchmarkCase> out;
  for (const auto& cand : sample.selected) {
    const auto& a = c.analyses[cand.source];
    out.push_back(build_case(a, a.diagnosis(cand.diagnosis_id), ctx(), derive_seed(11, a.record_id + cand.diagnosis_id)));
  }
  return out;
}

Outcome case_closure() {
  const auto cases = generated_set();
  std::size_t violations = 0;
  for (const auto& c : cases) {
    if (replay_case(c, default_diagrams()) != c.polarity) ++violations;
  }
  return {!cases.empty() && violations == 0,
          std::to_string(cases.size()) + " cases, " + std::to_string(violations) + " violations"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int quiet_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ecgbench");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  auto* out = std::cout.rdbuf(sink.rdbuf());
  auto* err = std::cerr.rdbuf(sink.rdbuf());
  const int code = cli::run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(out);
  std::cerr.rdbuf(err);
  return code;
}

Outcome determinism() {
  TempDir dir("acceptance_det");
  const auto rec = (dir / "rec").string(), an = (dir / "an").string();
  if (quiet_cli({"synth", "--scenarios", "all", "--count", "264", "--seed", "5", "--out", rec}) != 0 ||
      quiet_cli({"analyze", rec, "--out", an}) != 0) {
    return {false, "synth/analyze failed"};
  }
  for (const char* run : {"1", "2"}) {
    const std::string jobs = run[0] == '1' ? "1" : "8";
    const auto gen = (dir / (std::string("gen") + run)).string();
    const auto ev = (dir / (std::string("ev") + run)).string();
    if (quiet_cli({"--jobs", jobs, "generate", an, "--seed", "3", "--target", "6", "--out", gen}) != 0 ||
        quiet_cli({"--jobs", jobs, "evaluate", gen + "/cases.jsonl", "--mock", "random:9", "--out", ev}) != 0) {
      return {false, "generate/evaluate failed"};
    }
  }
  bool ok = true;
  std::string detail;
  for (const auto& [sub, file] : std::vector<std::pair<std::string, std::string>>{
           {"gen", "cases.jsonl"}, {"gen", "stats.json"}, {"ev", "transcripts.jsonl"}, {"ev", "metrics.json"}}) {
    const auto a = slurp(dir / (sub + "1") / file), b = slurp(dir / (sub + "2") / file);
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    detail += file + (same ? " identical" : " differs") + ", ";
  }
  const auto cases = read_cases(dir / "gen1" / "cases.jsonl");
  return {ok, detail + std::to_string(cases.size()) + " cases"};
}

Outcome frontal_axis_examples() {
  bool ok = true;
  std::string detail;
  for (double axis : {0.0, 90.0, 45.0}) {
    // steer the free-wall lobe until the net QRS vector sits on the target
    SyntheticSpec spec;
    spec.axis_deg = axis;
    for (int i = 0; i < 20; ++i) spec.axis_deg -= synthesize(spec).expected.axis_deg - axis;
    const auto res = synthesize(spec);
    const auto m = measure_record(res.record, truth_delineation(res.truth));
    if (!m.axis_deg) return {false, "axis undefined at " + fmt(axis, 0)};
    ok = ok && std::abs(*m.axis_deg - axis) <= 0.5;
    detail += fmt(axis, 0) + " -> " + fmt(*m.axis_deg, 2) + " deg; ";
  }
  return {ok, detail};
}

Outcome random_baseline() {
  const auto cases = target_cases(1320);
  RandomModel model(20260);
  EvaluationOptions opt;
  opt.jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto r = compute_metrics(evaluate_cases(cases, model, Verifier{}, {}, opt)).overall;
  const std::size_t turns = r.choice_turns + r.yes_no_turns;
  const bool ok = turns >= 2000 && std::abs(r.ida - 50.0) <= 5.0 && std::abs(r.choice_accuracy - 25.0) <= 5.0;
  return {ok, std::to_string(r.sessions) + " sessions, " + std::to_string(turns) + " turns, IDA " + fmt(r.ida, 1) +
                  "%, multiple-choice " + fmt(r.choice_accuracy, 1) + "% over " + std::to_string(r.choice_turns)};
}

}  // namespace

int main() {
  criterion(1, "worked CLBBB example depths", worked_example);
  criterion(2, "perfect and wrong mock metric extremes", metric_extremes);
  criterion(3, "analysis reproduces programmed findings and paths", pipeline_oracle);
  criterion(4, "P recovery thresholds and lead consensus", post_processing);
  criterion(5, "segmentation scorer tolerance and symmetry", segmentation_scorer);
  criterion(6, "per-path sampling quotas", sampler_arithmetic);
  criterion(7, "ground-truth replay closes every case", case_closure);
  criterion(8, "generate and evaluate are byte-deterministic", determinism);
  criterion(9, "frontal axis on synthesized beats", frontal_axis_examples);
  criterion(10, "uniform random guessing baseline", random_baseline);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
