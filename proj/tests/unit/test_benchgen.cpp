#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "ecgbench/benchgen/benchgen.hpp"
#include "ecgbench/core/errors.hpp"
#include "test_util.hpp"

using namespace ecgbench;

namespace {

CaseContext default_ctx() { return {default_catalog(), default_diagrams(), default_templates()}; }

BenchmarkCase scenario_case(const std::string& name, const std::string& diagnosis, std::uint64_t seed = 1) {
  const auto a = analyze_scenario(make_scenario(name, seed), default_catalog(), default_diagrams());
  return build_case(a, a.diagnosis(diagnosis), default_ctx(), seed);
}

std::vector<Candidate> fake_candidates(const std::string& diagnosis, Leaf polarity,
                                       const std::vector<std::string>& paths, std::size_t per_path) {
  std::vector<Candidate> out;
  for (const auto& p : paths) {
    for (std::size_t i = 0; i < per_path; ++i) {
      out.push_back({out.size(), diagnosis + p + std::to_string(i), diagnosis, polarity, p});
    }
  }
  return out;
}

DiagramSet chain_of_seven() {
  const char* ids[] = {"prolonged_pr", "prolonged_qrs", "left_axis_deviation", "premature_beat",
                       "lvh_ravl", "t_inversion_lateral", "st_elevation_inferior"};
  std::string nodes;
  for (int i = 0; i < 7; ++i) {
    const std::string yes = i == 6 ? "POS" : "n" + std::to_string(i + 1);
    nodes += std::string(i ? "," : "") + R"({"id": "n)" + std::to_string(i) + R"(", "finding": ")" + ids[i] +
             R"(", "yes": ")" + yes + R"(", "no": "NEG"})";
  }
  return parse_diagrams(R"({"diagrams": [{"id": "C7", "name": "Chain", "root": "n0", "nodes": [)" + nodes + "]}]}",
                        default_catalog());
}

std::size_t selected_for(const SampleResult& r, Leaf polarity) {
  std::size_t n = 0;
  for (const auto& a : r.allocations) {
    if (a.polarity == polarity) n += a.selected;
  }
  return n;
}

}  // namespace

TEST(BuildCase, LeftBundleBranchBlockStructure) {
  const auto c = scenario_case("CLBBB/YYYY", "CLBBB");
  EXPECT_EQ(c.polarity, Leaf::Positive);
  EXPECT_EQ(c.path.path_id(), "YYYY");
  ASSERT_FALSE(c.turns.empty());
  EXPECT_EQ(c.turns[0].step, Step::Initial);
  EXPECT_EQ(c.turns[0].gt_answer, "Yes");
  ASSERT_EQ(c.loops.size(), 4u);
  const std::vector<int> ns = {2, 1, 2, 2};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(c.loops[i].grounding_n, ns[i]) << i;
  EXPECT_EQ(c.n_reasoning_turns, 4 * 3 + 7);
  EXPECT_EQ(c.turns.size(), 1u + 19u);

  std::vector<int> stages;
  for (std::size_t i = 1; i < c.turns.size(); ++i) stages.push_back(loop_stage(c.turns[i].step));
  EXPECT_TRUE(std::is_sorted(stages.begin(), stages.begin() + 5));
  EXPECT_EQ(c.turns.back().step, Step::DiagnosticDecision);
  EXPECT_EQ(c.turns.back().gt_answer, "Yes");
}

TEST(BuildCase, CriterionOptionsIncludeSiblings) {
  const auto c = scenario_case("1AVB/YN", "1AVB");
  const auto& sel = c.turns[1];
  ASSERT_EQ(sel.step, Step::CriterionSelection);
  EXPECT_EQ(sel.finding_id, "prolonged_pr");
  ASSERT_EQ(sel.options.size(), 4u);
  EXPECT_NE(std::find(sel.options.begin(), sel.options.end(), "Normal PR interval"), sel.options.end());
  EXPECT_NE(std::find(sel.options.begin(), sel.options.end(), sel.gt_answer), sel.options.end());
}

TEST(BuildCase, OptionTurnsHaveOneCorrectAnswer) {
  for (const char* name : {"CLBBB/YYYY", "3AVB/YYN", "LVH/NNYY", "PVC/YY", "AMI/NY"}) {
    const std::string n = name;
    const auto c = scenario_case(n, n.substr(0, n.find('/')));
    for (const auto& t : c.turns) {
      if (t.options.empty()) {
        EXPECT_TRUE(t.gt_answer == "Yes" || t.gt_answer == "No") << name;
        continue;
      }
      EXPECT_EQ(t.options.size(), 4u) << name;
      EXPECT_EQ(std::count(t.options.begin(), t.options.end(), t.gt_answer), 1) << name << " " << step_name(t.step);
    }
  }
}

TEST(BuildCase, Deterministic) {
  EXPECT_EQ(case_to_json(scenario_case("CRBBB/YYY", "CRBBB", 4)), case_to_json(scenario_case("CRBBB/YYY", "CRBBB", 4)));
}

TEST(BuildCase, JsonRoundTrip) {
  const auto c = scenario_case("2AVB/YN", "2AVB");
  const auto back = case_from_json(case_to_json(c));
  EXPECT_EQ(case_to_json(back), case_to_json(c));
  EXPECT_EQ(back.path, c.path);
  EXPECT_EQ(back.turns.size(), c.turns.size());
  EXPECT_THROW(case_from_json("{}"), Error);
}

TEST(BuildCase, CasesFileRoundTrip) {
  ecgbench::testing::TempDir dir("bench_rt");
  std::vector<BenchmarkCase> cases = {scenario_case("1AVB/YN", "1AVB"), scenario_case("1AVB/N", "1AVB")};
  write_cases(cases, dir / "cases.jsonl");
  const auto back = read_cases(dir / "cases.jsonl");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(case_to_json(back[i]), case_to_json(cases[i]));
}

TEST(BuildCase, ReplayMatchesPolarity) {
  for (const auto& name : scenario_names()) {
    const auto diag = name.substr(0, name.find('/'));
    const auto c = scenario_case(name, diag, 9);
    EXPECT_EQ(replay_case(c, default_diagrams()), c.polarity) << name;
  }
}

TEST(Quota, RoundsUpToMultipleOfPaths) {
  EXPECT_EQ(path_quota(100, 3) * 3, 102u);
  EXPECT_EQ(path_quota(100, 7) * 7, 105u);
  EXPECT_EQ(path_quota(100, 1), 100u);
  EXPECT_EQ(path_quota(100, 0), 0u);
}

TEST(Sampling, ThreeNegativePaths) {
  const auto& diagrams = default_diagrams();
  auto cands = fake_candidates("CRBBB", Leaf::Negative, {"YYN", "YN", "N"}, 60);
  const auto pos = fake_candidates("CRBBB", Leaf::Positive, {"YYY"}, 150);
  for (auto c : pos) {
    c.source = cands.size();
    cands.push_back(c);
  }
  const auto r = stratified_sample(cands, diagrams, {100, {"CRBBB"}}, 5);
  EXPECT_EQ(selected_for(r, Leaf::Negative), 102u);
  EXPECT_EQ(selected_for(r, Leaf::Positive), 100u);
  EXPECT_EQ(r.selected.size(), 202u);
}

TEST(Sampling, SevenPathsAndShortfall) {
  const auto set = chain_of_seven();
  std::vector<std::string> neg;
  for (const auto& p : enumerate_paths(set.at("C7"))) {
    if (p.leaf == Leaf::Negative) neg.push_back(p.path_id());
  }
  ASSERT_EQ(neg.size(), 7u);
  auto r = stratified_sample(fake_candidates("C7", Leaf::Negative, neg, 20), set, {100, {}}, 1);
  EXPECT_EQ(selected_for(r, Leaf::Negative), 105u);

  r = stratified_sample(fake_candidates("C7", Leaf::Negative, neg, 10), set, {100, {}}, 1);
  EXPECT_EQ(selected_for(r, Leaf::Negative), 70u);
  for (const auto& a : r.allocations) {
    if (a.polarity == Leaf::Negative) EXPECT_EQ(a.shortfall(), 5u);
  }
}

TEST(Sampling, SeedDeterminesSelection) {
  const auto cands = fake_candidates("CRBBB", Leaf::Negative, {"YYN", "YN", "N"}, 60);
  auto ids = [](const SampleResult& r) {
    std::vector<std::string> v;
    for (const auto& c : r.selected) v.push_back(c.record_id);
    return v;
  };
  const SamplingPlan plan{10, {"CRBBB"}};
  EXPECT_EQ(ids(stratified_sample(cands, default_diagrams(), plan, 3)),
            ids(stratified_sample(cands, default_diagrams(), plan, 3)));
  EXPECT_NE(ids(stratified_sample(cands, default_diagrams(), plan, 3)),
            ids(stratified_sample(cands, default_diagrams(), plan, 4)));
}

TEST(Sampling, LabelFilterRejects) {
  const auto cands = fake_candidates("CRBBB", Leaf::Positive, {"YYY"}, 10);
  LabelFilter labels;
  for (int i = 0; i < 4; ++i) labels[cands[i].record_id]["CRBBB"] = false;
  const auto r = stratified_sample(cands, default_diagrams(), {100, {"CRBBB"}}, 2, &labels);
  EXPECT_EQ(r.label_rejected, 4u);
  EXPECT_EQ(selected_for(r, Leaf::Positive), 6u);
}

TEST(Stats, EmptyAndCounted) {
  const auto empty = dataset_stats({});
  EXPECT_EQ(empty.qa_pairs, 0u);
  EXPECT_EQ(empty.avg_reasoning_turns, 0.0);

  BenchmarkCase c;
  c.record_id = "r";
  c.polarity = Leaf::Positive;
  c.turns.resize(1);
  for (int l = 0; l < 4; ++l) {
    c.loops.push_back({"f", true, 1});
    for (Step s : {Step::CriterionSelection, Step::FindingIdentification, Step::GroundLead,
                   Step::DiagnosticDecision}) {
      c.turns.push_back(Turn{s, l});
    }
  }
  c.n_reasoning_turns = 16;
  auto other = c;
  other.polarity = Leaf::Negative;
  const auto s = dataset_stats({c, other});
  EXPECT_EQ(s.unique_records, 1u);
  EXPECT_EQ(s.positive_cases, 1u);
  EXPECT_EQ(s.negative_cases, 1u);
  EXPECT_EQ(s.qa_pairs, 34u);
  EXPECT_DOUBLE_EQ(s.avg_reasoning_turns, 16.0);
}

TEST(Options, MeasurementBins) {
  for (int pos = 0; pos < 4; ++pos) {
    const auto bins = measurement_bins(247.0, 20.0, pos);
    ASSERT_EQ(bins.size(), 4u);
    EXPECT_GT(247.0, bins[pos].first);
    EXPECT_LT(247.0, bins[pos].second);
    for (std::size_t i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(bins[i].first, bins[i - 1].second);
  }
  const auto edge = measurement_bins(240.0, 20.0, 1);
  EXPECT_GT(240.0, edge[1].first);
  EXPECT_LT(240.0, edge[1].second);
  EXPECT_EQ(format_bin(230, 250, "ms"), "230 to 250 ms");
}

TEST(Options, WaveWindowsCoverRecord) {
  const auto w = wave_windows(10.0, {0.8, 1.6, 2.4, 3.2, 4.0, 4.8, 5.6, 6.4, 7.2, 8.0, 8.8, 9.6});
  ASSERT_EQ(w.size(), 4u);
  EXPECT_DOUBLE_EQ(w.front().first, 0.0);
  EXPECT_DOUBLE_EQ(w.back().second, 10.0);
  EXPECT_DOUBLE_EQ(w[0].second, 2.4);
  EXPECT_DOUBLE_EQ(w[1].second, 4.8);
  EXPECT_DOUBLE_EQ(w[2].second, 7.2);
  const auto plain = wave_windows(8.0, {});
  EXPECT_DOUBLE_EQ(plain[0].second, 2.0);
  EXPECT_DOUBLE_EQ(plain[2].second, 6.0);
}

TEST(Options, Letters) {
  EXPECT_EQ(option_letter(0), "A");
  EXPECT_EQ(option_letter(3), "D");
}

TEST(Templates, RenderErrors) {
  const auto t = parse_templates(R"({"templates": {"greet": "Hello {name}"}})");
  EXPECT_EQ(t.render("greet", {{"name", "ECG"}}), "Hello ECG");
  EXPECT_THROW(t.render("greet", {}), ConfigError);
  EXPECT_THROW(t.render("missing", {}), ConfigError);
}

TEST(Steps, NamesRoundTrip) {
  for (Step s : {Step::Initial, Step::CriterionSelection, Step::FindingIdentification, Step::GroundLead,
                 Step::GroundWave, Step::GroundMeasurement, Step::DiagnosticDecision}) {
    EXPECT_EQ(parse_step(step_name(s)), s);
  }
  EXPECT_FALSE(parse_step("NOPE").has_value());
  EXPECT_EQ(loop_stage(Step::Initial), 0);
  EXPECT_EQ(loop_stage(Step::GroundWave), 3);
  EXPECT_EQ(loop_stage(Step::DiagnosticDecision), 4);
}
