#include <gtest/gtest.h>

#include <set>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/synth.hpp"
#include "ecgbench/findings/findings.hpp"

using namespace ecgbench;

namespace {

BeatMeasurements with_prs(const std::vector<double>& prs) {
  BeatMeasurements m;
  m.record_id = "pr";
  m.sampling_rate = 500;
  m.duration_s = 10.0;
  for (std::size_t i = 0; i < prs.size(); ++i) {
    const long base = 200 + 400 * static_cast<long>(i);
    const long pr = static_cast<long>(prs[i] / 2.0);
    Beat b;
    b.index = static_cast<int>(i);
    b.qrs = {WaveClass::QRS, LeadRef::consensus(), base, base + 45, base + 20};
    b.p = WaveSegment{WaveClass::P, LeadRef::consensus(), base - pr, base - pr + 50, base - pr + 25};
    m.beats.push_back(b);
    BeatMeasures bm;
    bm.index = b.index;
    bm.qrs_dur_ms = 90;
    bm.pr_ms = prs[i];
    m.per_beat.push_back(bm);
  }
  return m;
}

const Finding& get(const std::vector<Finding>& fs, const std::string& id) {
  const auto* f = find_finding(fs, id);
  if (!f) throw std::runtime_error("missing " + id);
  return *f;
}

const char* kMinimal = R"J({"criteria": [
  {"id": "a", "name": "A", "category": "X", "predicate": "majority(pr > 200)",
   "grounding": {"measurement": {"expr": "pr", "unit": "ms"}}},
  {"id": "a", "name": "A2", "category": "X", "predicate": "majority(pr < 120)",
   "grounding": {"measurement": {"expr": "pr", "unit": "ms"}}}
]})J";

}  // namespace

TEST(Catalog, DefaultCoversAllCategories) {
  const auto& cat = default_catalog();
  EXPECT_GE(cat.criteria.size(), 40u);
  const auto cats = cat.categories();
  const std::set<std::string> names(cats.begin(), cats.end());
  for (const char* c : {"PR interval", "AV conduction", "QRS duration", "Axis", "QRS morphology",
                        "QRS voltage", "Ectopy", "Q waves", "ST segment", "T wave"}) {
    EXPECT_TRUE(names.count(c)) << c;
  }
  for (const auto& c : cat.criteria) {
    EXPECT_FALSE(c.grounding_kinds.empty()) << c.finding_id;
    EXPECT_TRUE(c.predicate) << c.finding_id;
  }
}

TEST(Catalog, EmptyCriteriaRejected) {
  EXPECT_THROW(parse_catalog(R"({"criteria": []})"), SchemaError);
  EXPECT_THROW(parse_catalog("not json"), SchemaError);
}

TEST(Catalog, DuplicateIdNamed) {
  try {
    parse_catalog(kMinimal);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos) << e.what();
  }
}

TEST(Catalog, UnknownFieldRejected) {
  EXPECT_THROW(parse_catalog(R"J({"criteria": [{"id": "a", "name": "A", "category": "X",
      "predicate": "bogus_field > 1", "grounding": {"measurement": {"expr": "pr", "unit": "ms"}}}]})J"),
               SchemaError);
}

TEST(Findings, ProlongedPrPresentWithValue) {
  const auto fs = evaluate_findings(with_prs(std::vector<double>(10, 240.0)), default_catalog());
  const auto& f = get(fs, "prolonged_pr");
  EXPECT_TRUE(f.present);
  ASSERT_TRUE(f.grounding.value.has_value());
  EXPECT_DOUBLE_EQ(f.grounding.value->value, 240.0);
  EXPECT_EQ(f.grounding.value->unit, "ms");
  EXPECT_EQ(f.grounding.segments.size(), 10u);
  EXPECT_FALSE(get(fs, "normal_pr").present);
}

TEST(Findings, NormalPrAbsent) {
  const auto fs = evaluate_findings(with_prs(std::vector<double>(10, 160.0)), default_catalog());
  EXPECT_FALSE(get(fs, "prolonged_pr").present);
  EXPECT_TRUE(get(fs, "normal_pr").present);
}

TEST(Findings, MajorityOfBeats) {
  std::vector<double> prs(10, 160.0);
  for (int i = 0; i < 6; ++i) prs[i] = 240.0;
  auto fs = evaluate_findings(with_prs(prs), default_catalog());
  EXPECT_TRUE(get(fs, "prolonged_pr").present);
  EXPECT_EQ(get(fs, "prolonged_pr").grounding.segments.size(), 6u);
  prs[5] = 160.0;  // 5 of 10 is not a majority
  fs = evaluate_findings(with_prs(prs), default_catalog());
  EXPECT_FALSE(get(fs, "prolonged_pr").present);
}

TEST(Findings, ByCategory) {
  const auto& cat = default_catalog();
  const auto fs = evaluate_findings(with_prs(std::vector<double>(10, 160.0)), cat);
  const auto pr = findings_by_category(fs, cat, "PR interval");
  std::set<std::string> ids;
  for (const auto& f : pr) ids.insert(f.finding_id);
  EXPECT_EQ(ids, (std::set<std::string>{"prolonged_pr", "normal_pr", "short_pr"}));
  EXPECT_TRUE(findings_by_category(fs, cat, "No such category").empty());
  std::size_t total = 0;
  for (const auto& c : cat.categories()) total += findings_by_category(fs, cat, c).size();
  EXPECT_EQ(total, fs.size());
}

TEST(Findings, SynthesizedFirstDegreeBlock) {
  SyntheticSpec spec;
  spec.pr_ms = 260;
  const auto res = synthesize(spec);
  const auto m = measure_record(res.record, truth_delineation(res.truth));
  const auto fs = evaluate_findings(m, default_catalog());
  EXPECT_TRUE(get(fs, "prolonged_pr").present);
  EXPECT_NEAR(get(fs, "prolonged_pr").grounding.value->value, 260.0, 2.0);
  EXPECT_TRUE(get(fs, "one_to_one_conduction").present);
  EXPECT_FALSE(get(fs, "nonconducted_p").present);
}

TEST(Predicate, Arithmetic) {
  BeatMeasurements m = with_prs({100, 200, 300});
  const EvalContext ctx{&m, std::nullopt, std::nullopt};
  EXPECT_EQ(evaluate(parse_predicate("1 + 2 * 3"), ctx), 7.0);
  EXPECT_EQ(evaluate(parse_predicate("(1 + 2) * 3"), ctx), 9.0);
  EXPECT_EQ(evaluate(parse_predicate("-2 < 1 and not 0"), ctx), 1.0);
  EXPECT_EQ(evaluate(parse_predicate("median(pr)"), ctx), 200.0);
  EXPECT_EQ(evaluate(parse_predicate("count_beats(pr >= 200)"), ctx), 2.0);
  EXPECT_EQ(evaluate(parse_predicate("all_beats(pr > 50)"), ctx), 1.0);
  EXPECT_EQ(evaluate(parse_predicate("max(1, abs(-4), 3)"), ctx), 4.0);
}

TEST(Predicate, UndefinedPropagates) {
  BeatMeasurements m = with_prs({100});
  const EvalContext ctx{&m, std::nullopt, std::nullopt};
  EXPECT_FALSE(evaluate(parse_predicate("atrial_rate > 10"), ctx).has_value());
  EXPECT_EQ(evaluate(parse_predicate("atrial_rate > 10 or 1"), ctx), 1.0);
  EXPECT_EQ(evaluate(parse_predicate("atrial_rate > 10 and 0"), ctx), 0.0);
}

TEST(Predicate, SyntaxErrors) {
  EXPECT_THROW(parse_predicate("pr >"), SchemaError);
  EXPECT_THROW(parse_predicate("(pr > 1"), SchemaError);
  EXPECT_THROW(parse_predicate("r_amp[V9] > 1"), SchemaError);
  EXPECT_THROW(parse_predicate("nosuchfn(pr)"), SchemaError);
}

TEST(Predicate, ReferencedFields) {
  const auto f = referenced_fields(parse_predicate("majority(s_amp[V1] + r_amp[V5] > 3.5) and pr > 1"));
  const std::set<std::string> s(f.begin(), f.end());
  EXPECT_TRUE(s.count("s_amp"));
  EXPECT_TRUE(s.count("r_amp"));
  EXPECT_TRUE(s.count("pr"));
}

TEST(Findings, BinWidths) {
  EXPECT_EQ(unit_bin_width("ms"), 20.0);
  EXPECT_EQ(unit_bin_width("mV"), 0.1);
  EXPECT_EQ(unit_bin_width("deg"), 15.0);
  EXPECT_EQ(unit_bin_width("bpm"), 10.0);
  EXPECT_EQ(unit_bin_width("count"), 1.0);
}
