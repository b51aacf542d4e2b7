#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ecgbench/cli/cli.hpp"
#include "ecgbench/core/record_io.hpp"
#include "ecgbench/harness/harness.hpp"
#include "test_util.hpp"

using namespace ecgbench;
using ecgbench::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ecgbench");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  Outcome o;
  o.code = cli::run(static_cast<int>(argv.size()), argv.data());
  o.out = ::testing::internal::GetCapturedStdout();
  o.err = ::testing::internal::GetCapturedStderr();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

std::size_t count_ext(const fs::path& dir, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) ++n;
  }
  return n;
}

}  // namespace

TEST(Cli, SynthScenarios) {
  TempDir dir("cli_synth");
  const auto a = dir / "a";
  auto o = run_cli({"synth", "--scenarios", "1AVB/YN", "CLBBB/YYYY", "--count", "4", "--seed", "1", "--out",
                    a.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto m = manifest(a);
  EXPECT_EQ(m["count"], 4);
  EXPECT_EQ(m["records"].size(), 4u);
  EXPECT_EQ(count_ext(a, ".probmap.bin"), 4u);
  EXPECT_EQ(count_ext(a, ".annotations.json"), 4u);
  EXPECT_TRUE(fs::exists(a / "labels.json"));

  const auto b = dir / "b";
  o = run_cli({"synth", "--scenarios", "1AVB/YN", "CLBBB/YYYY", "--count", "4", "--seed", "1", "--out", b.string(),
               "--jobs", "1"});
  ASSERT_EQ(o.code, 0);
  for (const auto& r : m["records"]) {
    const auto name = r["record"].get<std::string>();
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

TEST(Cli, SynthSpecReadBack) {
  TempDir dir("cli_spec");
  {
    std::ofstream(dir / "spec.json") << R"({"id": "avb", "pr_ms": 260})";
  }
  auto o = run_cli({"synth", "--spec", (dir / "spec.json").string(), "--count", "2", "--seed", "5", "--format", "csv",
                    "--out", (dir / "rec").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(count_ext(dir / "rec", ".csv"), 2u);
  const auto rec = read_record(dir / "rec" / "avb_0000.csv");
  const auto gt = read_annotations(annotations_sidecar(dir / "rec" / "avb_0000.csv"), rec.sampling_rate());
  long p_onset = -1;
  int checked = 0;
  for (const auto& s : gt.consensus) {
    if (s.wave_class == WaveClass::P) p_onset = s.onset;
    if (s.wave_class == WaveClass::QRS && p_onset >= 0) {
      EXPECT_NEAR((s.onset - p_onset) * rec.ms_per_sample(), 260.0, rec.ms_per_sample());
      ++checked;
      p_onset = -1;
    }
  }
  EXPECT_GE(checked, 8);

  o = run_cli({"analyze", (dir / "rec").string(), "--out", (dir / "an").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto a = read_analysis(dir / "an" / "avb_0000.analysis.json", default_diagrams());
  EXPECT_TRUE(find_finding(a.findings, "prolonged_pr")->present);
  EXPECT_EQ(a.diagnosis("1AVB").decision, Leaf::Positive);
}

TEST(Cli, AnalyzeContinuesPastBadRecord) {
  TempDir dir("cli_analyze");
  auto o = run_cli({"synth", "--scenarios", "PVC/YY", "--count", "3", "--seed", "2", "--out", (dir / "rec").string()});
  ASSERT_EQ(o.code, 0);
  const auto flat = ecgbench::testing::flat_record("flat", 500, 5000);
  write_record(flat, dir / "rec" / "flat.bin");
  write_probability_map(DelineationMap(flat.sample_count()), flat, probmap_sidecar(dir / "rec" / "flat.bin"));

  o = run_cli({"analyze", (dir / "rec").string(), "--out", (dir / "an").string()});
  EXPECT_EQ(o.code, 0);
  const auto m = manifest(dir / "an");
  EXPECT_EQ(m["analyzed"], 3);
  ASSERT_EQ(m["failures"].size(), 1u);
  EXPECT_NE(m["failures"][0]["item"].get<std::string>().find("flat.bin"), std::string::npos);
  EXPECT_NE(o.err.find("flat.bin"), std::string::npos);
  EXPECT_EQ(count_ext(dir / "an", ".analysis.json"), 3u);
}

TEST(Cli, GenerateAndEvaluateDeterministic) {
  TempDir dir("cli_gen");
  ASSERT_EQ(run_cli({"synth", "--scenarios", "1AVB/YN", "1AVB/YY", "1AVB/N", "CRBBB/YYY", "CRBBB/YN", "--count", "15",
                     "--seed", "3", "--out", (dir / "rec").string()})
                .code,
            0);
  ASSERT_EQ(run_cli({"analyze", (dir / "rec").string(), "--out", (dir / "an").string()}).code, 0);
  for (const char* jobs : {"1", "4"}) {
    const auto out = dir / (std::string("gen") + jobs);
    const auto o = run_cli({"--jobs", jobs, "generate", (dir / "an").string(), "--seed", "9", "--target", "4",
                            "--diagnoses", "1AVB,CRBBB", "--out", out.string()});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto ev = dir / (std::string("ev") + jobs);
    const auto e = run_cli({"--jobs", jobs, "evaluate", (out / "cases.jsonl").string(), "--mock", "random:4", "--out",
                            ev.string()});
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_NE(e.out.find("IDA"), std::string::npos);
  }
  for (const char* f : {"cases.jsonl", "stats.json", "path_table.txt"}) {
    EXPECT_EQ(slurp(dir / "gen1" / f), slurp(dir / "gen4" / f)) << f;
  }
  for (const char* f : {"transcripts.jsonl", "metrics.json"}) {
    EXPECT_EQ(slurp(dir / "ev1" / f), slurp(dir / "ev4" / f)) << f;
  }
  const auto cases = read_cases(dir / "gen1" / "cases.jsonl");
  EXPECT_FALSE(cases.empty());
  for (const auto& c : cases) EXPECT_EQ(replay_case(c, default_diagrams()), c.polarity) << c.case_id;
}

TEST(Cli, EvaluateResumesAndPerfectScores) {
  TempDir dir("cli_eval");
  ASSERT_EQ(run_cli({"synth", "--scenarios", "LAFB/YYYY", "LAFB/N", "--count", "4", "--seed", "1", "--out",
                     (dir / "rec").string()})
                .code,
            0);
  ASSERT_EQ(run_cli({"analyze", (dir / "rec").string(), "--out", (dir / "an").string()}).code, 0);
  ASSERT_EQ(run_cli({"generate", (dir / "an").string(), "--seed", "1", "--target", "2", "--out", (dir / "gen").string()})
                .code,
            0);
  const auto cases = (dir / "gen" / "cases.jsonl").string();
  ASSERT_EQ(run_cli({"evaluate", cases, "--mock", "perfect", "--out", (dir / "ev").string()}).code, 0);
  const auto first = slurp(dir / "ev" / "transcripts.jsonl");
  ASSERT_EQ(run_cli({"evaluate", cases, "--mock", "perfect", "--out", (dir / "ev").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "ev" / "transcripts.jsonl"), first);
  const auto m = nlohmann::json::parse(slurp(dir / "ev" / "metrics.json"));
  EXPECT_EQ(m["overall"]["depth"], 4.0);
  EXPECT_EQ(m["overall"]["ida"], 100.0);
}

TEST(Cli, ScoreSegIdentity) {
  TempDir dir("cli_score");
  ASSERT_EQ(run_cli({"synth", "--scenarios", "1AVB/YN", "--count", "1", "--seed", "1", "--out", (dir / "rec").string()})
                .code,
            0);
  fs::path rec;
  for (const auto& e : fs::directory_iterator(dir / "rec")) {
    if (e.path().extension() == ".bin" && e.path().string().find(".probmap") == std::string::npos) rec = e.path();
  }
  const auto ann = annotations_sidecar(rec).string();
  const auto o = run_cli({"score-seg", ann, ann, "--record", rec.string(), "--out", (dir / "score.txt").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(slurp(dir / "score.txt"), o.out);
  EXPECT_NE(o.out.find("1.000"), std::string::npos);
}

TEST(Cli, RenderBothFormats) {
  TempDir dir("cli_render");
  const auto rec = dir / "r.bin";
  write_record(synthesize(SyntheticSpec{}).record, rec);
  ASSERT_EQ(run_cli({"render", rec.string(), "--out", (dir / "r.png").string()}).code, 0);
  const auto png = slurp(dir / "r.png");
  ASSERT_GE(png.size(), 8u);
  EXPECT_EQ(png.substr(1, 3), "PNG");
  ASSERT_EQ(run_cli({"render", rec.string(), "--layout", "stacked", "--out", (dir / "r.svg").string()}).code, 0);
  EXPECT_NE(slurp(dir / "r.svg").find("<svg"), std::string::npos);
  EXPECT_EQ(run_cli({"render", rec.string(), "--out", (dir / "r.gif").string()}).code, 1);
}

TEST(Cli, Errors) {
  EXPECT_NE(run_cli({"synth", "--out", "/tmp/x"}).code, 0);
  const auto o = run_cli({"analyze", "/nonexistent/path", "--out", "/tmp/ecgbench_none"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("error:"), std::string::npos);
  EXPECT_EQ(run_cli({"synth", "--scenarios", "NOPE/Y", "--seed", "1", "--out", "/tmp/ecgbench_none"}).code, 1);
  EXPECT_NE(run_cli({}).code, 0);
}

TEST(Cli, ListsScenarios) {
  const auto o = run_cli({"scenarios"});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("CLBBB/YYYY"), std::string::npos);
}
