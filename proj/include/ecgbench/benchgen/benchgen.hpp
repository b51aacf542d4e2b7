#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecgbench/diagnosis/diagram.hpp"
#include "ecgbench/findings/findings.hpp"
#include "ecgbench/pipeline/analyze.hpp"

namespace ecgbench {

enum class Step {
  Initial,
  CriterionSelection,
  FindingIdentification,
  GroundLead,
  GroundWave,
  GroundMeasurement,
  DiagnosticDecision
};

std::string_view step_name(Step s);
std::optional<Step> parse_step(std::string_view name);
/// Position of the step inside a finding loop (1..4); 0 for INITIAL.
int loop_stage(Step s);

struct Turn {
  Step step = Step::Initial;
  std::optional<int> loop;  // finding loop index, absent for INITIAL
  std::string finding_id;
  std::string prompt;
  std::vector<std::string> options;  // empty for yes/no turns
  std::string gt_answer;
  std::string gt_rationale;
  bool fallback = false;  // distractor set could not follow the default recipe
};

struct FindingLoop {
  std::string finding_id;
  bool present = false;
  int grounding_n = 0;  // grounding sub-tasks asked in step 3
};

struct BenchmarkCase {
  std::string case_id;
  std::string record_id;
  std::string record_path;
  std::string diagnosis_id;
  Leaf polarity = Leaf::Negative;
  ReasoningPath path;
  std::vector<Turn> turns;
  std::vector<FindingLoop> loops;
  int n_reasoning_turns = 0;
  bool distractor_fallback = false;
};

/// Prompt wording, loaded from configuration.
struct Templates {
  std::map<std::string, std::string> text;

  /// Replaces `{key}` placeholders; throws ConfigError for an unknown template.
  std::string render(const std::string& name, const std::map<std::string, std::string>& vars) const;
  const std::string& at(const std::string& name) const;
};

Templates parse_templates(const std::string& json_text);
Templates load_templates(const std::filesystem::path& path);
const Templates& default_templates();

/// Letters A, B, C, ... for option positions.
std::string option_letter(std::size_t i);

/// Four adjacent bins of `width`; the value sits strictly inside the bin at `position`.
std::vector<std::pair<double, double>> measurement_bins(double value, double width, int position);
std::string format_bin(double lo, double hi, const std::string& unit);

/// Four windows covering [0, duration] with cuts snapped to beat boundaries.
std::vector<std::pair<double, double>> wave_windows(double duration_s,
                                                    const std::vector<double>& boundaries_s);

struct CaseContext {
  const Catalog& catalog;
  const DiagramSet& diagrams;
  const Templates& templates;
};

/// Throws GroundingUnavailable when a present finding on the path lacks evidence.
BenchmarkCase build_case(const AnalysisResult& analysis, const DiagnosisResult& result,
                         const CaseContext& ctx, std::uint64_t seed);

/// Walks the diagram with the case's ground-truth identification answers.
Leaf replay_case(const BenchmarkCase& c, const DiagramSet& diagrams,
                 const Templates& templates = default_templates());

// ---------------------------------------------------------------------------
// Sampling

struct Candidate {
  std::size_t source = 0;  // index of the analysis the candidate came from
  std::string record_id;
  std::string diagnosis_id;
  Leaf polarity = Leaf::Negative;
  std::string path_id;
};

struct SamplingPlan {
  std::size_t target = 100;  // per (diagnosis, polarity)
  std::vector<std::string> diagnoses;  // empty selects every diagram
};

/// Equal per-path quota raising the total to the next multiple of `paths`.
std::size_t path_quota(std::size_t target, std::size_t paths);

struct PathAllocation {
  std::string diagnosis_id;
  Leaf polarity = Leaf::Negative;
  std::string path_id;
  std::size_t quota = 0;
  std::size_t available = 0;
  std::size_t selected = 0;
  std::size_t shortfall() const { return quota - selected; }
};

struct SampleResult {
  std::vector<Candidate> selected;
  std::vector<PathAllocation> allocations;
  std::size_t label_rejected = 0;
};

/// record id -> diagnosis id -> human label (true = positive)
using LabelFilter = std::map<std::string, std::map<std::string, bool>>;

SampleResult stratified_sample(const std::vector<Candidate>& candidates, const DiagramSet& diagrams,
                               const SamplingPlan& plan, std::uint64_t seed,
                               const LabelFilter* labels = nullptr);

std::vector<Candidate> candidates_from(const std::vector<AnalysisResult>& analyses);

struct DatasetStats {
  std::size_t unique_records = 0;
  std::size_t positive_cases = 0;
  std::size_t negative_cases = 0;
  std::size_t qa_pairs = 0;  // every turn including INITIAL
  double avg_reasoning_turns = 0.0;
};

DatasetStats dataset_stats(const std::vector<BenchmarkCase>& cases);

std::string stats_to_json(const DatasetStats& stats, const SampleResult& sample);
std::string format_path_table(const SampleResult& sample);

// ---------------------------------------------------------------------------
// Case files: JSON lines, one case per line

inline constexpr int kCaseSchemaVersion = 1;

std::string case_to_json(const BenchmarkCase& c);
BenchmarkCase case_from_json(const std::string& line);
void write_cases(const std::vector<BenchmarkCase>& cases, const std::filesystem::path& path);
std::vector<BenchmarkCase> read_cases(const std::filesystem::path& path);

}  // namespace ecgbench
