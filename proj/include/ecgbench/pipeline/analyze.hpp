#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ecgbench/core/scenarios.hpp"
#include "ecgbench/delineation/delineation.hpp"
#include "ecgbench/diagnosis/diagram.hpp"
#include "ecgbench/features/features.hpp"
#include "ecgbench/findings/findings.hpp"

namespace ecgbench {

struct AnalysisResult {
  std::string record_id;
  std::string record_path;
  int sampling_rate = 0;
  double duration_s = 0.0;
  /// Cut points between consecutive beats, seconds.
  std::vector<double> beat_boundaries_s;
  DelineationSet delineation;
  BeatMeasurements measurements;
  std::vector<Finding> findings;
  std::vector<DiagnosisResult> diagnoses;
  std::vector<CompoundResult> compounds;

  const DiagnosisResult& diagnosis(const std::string& id) const;
};

AnalysisResult analyze_delineation(const EcgRecord& record, DelineationSet delineation,
                                   const Catalog& catalog, const DiagramSet& diagrams);

AnalysisResult analyze_map(const EcgRecord& record, const DelineationMap& map,
                           const Catalog& catalog, const DiagramSet& diagrams);

/// Synthesizes the scenario and analyzes it through its stand-in probability map.
AnalysisResult analyze_scenario(const Scenario& scenario, const Catalog& catalog,
                                const DiagramSet& diagrams);

/// Sidecar paths next to a record file: `<stem>.probmap.bin`, `<stem>.annotations.json`.
std::filesystem::path probmap_sidecar(const std::filesystem::path& record_path);
std::filesystem::path annotations_sidecar(const std::filesystem::path& record_path);

/// Reads the record and its delineation sidecar (probability map preferred).
AnalysisResult analyze_file(const std::filesystem::path& record_path, const Catalog& catalog,
                            const DiagramSet& diagrams);

std::string analysis_to_json(const AnalysisResult& result);
/// Restores everything benchmark generation needs: record reference, consensus,
/// findings, diagnoses and compounds. Per-beat measurements are not restored.
AnalysisResult parse_analysis(const std::string& text, const DiagramSet& diagrams);
AnalysisResult read_analysis(const std::filesystem::path& path, const DiagramSet& diagrams);

}  // namespace ecgbench
