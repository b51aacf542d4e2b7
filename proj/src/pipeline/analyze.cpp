#include "ecgbench/pipeline/analyze.hpp"

#include <algorithm>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"

namespace ecgbench {

namespace {

std::vector<double> beat_boundaries(const BeatMeasurements& m) {
  std::vector<double> out;
  const double fs = m.sampling_rate;
  for (std::size_t i = 1; i < m.beats.size(); ++i) {
    const auto& prev = m.beats[i - 1];
    const auto& next = m.beats[i];
    const long end = prev.t ? prev.t->offset : prev.qrs.offset;
    const long start = next.p ? next.p->onset : next.qrs.onset;
    out.push_back(0.5 * static_cast<double>(end + start) / fs);
  }
  return out;
}

}  // namespace

const DiagnosisResult& AnalysisResult::diagnosis(const std::string& id) const {
  for (const auto& d : diagnoses) {
    if (d.diagnosis_id == id) return d;
  }
  throw SchemaError("analysis of " + record_id + " has no diagnosis '" + id + "'");
}

AnalysisResult analyze_delineation(const EcgRecord& record, DelineationSet delineation,
                                   const Catalog& catalog, const DiagramSet& diagrams) {
  AnalysisResult r;
  r.record_id = record.id();
  r.sampling_rate = record.sampling_rate();
  r.duration_s = record.duration_s();
  r.delineation = std::move(delineation);
  r.measurements = measure_record(record, r.delineation);
  r.beat_boundaries_s = beat_boundaries(r.measurements);
  r.findings = evaluate_findings(r.measurements, catalog);
  r.diagnoses = run_all(diagrams, r.findings);
  r.compounds = derive_compounds(diagrams, r.diagnoses);
  return r;
}

AnalysisResult analyze_map(const EcgRecord& record, const DelineationMap& map,
                           const Catalog& catalog, const DiagramSet& diagrams) {
  return analyze_delineation(record, delineate(map, record), catalog, diagrams);
}

AnalysisResult analyze_scenario(const Scenario& scenario, const Catalog& catalog,
                                const DiagramSet& diagrams) {
  const auto synth = synthesize(scenario.spec);
  return analyze_map(synth.record, stand_in_map(synth, scenario.map), catalog, diagrams);
}

std::filesystem::path probmap_sidecar(const std::filesystem::path& record_path) {
  auto p = record_path;
  return p.replace_filename(record_path.stem().string() + ".probmap.bin");
}

std::filesystem::path annotations_sidecar(const std::filesystem::path& record_path) {
  auto p = record_path;
  return p.replace_filename(record_path.stem().string() + ".annotations.json");
}

AnalysisResult analyze_file(const std::filesystem::path& record_path, const Catalog& catalog,
                            const DiagramSet& diagrams) {
  const auto record = read_record(record_path);
  AnalysisResult r;
  if (const auto pm = probmap_sidecar(record_path); std::filesystem::exists(pm)) {
    r = analyze_map(record, read_probability_map(pm), catalog, diagrams);
  } else if (const auto an = annotations_sidecar(record_path); std::filesystem::exists(an)) {
    auto set = read_annotations(an, record.sampling_rate());
    set.provenance = Provenance::ExternalAnnotation;
    r = analyze_delineation(record, std::move(set), catalog, diagrams);
  } else {
    throw IoError(record_path.string() + ": no " + pm.filename().string() + " or " +
                  an.filename().string() + " next to the record");
  }
  r.record_path = record_path.string();
  return r;
}

}  // namespace ecgbench
