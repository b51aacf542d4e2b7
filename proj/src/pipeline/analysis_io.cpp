#include <json.hpp>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"
#include "ecgbench/pipeline/analyze.hpp"

namespace ecgbench {

using ojson = nlohmann::ordered_json;

namespace {

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson segment_json(const WaveSegment& s) {
  return ojson{{"class", wave_class_name(s.wave_class)},
               {"onset", s.onset},
               {"offset", s.offset},
               {"peak", s.peak}};
}

ojson lead_json(const LeadMeasures& l) {
  ojson o;
  o["iso_mv"] = l.iso_mv;
  o["p_amp_mv"] = opt(l.p_amp_mv);
  o["r_amp_mv"] = l.r_amp_mv;
  o["s_amp_mv"] = l.s_amp_mv;
  o["q_amp_mv"] = l.q_amp_mv;
  o["q_dur_ms"] = l.q_dur_ms;
  o["r_dur_ms"] = l.r_dur_ms;
  o["s_dur_ms"] = l.s_dur_ms;
  o["t_amp_mv"] = opt(l.t_amp_mv);
  o["st_j_mv"] = l.st_j_mv;
  o["st_mv"] = l.st_mv;
  o["qrs_area_mv_s"] = l.qrs_area_mv_s;
  std::string seq;
  for (const auto& d : l.deflections) seq += deflection_label_name(d.label);
  o["deflections"] = seq;
  o["morphology"] = morphology_name(l.morphology);
  o["notched_r"] = l.notched_r;
  o["pathological_q"] = l.pathological_q;
  return o;
}

ojson measurements_json(const BeatMeasurements& m) {
  ojson o;
  o["orphan_p_count"] = m.orphan_p_count;
  o["atrial_rate_bpm"] = opt(m.atrial_rate_bpm);
  o["ventricular_rate_bpm"] = opt(m.ventricular_rate_bpm);
  o["pr_range_ms"] = opt(m.pr_range_ms);
  o["axis_deg"] = opt(m.axis_deg);
  ojson beats = ojson::array();
  for (const auto& b : m.per_beat) {
    ojson jb;
    jb["index"] = b.index;
    jb["p_dur_ms"] = opt(b.p_dur_ms);
    jb["qrs_dur_ms"] = b.qrs_dur_ms;
    jb["t_dur_ms"] = opt(b.t_dur_ms);
    jb["pr_ms"] = opt(b.pr_ms);
    jb["rr_ms"] = opt(b.rr_ms);
    jb["qt_ms"] = opt(b.qt_ms);
    jb["rr_ratio"] = opt(b.rr_ratio);
    jb["axis_deg"] = opt(b.axis_deg);
    ojson leads;
    for (Lead l : kAllLeads) leads[std::string(lead_name(l))] = lead_json(b.leads[index_of(l)]);
    jb["leads"] = std::move(leads);
    beats.push_back(std::move(jb));
  }
  o["beats"] = std::move(beats);
  return o;
}

ojson finding_json(const Finding& f) {
  ojson o;
  o["id"] = f.finding_id;
  o["present"] = f.present;
  o["undefined"] = f.undefined;
  ojson g;
  ojson leads = ojson::array();
  for (Lead l : f.grounding.leads) leads.push_back(lead_name(l));
  g["leads"] = std::move(leads);
  ojson segs = ojson::array();
  for (const auto& s : f.grounding.segments) segs.push_back(ojson::array({s.onset_s, s.offset_s}));
  g["segments"] = std::move(segs);
  g["value"] = f.grounding.value
                   ? ojson{{"value", f.grounding.value->value}, {"unit", f.grounding.value->unit}}
                   : ojson(nullptr);
  o["grounding"] = std::move(g);
  return o;
}

Finding parse_finding(const ojson& o) {
  Finding f;
  f.finding_id = o.at("id").get<std::string>();
  f.present = o.at("present").get<bool>();
  f.undefined = o.value("undefined", false);
  const auto& g = o.at("grounding");
  for (const auto& l : g.at("leads")) {
    auto lead = parse_lead(l.get<std::string>());
    if (!lead) throw SchemaError("finding " + f.finding_id + ": unknown lead");
    f.grounding.leads.push_back(*lead);
  }
  for (const auto& s : g.at("segments")) {
    f.grounding.segments.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
  }
  if (g.contains("value") && !g["value"].is_null()) {
    f.grounding.value =
        MeasuredValue{g["value"].at("value").get<double>(), g["value"].at("unit").get<std::string>()};
  }
  return f;
}

}  // namespace

std::string analysis_to_json(const AnalysisResult& r) {
  ojson o;
  o["schema_version"] = 1;
  o["record_id"] = r.record_id;
  o["record_path"] = r.record_path;
  o["sampling_rate"] = r.sampling_rate;
  o["duration_s"] = r.duration_s;
  o["beat_boundaries_s"] = r.beat_boundaries_s;
  ojson del;
  del["provenance"] = provenance_name(r.delineation.provenance);
  ojson cons = ojson::array();
  for (const auto& s : r.delineation.consensus) cons.push_back(segment_json(s));
  del["consensus"] = std::move(cons);
  o["delineation"] = std::move(del);
  o["measurements"] = measurements_json(r.measurements);
  ojson fs = ojson::array();
  for (const auto& f : r.findings) fs.push_back(finding_json(f));
  o["findings"] = std::move(fs);
  ojson ds = ojson::array();
  for (const auto& d : r.diagnoses) {
    ojson jd;
    jd["id"] = d.diagnosis_id;
    jd["decision"] = leaf_name(d.decision);
    jd["path_id"] = d.path.path_id();
    ojson steps = ojson::array();
    for (const auto& s : d.path.steps) steps.push_back({{"finding", s.finding_id}, {"present", s.outcome}});
    jd["steps"] = std::move(steps);
    ds.push_back(std::move(jd));
  }
  o["diagnoses"] = std::move(ds);
  ojson cs = ojson::array();
  for (const auto& c : r.compounds) cs.push_back({{"id", c.id}, {"positive", c.positive}});
  o["compounds"] = std::move(cs);
  return o.dump(2) + "\n";
}

AnalysisResult parse_analysis(const std::string& text, const DiagramSet& diagrams) {
  AnalysisResult r;
  try {
    const auto o = ojson::parse(text);
    r.record_id = o.at("record_id").get<std::string>();
    r.record_path = o.value("record_path", std::string{});
    r.sampling_rate = o.at("sampling_rate").get<int>();
    r.duration_s = o.at("duration_s").get<double>();
    r.beat_boundaries_s = o.at("beat_boundaries_s").get<std::vector<double>>();
    r.measurements.record_id = r.record_id;
    r.measurements.sampling_rate = r.sampling_rate;
    r.measurements.duration_s = r.duration_s;
    for (const auto& s : o.at("delineation").at("consensus")) {
      auto cls = parse_wave_class(s.at("class").get<std::string>());
      if (!cls) throw SchemaError("analysis of " + r.record_id + ": unknown wave class");
      r.delineation.consensus.push_back({*cls, LeadRef::consensus(), s.at("onset").get<long>(),
                                         s.at("offset").get<long>(), s.at("peak").get<long>()});
    }
    for (const auto& f : o.at("findings")) r.findings.push_back(parse_finding(f));
    for (const auto& jd : o.at("diagnoses")) {
      const auto id = jd.at("id").get<std::string>();
      auto res = run_diagram(diagrams.at(id), r.findings);
      if (res.path.path_id() != jd.at("path_id").get<std::string>()) {
        throw SchemaError("analysis of " + r.record_id + ": stored path for " + id +
                          " disagrees with the diagram");
      }
      r.diagnoses.push_back(std::move(res));
    }
    for (const auto& c : o.at("compounds")) {
      r.compounds.push_back({c.at("id").get<std::string>(), c.at("positive").get<bool>()});
    }
  } catch (const ojson::exception& e) {
    throw SchemaError(std::string("analysis: ") + e.what());
  }
  return r;
}

AnalysisResult read_analysis(const std::filesystem::path& path, const DiagramSet& diagrams) {
  try {
    return parse_analysis(read_file(path), diagrams);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace ecgbench
