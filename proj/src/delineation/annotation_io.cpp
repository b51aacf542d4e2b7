#include <json.hpp>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"
#include "ecgbench/delineation/delineation.hpp"

namespace ecgbench {

using ojson = nlohmann::ordered_json;

std::string format_annotations(const DelineationSet& set) {
  ojson arr = ojson::array();
  auto emit = [&](const WaveSegment& s) {
    ojson o;
    o["lead"] = lead_ref_name(s.lead);
    o["class"] = wave_class_name(s.wave_class);
    o["onset"] = s.onset;
    o["offset"] = s.offset;
    o["peak"] = s.peak;
    arr.push_back(std::move(o));
  };
  for (const auto& v : set.per_lead) {
    for (const auto& s : v) emit(s);
  }
  for (const auto& s : set.consensus) emit(s);
  return arr.dump(1) + "\n";
}

DelineationSet parse_annotations(const std::string& text, int sampling_rate) {
  ojson arr;
  try {
    arr = ojson::parse(text);
  } catch (const ojson::exception& e) {
    throw FormatError(std::string("annotations: ") + e.what());
  }
  if (!arr.is_array()) throw FormatError("annotations: expected a JSON array");
  PerLeadSegments per_lead;
  std::vector<WaveSegment> consensus;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& o = arr[i];
    const std::string where = "annotations[" + std::to_string(i) + "]";
    try {
      WaveSegment s;
      const auto cls = parse_wave_class(o.at("class").get<std::string>());
      if (!cls) throw FormatError(where + ": unknown class");
      s.wave_class = *cls;
      s.onset = o.at("onset").get<long>();
      s.offset = o.at("offset").get<long>();
      s.peak = o.contains("peak") ? o["peak"].get<long>() : s.midpoint();
      const auto lead = o.at("lead").get<std::string>();
      if (lead == "CONSENSUS") {
        consensus.push_back(s);
      } else {
        const auto l = parse_lead(lead);
        if (!l) throw FormatError(where + ": unknown lead '" + lead + "'");
        s.lead = LeadRef::of(*l);
        per_lead[index_of(*l)].push_back(s);
      }
      if (!is_well_formed(s)) throw FormatError(where + ": onset <= peak <= offset violated");
    } catch (const ojson::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  if (consensus.empty()) {
    return build_consensus(per_lead, sampling_rate, Provenance::ExternalAnnotation);
  }
  DelineationSet set;
  set.provenance = Provenance::ExternalAnnotation;
  set.per_lead = std::move(per_lead);
  for (auto& v : set.per_lead) sort_segments(v);
  set.consensus = std::move(consensus);
  sort_segments(set.consensus);
  return set;
}

DelineationSet read_annotations(const std::filesystem::path& path, int sampling_rate) {
  return parse_annotations(read_file(path), sampling_rate);
}

}  // namespace ecgbench
