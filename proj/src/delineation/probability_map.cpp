#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"
#include "ecgbench/delineation/delineation.hpp"

namespace ecgbench {

using json = nlohmann::json;

DelineationMap::DelineationMap(std::size_t samples)
    : samples_(samples), data_(kLeadCount * samples * kMapClasses, 0.0f) {
  for (Lead l : kAllLeads) {
    for (std::size_t t = 0; t < samples; ++t) at(l, t, kBackground) = 1.0f;
  }
}

DelineationMap::DelineationMap(std::size_t samples, std::vector<float> data)
    : samples_(samples), data_(std::move(data)) {
  if (data_.size() != kLeadCount * samples_ * kMapClasses) {
    throw DimensionError("probability map holds " + std::to_string(data_.size()) +
                         " values, expected " + std::to_string(kLeadCount * samples_ * kMapClasses));
  }
}

void DelineationMap::set_class(Lead lead, std::size_t t, std::size_t cls, double confidence) {
  const float rest = static_cast<float>((1.0 - confidence) / (kMapClasses - 1));
  for (std::size_t c = 0; c < kMapClasses; ++c) at(lead, t, c) = rest;
  at(lead, t, cls) = static_cast<float>(1.0 - rest * (kMapClasses - 1));
}

void DelineationMap::validate() const {
  for (Lead l : kAllLeads) {
    for (std::size_t t = 0; t < samples_; ++t) {
      double sum = 0.0;
      for (std::size_t c = 0; c < kMapClasses; ++c) sum += at(l, t, c);
      if (std::abs(sum - 1.0) > 1e-6) {
        throw DimensionError("probability map row (lead " + std::string(lead_name(l)) +
                             ", sample " + std::to_string(t) + ") sums to " + std::to_string(sum));
      }
    }
  }
}

DelineationMap map_from_segments(const EcgRecord& record, const std::vector<WaveSegment>& segments,
                                 double confidence) {
  DelineationMap map(record.sample_count());
  for (const auto& s : segments) {
    if (s.lead.is_consensus()) continue;
    for (long t = std::max(0L, s.onset);
         t <= s.offset && t < static_cast<long>(record.sample_count()); ++t) {
      map.set_class(*s.lead.lead, static_cast<std::size_t>(t),
                    static_cast<std::size_t>(s.wave_class), confidence);
    }
  }
  return map;
}

DelineationMap stand_in_map(const SynthesisResult& synth, const MapOptions& options) {
  std::vector<WaveSegment> segs;
  for (const auto& s : synth.truth) {
    if (s.lead.is_consensus()) continue;
    if (options.omit_nonconducted_p && s.wave_class == WaveClass::P) {
      const bool missed = std::any_of(
          synth.nonconducted_p.begin(), synth.nonconducted_p.end(),
          [&](const WaveSegment& np) { return np.onset == s.onset && np.offset == s.offset; });
      // trailing P waves without a following QRS are missed as well
      long last_qrs = -1;
      for (const auto& b : synth.beats) {
        if (b.qrs) last_qrs = b.qrs->onset;
      }
      if (missed || s.onset > last_qrs) continue;
    }
    segs.push_back(s);
  }

  // Spurious T-like activations in the TP segment after the selected beats.
  const long rate = synth.record.sampling_rate();
  std::vector<const TruthBeat*> with_qrs;
  for (const auto& b : synth.beats) {
    if (b.qrs && b.t) with_qrs.push_back(&b);
  }
  for (int bi : options.spurious_t_beats) {
    if (bi < 0 || bi + 1 >= static_cast<int>(with_qrs.size())) continue;
    const long t_off = with_qrs[bi]->t->offset;
    long next = with_qrs[bi + 1]->qrs->onset;
    if (with_qrs[bi + 1]->p) next = with_qrs[bi + 1]->p->onset;
    const long len = rate * 60 / 1000;
    const long gap = next - t_off;
    if (gap < len + 4) continue;
    const long on = t_off + (gap - len) / 2;
    for (Lead l : kAllLeads) {
      segs.push_back({WaveClass::T, LeadRef::of(l), on, on + len, on + len / 2});
    }
  }

  DelineationMap map = map_from_segments(synth.record, segs, options.confidence);
  return map;
}

std::string format_probability_map(const DelineationMap& map, const EcgRecord& record) {
  if (map.sample_count() != record.sample_count()) {
    throw DimensionError("probability map length " + std::to_string(map.sample_count()) +
                         " does not match record length " + std::to_string(record.sample_count()));
  }
  json header;
  header["id"] = record.id();
  header["sampling_rate"] = record.sampling_rate();
  std::vector<std::string> leads;
  for (auto l : kAllLeads) leads.emplace_back(lead_name(l));
  header["leads"] = leads;
  header["sample_count"] = map.sample_count();
  header["classes"] = {"P", "QRS", "T", "background"};
  std::string out = header.dump() + "\n";
  for (float v : map.data()) append_le_float(out, v);
  return out;
}

DelineationMap parse_probability_map(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw FormatError("probability map: missing JSON header line");
  json header;
  try {
    header = json::parse(bytes.substr(0, nl));
  } catch (const json::exception& e) {
    throw FormatError(std::string("probability map: bad header: ") + e.what());
  }
  const auto n = header.value("sample_count", std::size_t{0});
  const auto leads = header.value("leads", std::vector<std::string>{});
  if (leads.size() != kLeadCount) {
    throw DimensionError("probability map: expected 12 leads, got " + std::to_string(leads.size()));
  }
  const std::size_t count = kLeadCount * n * kMapClasses;
  if (bytes.size() - nl - 1 != count * 4) {
    throw DimensionError("probability map: payload size does not match header");
  }
  std::vector<float> data(count);
  const char* p = bytes.data() + nl + 1;
  for (std::size_t i = 0; i < count; ++i, p += 4) data[i] = read_le_float(p);
  return DelineationMap(n, std::move(data));
}

DelineationMap read_probability_map(const std::filesystem::path& path) {
  return parse_probability_map(read_file(path));
}

void write_probability_map(const DelineationMap& map, const EcgRecord& record,
                           const std::filesystem::path& path) {
  write_file(path, format_probability_map(map, record));
}

}  // namespace ecgbench
