#include <algorithm>
#include <cmath>

#include "ecgbench/delineation/delineation.hpp"

namespace ecgbench {

namespace {

struct Cluster {
  std::vector<WaveSegment> members;
  double centroid = 0.0;
  bool has(Lead l) const {
    return std::any_of(members.begin(), members.end(),
                       [&](const WaveSegment& s) { return s.lead.lead == l; });
  }
};

}  // namespace

DelineationSet build_consensus(const PerLeadSegments& segs, int sampling_rate,
                               Provenance provenance) {
  DelineationSet set;
  set.provenance = provenance;
  set.per_lead = segs;
  for (auto& v : set.per_lead) sort_segments(v);
  const double window = kConsensusWindowMs * sampling_rate / 1000.0;

  for (std::size_t c = 0; c < kWaveClassCount; ++c) {
    const auto cls = static_cast<WaveClass>(c);
    std::vector<WaveSegment> all;
    for (const auto& v : set.per_lead) {
      for (const auto& s : v) {
        if (s.wave_class == cls) all.push_back(s);
      }
    }
    std::stable_sort(all.begin(), all.end(), [](const WaveSegment& a, const WaveSegment& b) {
      return a.peak != b.peak ? a.peak < b.peak : index_of(*a.lead.lead) < index_of(*b.lead.lead);
    });

    std::vector<Cluster> open;
    std::vector<Cluster> closed;
    for (const auto& s : all) {
      Cluster* target = nullptr;
      for (auto& cl : open) {
        if (std::abs(s.peak - cl.centroid) <= window && !cl.has(*s.lead.lead)) {
          target = &cl;
          break;
        }
      }
      if (!target) {
        open.push_back({});
        target = &open.back();
      }
      target->members.push_back(s);
      double sum = 0.0;
      for (const auto& m : target->members) sum += static_cast<double>(m.peak);
      target->centroid = sum / static_cast<double>(target->members.size());
      // clusters whose centroid is now out of reach can no longer grow
      for (auto it = open.begin(); it != open.end();) {
        if (static_cast<double>(s.peak) - it->centroid > window) {
          closed.push_back(std::move(*it));
          it = open.erase(it);
        } else {
          ++it;
        }
      }
    }
    closed.insert(closed.end(), open.begin(), open.end());

    std::vector<WaveSegment> out;
    for (const auto& cl : closed) {
      if (cl.members.size() < kConsensusMinLeads) continue;
      WaveSegment seg{cls, LeadRef::consensus(), cl.members[0].onset, cl.members[0].offset, 0};
      std::vector<long> peaks;
      for (const auto& m : cl.members) {
        seg.onset = std::min(seg.onset, m.onset);
        seg.offset = std::max(seg.offset, m.offset);
        peaks.push_back(m.peak);
      }
      std::sort(peaks.begin(), peaks.end());
      seg.peak = peaks[(peaks.size() - 1) / 2];
      out.push_back(seg);
    }
    std::sort(out.begin(), out.end(),
              [](const WaveSegment& a, const WaveSegment& b) { return a.onset < b.onset; });
    // Overlapping clusters describe the same wave.
    std::vector<WaveSegment> merged;
    for (const auto& s : out) {
      if (!merged.empty() && s.onset <= merged.back().offset) {
        merged.back().offset = std::max(merged.back().offset, s.offset);
      } else {
        merged.push_back(s);
      }
    }
    set.consensus.insert(set.consensus.end(), merged.begin(), merged.end());
  }
  sort_segments(set.consensus);
  return set;
}

}  // namespace ecgbench
