#include <algorithm>
#include <cmath>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/delineation/delineation.hpp"

namespace ecgbench {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::ProbabilityMap: return "probability-map";
    case Provenance::ExternalAnnotation: return "external-annotation";
    case Provenance::SyntheticTruth: return "synthetic-truth";
  }
  return "?";
}

namespace {

// Median of up to 20 ms of samples preceding the run, or the onset sample.
double local_iso(std::span<const float> x, long onset, long window) {
  const long lo = std::max(0L, onset - window);
  if (lo >= onset) return x[std::max(0L, onset)];
  std::vector<float> v(x.begin() + lo, x.begin() + onset);
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace

PerLeadSegments decode_probability_map(const DelineationMap& map, const EcgRecord& record) {
  if (map.sample_count() != record.sample_count()) {
    throw DimensionError("probability map length " + std::to_string(map.sample_count()) +
                         " does not match record length " + std::to_string(record.sample_count()));
  }
  const long n = static_cast<long>(record.sample_count());
  const double min_run = kMinRunMs * record.sampling_rate() / 1000.0;
  const long iso_window = std::max(1L, record.to_samples(20.0));
  PerLeadSegments out;
  for (Lead lead : kAllLeads) {
    const auto x = record.lead(lead);
    std::vector<std::size_t> cls(n);
    for (long t = 0; t < n; ++t) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < kMapClasses; ++c) {
        if (map.at(lead, t, c) > map.at(lead, t, best)) best = c;
      }
      cls[t] = best;
    }
    auto& segs = out[index_of(lead)];
    for (long t = 0; t < n;) {
      long end = t;
      while (end + 1 < n && cls[end + 1] == cls[t]) ++end;
      if (cls[t] != kBackground && static_cast<double>(end - t + 1) >= min_run) {
        const double iso = local_iso(x, t, iso_window);
        long peak = (t + end) / 2;
        double best = 1e-9;
        for (long k = t; k <= end; ++k) {
          if (std::abs(x[k] - iso) > best) {
            best = std::abs(x[k] - iso);
            peak = k;
          }
        }
        segs.push_back({static_cast<WaveClass>(cls[t]), LeadRef::of(lead), t, end, peak});
      }
      t = end + 1;
    }
  }
  return out;
}

DelineationSet delineate(const DelineationMap& map, const EcgRecord& record) {
  auto segs = decode_probability_map(map, record);
  segs = recover_p_waves(record, segs);
  segs = enforce_t_constraints(segs);
  return build_consensus(segs, record.sampling_rate(), Provenance::ProbabilityMap);
}

DelineationSet truth_delineation(const std::vector<WaveSegment>& truth) {
  DelineationSet set;
  set.provenance = Provenance::SyntheticTruth;
  for (const auto& s : truth) {
    if (s.lead.is_consensus()) set.consensus.push_back(s);
    else set.per_lead[index_of(*s.lead.lead)].push_back(s);
  }
  for (auto& v : set.per_lead) sort_segments(v);
  sort_segments(set.consensus);
  return set;
}

}  // namespace ecgbench
