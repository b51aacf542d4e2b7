#include <algorithm>
#include <cmath>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/features/features.hpp"

namespace ecgbench {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<bool> annotated_mask(std::size_t n, const std::vector<Beat>& beats,
                                 const std::vector<WaveSegment>& extra) {
  std::vector<bool> mask(n, false);
  auto mark = [&](const WaveSegment& s) {
    for (long k = std::max(0L, s.onset); k <= s.offset && k < static_cast<long>(n); ++k) {
      mask[k] = true;
    }
  };
  for (const auto& b : beats) {
    mark(b.qrs);
    if (b.p) mark(*b.p);
    if (b.t) mark(*b.t);
  }
  for (const auto& s : extra) mark(s);
  return mask;
}

// PR segment, else TP segment, else the QRS onset sample.
double beat_iso(std::span<const float> x, const std::vector<bool>& mask, const Beat& beat,
                long prev_end) {
  auto free_median = [&](long lo, long hi) -> std::optional<double> {
    std::vector<double> v;
    for (long k = std::max(0L, lo); k <= hi && k < static_cast<long>(x.size()); ++k) {
      if (!mask[k]) v.push_back(x[k]);
    }
    if (v.empty()) return std::nullopt;
    return median_of(std::move(v));
  };
  if (beat.p) {
    if (auto m = free_median(beat.p->offset + 1, beat.qrs.onset - 1)) return *m;
  }
  if (auto m = free_median(prev_end + 1, beat.qrs.onset - 1)) return *m;
  return x[std::clamp(beat.qrs.onset, 0L, static_cast<long>(x.size()) - 1)];
}

std::optional<double> signed_extreme(std::span<const float> x, const WaveSegment& s, double iso) {
  std::optional<double> best;
  for (long k = std::max(0L, s.onset); k <= s.offset && k < static_cast<long>(x.size()); ++k) {
    const double d = x[k] - iso;
    if (!best || std::abs(d) > std::abs(*best)) best = d;
  }
  return best;
}

std::vector<long> prev_ends(const std::vector<Beat>& beats) {
  std::vector<long> out;
  long prev = -1;
  for (const auto& b : beats) {
    out.push_back(prev);
    prev = b.t ? b.t->offset : b.qrs.offset;
  }
  return out;
}

}  // namespace

MorphologyResult classify_morphology(const EcgRecord& record, const Beat& beat, Lead lead) {
  const auto mask = annotated_mask(record.sample_count(), {beat}, {});
  const auto x = record.lead(lead);
  const double iso = beat_iso(x, mask, beat, -1);
  return classify_deflections(qrs_deflections(x, beat.qrs, iso), x, iso, record.ms_per_sample());
}

BeatMeasurements measure(const EcgRecord& record, const std::vector<Beat>& beats,
                         const std::vector<WaveSegment>& orphan_p) {
  if (beats.empty()) throw EmptyDelineation("no beats to measure");
  BeatMeasurements m;
  m.record_id = record.id();
  m.sampling_rate = record.sampling_rate();
  m.duration_s = record.duration_s();
  m.beats = beats;
  m.orphan_p = orphan_p;
  m.orphan_p_count = static_cast<int>(orphan_p.size());

  const double ms = record.ms_per_sample();
  const long n = static_cast<long>(record.sample_count());
  const long st_offset = record.to_samples(kStMeasureOffsetMs);
  const auto mask = annotated_mask(record.sample_count(), beats, orphan_p);
  const auto prev = prev_ends(beats);

  std::vector<double> rrs;
  for (std::size_t i = 1; i < beats.size(); ++i) {
    rrs.push_back(static_cast<double>(beats[i].qrs.onset - beats[i - 1].qrs.onset) * ms);
  }
  const double median_rr = rrs.empty() ? 0.0 : median_of(rrs);

  for (std::size_t i = 0; i < beats.size(); ++i) {
    const auto& b = beats[i];
    BeatMeasures bm;
    bm.index = b.index;
    bm.qrs_dur_ms = static_cast<double>(b.qrs.length()) * ms;
    if (b.p) {
      bm.p_dur_ms = static_cast<double>(b.p->length()) * ms;
      bm.pr_ms = static_cast<double>(b.qrs.onset - b.p->onset) * ms;
    }
    if (b.t) {
      bm.t_dur_ms = static_cast<double>(b.t->length()) * ms;
      bm.qt_ms = static_cast<double>(b.t->offset - b.qrs.onset) * ms;
    }
    if (i > 0) {
      bm.rr_ms = rrs[i - 1];
      bm.rr_ratio = *bm.rr_ms / median_rr;
    }

    for (Lead lead : kAllLeads) {
      const auto x = record.lead(lead);
      auto& lm = bm.leads[index_of(lead)];
      lm.iso_mv = beat_iso(x, mask, b, prev[i]);
      const double iso = lm.iso_mv;
      if (b.p) lm.p_amp_mv = signed_extreme(x, *b.p, iso);
      if (b.t) lm.t_amp_mv = signed_extreme(x, *b.t, iso);
      double area = 0.0;
      for (long k = std::max(0L, b.qrs.onset); k <= b.qrs.offset && k < n; ++k) {
        const double d = x[k] - iso;
        area += d;
        lm.r_amp_mv = std::max(lm.r_amp_mv, d);
        lm.s_amp_mv = std::max(lm.s_amp_mv, -d);
      }
      lm.qrs_area_mv_s = area / record.sampling_rate();
      const long j = std::clamp(b.qrs.offset, 0L, n - 1);
      lm.st_j_mv = x[j] - iso;
      lm.st_mv = x[std::min(n - 1, j + st_offset)] - iso;

      lm.deflections = qrs_deflections(x, b.qrs, iso);
      for (const auto& d : lm.deflections) {
        const double dur = static_cast<double>(d.offset - d.onset) * ms;
        if (d.label == DeflectionLabel::Q && lm.q_dur_ms == 0.0) {
          lm.q_dur_ms = dur;
          lm.q_amp_mv = -d.amp_mv;
        } else if (d.label == DeflectionLabel::R && lm.r_dur_ms == 0.0) {
          lm.r_dur_ms = dur;
        } else if (d.label == DeflectionLabel::S && lm.s_dur_ms == 0.0) {
          lm.s_dur_ms = dur;
        }
      }
      const auto mr = classify_deflections(lm.deflections, x, iso, ms);
      lm.morphology = mr.morphology;
      lm.notched_r = mr.notched_r;
      lm.pathological_q = mr.pathological_q;
    }
    try {
      bm.axis_deg = frontal_axis(bm.leads[index_of(Lead::I)].qrs_area_mv_s,
                                 bm.leads[index_of(Lead::aVF)].qrs_area_mv_s);
    } catch (const UndefinedAxis&) {
      bm.axis_deg.reset();
    }
    m.per_beat.push_back(std::move(bm));
  }

  if (!rrs.empty()) m.ventricular_rate_bpm = 60000.0 / median_rr;

  std::vector<long> p_onsets;
  for (const auto& b : beats) {
    if (b.p) p_onsets.push_back(b.p->onset);
  }
  for (const auto& p : orphan_p) p_onsets.push_back(p.onset);
  std::sort(p_onsets.begin(), p_onsets.end());
  if (p_onsets.size() >= 2) {
    std::vector<double> pp;
    for (std::size_t i = 1; i < p_onsets.size(); ++i) {
      pp.push_back(static_cast<double>(p_onsets[i] - p_onsets[i - 1]) * ms);
    }
    // P waves hidden in QRS-T complexes leave gaps spanning several cycles
    const double shortest = *std::min_element(pp.begin(), pp.end());
    std::erase_if(pp, [&](double v) { return v > 1.5 * shortest; });
    m.atrial_rate_bpm = 60000.0 / median_of(pp);
  }

  std::vector<double> prs, axes;
  for (const auto& bm : m.per_beat) {
    if (bm.pr_ms) prs.push_back(*bm.pr_ms);
    if (bm.axis_deg) axes.push_back(*bm.axis_deg);
  }
  if (prs.size() >= 2) {
    m.pr_range_ms = *std::max_element(prs.begin(), prs.end()) -
                    *std::min_element(prs.begin(), prs.end());
  }
  if (!axes.empty()) m.axis_deg = median_of(axes);
  return m;
}

BeatMeasurements measure_record(const EcgRecord& record, const DelineationSet& delineation) {
  const auto beats = group_beats(delineation);
  return measure(record, beats, orphan_p_waves(delineation, beats));
}

}  // namespace ecgbench
