#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/features/features.hpp"

namespace ecgbench {

std::string_view deflection_label_name(DeflectionLabel l) {
  switch (l) {
    case DeflectionLabel::Q: return "Q";
    case DeflectionLabel::R: return "R";
    case DeflectionLabel::S: return "S";
    case DeflectionLabel::RPrime: return "R'";
  }
  return "?";
}

std::string_view morphology_name(Morphology m) {
  switch (m) {
    case Morphology::qR: return "qR";
    case Morphology::rS: return "rS";
    case Morphology::RSR: return "RSR'";
    case Morphology::QS: return "QS";
    case Morphology::RMonophasic: return "R";
    case Morphology::Other: return "other";
  }
  return "?";
}

std::vector<SubDeflection> qrs_deflections(std::span<const float> x, const WaveSegment& qrs,
                                           double iso) {
  constexpr double eps = 1e-6;
  const long on = std::max(0L, qrs.onset);
  const long off = std::min(static_cast<long>(x.size()) - 1, qrs.offset);
  auto sign_at = [&](long k) {
    const double d = x[k] - iso;
    return d > eps ? 1 : (d < -eps ? -1 : 0);
  };

  std::vector<SubDeflection> raw;
  for (long k = on; k <= off;) {
    const int s = sign_at(k);
    if (s == 0) { ++k; continue; }
    long end = k;
    while (end + 1 <= off && sign_at(end + 1) == s) ++end;
    SubDeflection d;
    d.onset = std::max(on, k - 1);
    d.offset = std::min(off, end + 1);
    d.peak = k;
    for (long j = k; j <= end; ++j) {
      if (std::abs(x[j] - iso) > std::abs(x[d.peak] - iso)) d.peak = j;
    }
    d.amp_mv = x[d.peak] - iso;
    raw.push_back(d);
    k = end + 1;
  }

  std::vector<SubDeflection> kept;
  for (const auto& d : raw) {
    if (std::abs(d.amp_mv) < kMinDeflectionMv) continue;
    if (!kept.empty() && (kept.back().amp_mv > 0) == (d.amp_mv > 0)) {
      auto& prev = kept.back();
      prev.offset = d.offset;
      if (std::abs(d.amp_mv) > std::abs(prev.amp_mv)) {
        prev.peak = d.peak;
        prev.amp_mv = d.amp_mv;
      }
      continue;
    }
    kept.push_back(d);
  }

  bool seen_r = false;
  for (auto& d : kept) {
    if (d.amp_mv < 0) {
      d.label = seen_r ? DeflectionLabel::S : DeflectionLabel::Q;
    } else {
      d.label = seen_r ? DeflectionLabel::RPrime : DeflectionLabel::R;
      seen_r = true;
    }
  }
  return kept;
}

MorphologyResult classify_deflections(const std::vector<SubDeflection>& defl,
                                      std::span<const float> x, double iso, double ms_per_sample) {
  MorphologyResult r;
  std::string seq;
  for (const auto& d : defl) seq += deflection_label_name(d.label);

  const auto find = [&](DeflectionLabel l) -> const SubDeflection* {
    for (const auto& d : defl) {
      if (d.label == l) return &d;
    }
    return nullptr;
  };
  const auto* q = find(DeflectionLabel::Q);
  const auto* rr = find(DeflectionLabel::R);
  const auto* s = find(DeflectionLabel::S);

  if (seq == "R") r.morphology = Morphology::RMonophasic;
  else if (seq == "Q") r.morphology = Morphology::QS;
  else if (seq == "QR" && rr->amp_mv > -q->amp_mv) r.morphology = Morphology::qR;
  else if (seq == "RS" && -s->amp_mv > rr->amp_mv) r.morphology = Morphology::rS;
  else if (seq == "RSR'") r.morphology = Morphology::RSR;

  if (rr) {
    // Two maxima inside the R lobe separated by a dip.
    const long n = rr->offset - rr->onset + 1;
    std::vector<double> dev(n), left(n), right(n);
    for (long k = 0; k < n; ++k) dev[k] = x[rr->onset + k] - iso;
    for (long k = 0; k < n; ++k) left[k] = std::max(k ? left[k - 1] : dev[0], dev[k]);
    for (long k = n - 1; k >= 0; --k) right[k] = std::max(k + 1 < n ? right[k + 1] : dev[n - 1], dev[k]);
    for (long k = 1; k + 1 < n; ++k) {
      if (std::min(left[k], right[k]) - dev[k] >= kNotchDipMv - 1e-9) r.notched_r = true;
    }
  }
  if (q) {
    const double q_dur = static_cast<double>(q->offset - q->onset) * ms_per_sample;
    const double r_amp = rr ? rr->amp_mv : 0.0;
    r.pathological_q = q_dur >= kPathologicalQMs || -q->amp_mv >= kPathologicalQRatio * r_amp;
  }
  return r;
}

double frontal_axis(double area_lead_i, double area_lead_avf) {
  if (std::abs(area_lead_i) < kAxisAreaFloor && std::abs(area_lead_avf) < kAxisAreaFloor) {
    throw UndefinedAxis("QRS net areas in I and aVF are both below the measurable floor");
  }
  double deg = std::atan2(area_lead_avf, area_lead_i) * 180.0 / std::numbers::pi;
  if (deg <= -180.0) deg += 360.0;
  return deg;
}

}  // namespace ecgbench
