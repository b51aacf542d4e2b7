#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ecgbench/delineation/delineation.hpp"

namespace ecgbench {

namespace {

constexpr double kBaselineEps = 1e-5;  // mV; samples closer than this are on the baseline
constexpr double kMinorLobe = 0.3;     // opposite lobe below this share is ignored

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double median_between(std::span<const float> x, long lo, long hi) {
  std::vector<double> v;
  for (long k = std::max(0L, lo); k <= hi && k < static_cast<long>(x.size()); ++k) v.push_back(x[k]);
  return median_of(std::move(v));
}

double max_abs_dev(std::span<const float> x, long onset, long offset, double iso) {
  double best = 0.0;
  for (long k = std::max(0L, onset); k <= offset && k < static_cast<long>(x.size()); ++k) {
    best = std::max(best, std::abs(x[k] - iso));
  }
  return best;
}

double p_baseline(std::span<const float> x, const WaveSegment& p, long window) {
  if (p.onset <= 0) return x.empty() ? 0.0 : x[0];
  return median_between(x, p.onset - window, p.onset - 1);
}

}  // namespace

std::string_view polarity_name(Polarity p) {
  switch (p) {
    case Polarity::Positive: return "positive";
    case Polarity::Negative: return "negative";
    case Polarity::BiphasicPosNeg: return "biphasic+-";
    case Polarity::BiphasicNegPos: return "biphasic-+";
  }
  return "?";
}

Polarity deflection_polarity(std::span<const float> x, long onset, long offset, double iso) {
  double pos = 0.0, neg = 0.0;
  long pos_at = onset, neg_at = onset;
  for (long k = std::max(0L, onset); k <= offset && k < static_cast<long>(x.size()); ++k) {
    const double d = x[k] - iso;
    if (d > pos) { pos = d; pos_at = k; }
    if (-d > neg) { neg = -d; neg_at = k; }
  }
  if (neg <= kMinorLobe * pos) return Polarity::Positive;
  if (pos <= kMinorLobe * neg) return Polarity::Negative;
  return pos_at < neg_at ? Polarity::BiphasicPosNeg : Polarity::BiphasicNegPos;
}

std::optional<PWaveTemplate> p_wave_template(const EcgRecord& record, Lead lead,
                                             const std::vector<WaveSegment>& segs) {
  const auto x = record.lead(lead);
  const long window = std::max(1L, record.to_samples(20.0));
  std::map<Polarity, int> votes;
  double dur = 0.0, amp = 0.0;
  int count = 0;
  for (const auto& s : segs) {
    if (s.wave_class != WaveClass::P) continue;
    const double iso = p_baseline(x, s, window);
    ++votes[deflection_polarity(x, s.onset, s.offset, iso)];
    dur += record.to_ms(static_cast<double>(s.length()));
    amp += max_abs_dev(x, s.onset, s.offset, iso);
    ++count;
  }
  if (count == 0) return std::nullopt;
  PWaveTemplate t;
  t.lead = lead;
  t.mean_duration_ms = dur / count;
  t.mean_amplitude_mv = amp / count;
  int best = -1;
  for (const auto& [pol, n] : votes) {
    if (n > best) { best = n; t.polarity = pol; }
  }
  return t;
}

PerLeadSegments recover_p_waves(const EcgRecord& record, const PerLeadSegments& segs) {
  PerLeadSegments out = segs;
  const double ms = record.ms_per_sample();
  for (Lead lead : kAllLeads) {
    auto& lead_segs = out[index_of(lead)];
    const auto tmpl = p_wave_template(record, lead, lead_segs);
    if (!tmpl) continue;
    const auto x = record.lead(lead);
    const auto qrs = of_class(lead_segs, WaveClass::QRS);
    std::vector<WaveSegment> found;

    for (std::size_t i = 0; i + 1 < qrs.size(); ++i) {
      const long a = qrs[i].offset + 1;
      const long b = qrs[i + 1].onset - 1;
      if (b <= a) continue;
      std::vector<bool> used(b - a + 1, false);
      std::optional<WaveSegment> last_p;
      for (const auto& s : lead_segs) {
        if (s.offset < a || s.onset > b) continue;
        for (long k = std::max(a, s.onset); k <= std::min(b, s.offset); ++k) used[k - a] = true;
        if (s.wave_class == WaveClass::P && (!last_p || s.onset > last_p->onset)) last_p = s;
      }
      // Beat isoelectric level: PR segment of the closing beat, else the free samples.
      double iso;
      if (last_p && last_p->offset < b) {
        iso = median_between(x, last_p->offset + 1, b);
      } else {
        std::vector<double> v;
        for (long k = a; k <= b; ++k) {
          if (!used[k - a]) v.push_back(x[k]);
        }
        iso = median_of(std::move(v));
      }

      for (long g0 = a; g0 <= b;) {
        if (used[g0 - a]) { ++g0; continue; }
        long g1 = g0;
        while (g1 + 1 <= b && !used[g1 + 1 - a]) ++g1;
        for (long k = g0; k <= g1;) {
          if (std::abs(x[k] - iso) <= kBaselineEps) { ++k; continue; }
          long r1 = k;
          while (r1 + 1 <= g1 && std::abs(x[r1 + 1] - iso) > kBaselineEps) ++r1;
          const long onset = k - 1, offset = r1 + 1;
          k = r1 + 1;
          if (onset < g0 || offset > g1) continue;  // touches a neighbouring wave
          if (static_cast<double>(offset - onset) * ms < kMinRecoveredPMs) continue;
          const long mid = (onset + offset) / 2;
          const auto& near = (mid - qrs[i].offset) <= (qrs[i + 1].onset - mid) ? qrs[i] : qrs[i + 1];
          const double qrs_amp = max_abs_dev(x, near.onset, near.offset, iso);
          const double amp = max_abs_dev(x, onset, offset, iso);
          if (!(amp > kRecoveredPAmplitudeRatio * qrs_amp)) continue;
          if (deflection_polarity(x, onset, offset, iso) != tmpl->polarity) continue;
          long peak = onset;
          double best = -1.0;
          for (long p = onset; p <= offset; ++p) {
            if (std::abs(x[p] - iso) > best) { best = std::abs(x[p] - iso); peak = p; }
          }
          found.push_back({WaveClass::P, LeadRef::of(lead), onset, offset, peak});
        }
        g0 = g1 + 1;
      }
    }
    lead_segs.insert(lead_segs.end(), found.begin(), found.end());
    sort_segments(lead_segs);
  }
  return out;
}

PerLeadSegments enforce_t_constraints(const PerLeadSegments& segs,
                                      std::optional<double> expected_fraction) {
  PerLeadSegments out;
  for (std::size_t li = 0; li < kLeadCount; ++li) {
    const auto& in = segs[li];
    const auto qrs = of_class(in, WaveClass::QRS);
    if (qrs.empty()) {
      out[li] = in;
      continue;
    }
    std::vector<double> rrs;
    for (std::size_t i = 0; i + 1 < qrs.size(); ++i) {
      rrs.push_back(static_cast<double>(qrs[i + 1].onset - qrs[i].onset));
    }
    const double median_rr = rrs.empty() ? 1.0 : median_of(rrs);

    // Group T candidates by the RR interval holding their peak.
    std::map<std::size_t, std::vector<std::size_t>> by_interval;  // interval -> index into `in`
    for (std::size_t si = 0; si < in.size(); ++si) {
      const auto& s = in[si];
      if (s.wave_class != WaveClass::T) continue;
      for (std::size_t i = 0; i < qrs.size(); ++i) {
        const long end = i + 1 < qrs.size() ? qrs[i + 1].onset : std::numeric_limits<long>::max();
        if (s.peak > qrs[i].offset && s.peak < end) {
          by_interval[i].push_back(si);
          break;
        }
      }
    }
    auto fraction = [&](std::size_t interval, const WaveSegment& t) {
      const double rr = interval + 1 < qrs.size()
                            ? static_cast<double>(qrs[interval + 1].onset - qrs[interval].onset)
                            : median_rr;
      return static_cast<double>(t.peak - qrs[interval].onset) / rr;
    };
    double target = 0.35;
    if (expected_fraction) {
      target = *expected_fraction;
    } else {
      std::vector<double> singles;
      for (const auto& [i, members] : by_interval) {
        if (members.size() == 1) singles.push_back(fraction(i, in[members[0]]));
      }
      if (!singles.empty()) target = median_of(singles);
    }

    std::vector<bool> drop(in.size(), false);
    for (const auto& [i, members] : by_interval) {
      if (members.size() < 2) continue;
      std::size_t keep = members[0];
      double best = std::abs(fraction(i, in[keep]) - target);
      for (std::size_t m : members) {
        const double d = std::abs(fraction(i, in[m]) - target);
        if (d < best) { best = d; keep = m; }
      }
      for (std::size_t m : members) drop[m] = m != keep;
    }
    for (std::size_t si = 0; si < in.size(); ++si) {
      if (!drop[si]) out[li].push_back(in[si]);
    }
  }
  return out;
}

}  // namespace ecgbench
