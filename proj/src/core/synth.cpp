#include "ecgbench/core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/rng.hpp"

namespace ecgbench {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Precordial gains applied on top of the horizontal projection.
constexpr std::array<double, 6> kPrecordialGain = {0.8, 1.2, 1.3, 1.3, 1.1, 0.9};

double projection(double amp, double frontal_deg, double horizontal_deg, Lead lead) {
  if (is_limb_lead(lead)) return amp * std::cos((frontal_deg - lead_angle_deg(lead)) * kDeg);
  return amp * std::cos((horizontal_deg - lead_angle_deg(lead)) * kDeg) * precordial_factor(lead);
}

struct Interval {
  long onset;
  long offset;
};

// Sampled piecewise-linear lobe; vertices may fall between samples.
void add_lobe(std::vector<double>& x, long onset, long offset, double amp, double notch) {
  if (offset <= onset || amp == 0.0) return;
  const double w = static_cast<double>(offset - onset);
  for (long k = std::max(0L, onset); k <= offset && k < static_cast<long>(x.size()); ++k) {
    const double u = static_cast<double>(k - onset) / w;  // 0..1
    double v;
    if (notch <= 0.0) {
      v = u <= 0.5 ? 2.0 * u : 2.0 * (1.0 - u);
    } else {
      const double dip = 1.0 - notch;
      if (u <= 0.25) v = u / 0.25;
      else if (u <= 0.5) v = 1.0 + (dip - 1.0) * (u - 0.25) / 0.25;
      else if (u <= 0.75) v = dip + (1.0 - dip) * (u - 0.5) / 0.25;
      else v = (1.0 - u) / 0.25;
    }
    x[k] += amp * v;
  }
}

void add_raised_cosine(std::vector<double>& x, long onset, long offset, double amp) {
  if (offset <= onset || amp == 0.0) return;
  const double w = static_cast<double>(offset - onset);
  for (long k = std::max(0L, onset); k <= offset && k < static_cast<long>(x.size()); ++k) {
    x[k] += amp * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (k - onset) / w));
  }
}

long peak_of(const std::vector<double>& contribution, long onset, long offset) {
  long best = (onset + offset) / 2;
  double best_abs = 0.0;
  for (long k = onset; k <= offset && k < static_cast<long>(contribution.size()); ++k) {
    if (std::abs(contribution[k]) > best_abs + 1e-12) {
      best_abs = std::abs(contribution[k]);
      best = k;
    }
  }
  return best;
}

struct PlannedBeat {
  BeatKind kind = BeatKind::Normal;
  double qrs_onset_ms = 0.0;
  bool has_p = true;
};

std::vector<QrsLobe> ventricular_ectopic_lobes(const SyntheticSpec& spec) {
  // broad, bizarre complex pointing away from the normal activation
  return {QrsLobe{0.0, 1.0, spec.r_amp * 1.3, spec.axis_deg + 180.0, spec.horizontal_deg + 160.0,
                  0.0}};
}

}  // namespace

std::string_view beat_kind_name(BeatKind kind) {
  switch (kind) {
    case BeatKind::Normal: return "normal";
    case BeatKind::AtrialPremature: return "atrial-premature";
    case BeatKind::VentricularPremature: return "ventricular-premature";
    case BeatKind::Dropped: return "dropped";
  }
  return "?";
}

double precordial_factor(Lead lead) {
  return is_limb_lead(lead) ? 1.0 : kPrecordialGain[index_of(lead) - 6];
}

std::vector<QrsLobe> default_qrs_lobes(const SyntheticSpec& spec) {
  return {
      QrsLobe{0.0, 0.25, 0.15, 120.0, 120.0, 0.0},                              // septal
      QrsLobe{0.25, 0.5, spec.r_amp, spec.axis_deg, spec.horizontal_deg, 0.0},  // free wall
      QrsLobe{0.75, 0.25, 0.15, -150.0, 200.0, 0.0},                            // basal
  };
}

double lobe_axis_deg(const std::vector<QrsLobe>& lobes) {
  double x = 0.0, y = 0.0;
  for (const auto& l : lobes) {
    const double shape = l.notch > 0.0 ? (3.0 - l.notch) / 4.0 : 0.5;
    const double area = l.amp_mv * l.dur_frac * shape;
    x += area * std::cos(l.frontal_deg * kDeg);
    y += area * std::sin(l.frontal_deg * kDeg);
  }
  double deg = std::atan2(y, x) / kDeg;
  if (deg <= -180.0) deg += 360.0;
  return deg;
}

SynthesisResult synthesize(const SyntheticSpec& spec) {
  if (spec.sampling_rate <= 0) throw SpecError("sampling_rate must be positive");
  if (spec.duration_s <= 0.0) throw SpecError("duration_s must be positive");
  if (spec.heart_rate <= 0.0) throw SpecError("heart_rate must be positive");
  for (double d : {spec.pr_ms, spec.p_dur_ms, spec.qrs_ms, spec.qt_ms, spec.t_dur_ms}) {
    if (d <= 0.0) throw SpecError("all durations must be positive");
  }
  if (spec.pr_ms < spec.p_dur_ms) throw SpecError("pr_ms must be at least the P duration");
  if (spec.pr_increment_ms < 0.0) throw SpecError("pr_increment_ms must not be negative");
  if (spec.qt_ms - spec.t_dur_ms <= spec.qrs_ms) {
    throw SpecError("qt_ms must leave an ST segment between QRS offset and T onset");
  }
  if (spec.atrial_rate_bpm && *spec.atrial_rate_bpm <= 0.0) {
    throw SpecError("atrial_rate_bpm must be positive");
  }

  const double fs = spec.sampling_rate;
  const auto to_s = [&](double ms) { return std::lround(ms * fs / 1000.0); };
  const long n = std::lround(spec.duration_s * fs);
  const double duration_ms = spec.duration_s * 1000.0;
  const double rr = 60000.0 / spec.heart_rate;
  Rng rng(derive_seed(spec.seed, "synth"));

  // --- beat schedule -------------------------------------------------------
  auto kind_at = [&](int beat) {
    for (const auto& e : spec.ectopic_schedule) {
      if (e.beat == beat) {
        return e.kind == EctopicKind::AtrialPremature ? BeatKind::AtrialPremature
                                                      : BeatKind::VentricularPremature;
      }
    }
    if (std::find(spec.dropped_qrs_schedule.begin(), spec.dropped_qrs_schedule.end(), beat) !=
        spec.dropped_qrs_schedule.end()) {
      return BeatKind::Dropped;
    }
    return BeatKind::Normal;
  };

  const double first = spec.first_qrs_ms > 0.0 ? spec.first_qrs_ms : spec.pr_ms + 120.0;
  std::vector<PlannedBeat> plan;
  {
    const bool dissociated = spec.atrial_rate_bpm.has_value();
    double onset = first;
    double last_conducted = 0.0;
    for (int k = 0;; ++k) {
      const BeatKind kind = dissociated ? BeatKind::Normal : kind_at(k);
      const double jitter = 1.0 + spec.rr_jitter * rng.uniform(-1.0, 1.0);
      if (k > 0) {
        if (kind == BeatKind::AtrialPremature) onset = last_conducted + 0.72 * rr;
        else if (kind == BeatKind::VentricularPremature) onset = last_conducted + 0.65 * rr;
      }
      const double qrs_ms = kind == BeatKind::VentricularPremature ? std::max(140.0, spec.qrs_ms)
                                                                   : spec.qrs_ms;
      const double end_ms = onset + std::max(spec.qt_ms, qrs_ms + spec.t_dur_ms + 20.0);
      if (end_ms > duration_ms - 20.0) break;
      plan.push_back({kind, onset, kind != BeatKind::VentricularPremature});
      last_conducted = onset;
      double next = onset + rr * jitter;
      if (kind == BeatKind::VentricularPremature && k > 0) {
        // full compensatory pause: the next sinus beat keeps the original grid
        next = plan[plan.size() - 2].qrs_onset_ms + 2.0 * rr * jitter;
      }
      onset = next;
    }
  }
  const int planned = static_cast<int>(plan.size());
  for (const auto& e : spec.ectopic_schedule) {
    if (e.beat < 0 || e.beat >= planned) {
      throw SpecError("ectopic beat " + std::to_string(e.beat) + " is beyond the strip (" +
                      std::to_string(planned) + " beats)");
    }
  }
  for (int b : spec.dropped_qrs_schedule) {
    if (b < 0 || b >= planned) {
      throw SpecError("dropped beat " + std::to_string(b) + " is beyond the strip (" +
                      std::to_string(planned) + " beats)");
    }
  }

  // --- wave intervals --------------------------------------------------------
  std::vector<TruthBeat> beats;
  std::vector<Interval> ventricular;  // [QRS onset, T offset] of emitted beats
  int since_drop = 0;
  for (const auto& pb : plan) {
    TruthBeat tb;
    tb.kind = pb.kind;
    const long q_on = to_s(pb.qrs_onset_ms);
    if (pb.kind != BeatKind::Dropped) {
      const double qrs_ms = pb.kind == BeatKind::VentricularPremature
                                ? std::max(140.0, spec.qrs_ms)
                                : spec.qrs_ms;
      const double qt_ms = std::max(spec.qt_ms, qrs_ms + spec.t_dur_ms + 20.0);
      tb.qrs = WaveSegment{WaveClass::QRS, LeadRef::consensus(), q_on, q_on + to_s(qrs_ms), 0};
      const long t_off = q_on + to_s(qt_ms);
      tb.t = WaveSegment{WaveClass::T, LeadRef::consensus(), t_off - to_s(spec.t_dur_ms), t_off,
                         0};
      ventricular.push_back({q_on, t_off});
    }
    if (!spec.atrial_rate_bpm && pb.has_p) {
      const long p_on = q_on - to_s(spec.pr_ms + spec.pr_increment_ms * since_drop);
      tb.p = WaveSegment{WaveClass::P, LeadRef::consensus(), p_on, p_on + to_s(spec.p_dur_ms), 0};
    }
    beats.push_back(tb);
    since_drop = pb.kind == BeatKind::Dropped ? 0 : since_drop + 1;
  }

  // Independent atrial activity: P waves colliding with ventricular waves are buried.
  std::vector<WaveSegment> free_p;
  if (spec.atrial_rate_bpm) {
    const double pp = 60000.0 / *spec.atrial_rate_bpm;
    for (double t = first - spec.pr_ms; t + spec.p_dur_ms < duration_ms - 20.0; t += pp) {
      if (t < 20.0) continue;
      const long on = to_s(t);
      const long off = on + to_s(spec.p_dur_ms);
      bool buried = false;
      for (const auto& v : ventricular) {
        if (off + 2 >= v.onset && on <= v.offset + 2) buried = true;
      }
      if (!buried) free_p.push_back({WaveClass::P, LeadRef::consensus(), on, off, 0});
    }
  }

  // --- signals -----------------------------------------------------------------
  const std::vector<QrsLobe> lobes = spec.qrs_lobes.empty() ? default_qrs_lobes(spec)
                                                            : spec.qrs_lobes;
  const std::vector<QrsLobe> pvc_lobes = ventricular_ectopic_lobes(spec);

  std::vector<std::vector<double>> signal(kLeadCount, std::vector<double>(n, 0.0));
  SynthesisResult result;

  auto all_p = [&] {
    std::vector<WaveSegment> ps;
    for (const auto& b : beats) {
      if (b.p) ps.push_back(*b.p);
    }
    ps.insert(ps.end(), free_p.begin(), free_p.end());
    return ps;
  }();

  for (Lead lead : kAllLeads) {
    const std::size_t li = index_of(lead);
    const auto ov_it = spec.lead_overrides.find(lead);
    const LeadOverride* ov = ov_it == spec.lead_overrides.end() ? nullptr : &ov_it->second;
    auto& x = signal[li];

    const double p_amp = ov && ov->p_amp_mv
                             ? *ov->p_amp_mv
                             : projection(spec.p_amp, spec.p_axis_deg, spec.p_horizontal_deg, lead);
    const double t_amp = ov && ov->t_amp_mv
                             ? *ov->t_amp_mv
                             : projection(spec.t_amp, spec.t_axis_deg, spec.t_horizontal_deg, lead);
    const double st = ov && ov->st_shift_mv ? *ov->st_shift_mv : spec.st_shift_mv;
    const double qrs_scale = ov ? ov->qrs_scale : 1.0;

    for (const auto& p : all_p) {
      std::vector<double> c(n, 0.0);
      add_raised_cosine(c, p.onset, p.offset, p_amp);
      for (long k = p.onset; k <= p.offset && k < n; ++k) x[k] += c[k];
      WaveSegment seg = p;
      seg.lead = LeadRef::of(lead);
      seg.peak = peak_of(c, p.onset, p.offset);
      result.truth.push_back(seg);
    }

    for (const auto& b : beats) {
      if (!b.qrs) continue;
      const auto& q = *b.qrs;
      const double len = static_cast<double>(q.offset - q.onset);
      std::vector<double> c(n, 0.0);
      const bool pvc = b.kind == BeatKind::VentricularPremature;
      if (ov && ov->qrs && !pvc) {
        for (const auto& d : *ov->qrs) {
          add_lobe(c, q.onset + std::lround(d.start_frac * len),
                   q.onset + std::lround((d.start_frac + d.dur_frac) * len), d.amp_mv, d.notch);
        }
      } else {
        for (const auto& l : pvc ? pvc_lobes : lobes) {
          const double a = projection(l.amp_mv, l.frontal_deg, l.horizontal_deg, lead) * qrs_scale;
          add_lobe(c, q.onset + std::lround(l.start_frac * len),
                   q.onset + std::lround((l.start_frac + l.dur_frac) * len), a, l.notch);
        }
      }
      for (long k = q.onset; k <= q.offset && k < n; ++k) x[k] += c[k];
      WaveSegment qs = q;
      qs.lead = LeadRef::of(lead);
      qs.peak = peak_of(c, q.onset, q.offset);
      result.truth.push_back(qs);

      const auto& t = *b.t;
      std::vector<double> tc(n, 0.0);
      add_raised_cosine(tc, t.onset, t.offset, pvc ? -t_amp * 1.5 : t_amp);
      for (long k = t.onset; k <= t.offset && k < n; ++k) x[k] += tc[k];
      WaveSegment ts = t;
      ts.lead = LeadRef::of(lead);
      ts.peak = peak_of(tc, t.onset, t.offset);
      result.truth.push_back(ts);

      if (st != 0.0 && !pvc) {
        const long t_peak = (t.onset + t.offset) / 2;
        for (long k = q.offset; k <= t.offset && k < n; ++k) {
          x[k] += k <= t_peak ? st
                              : st * static_cast<double>(t.offset - k) /
                                    static_cast<double>(t.offset - t_peak);
        }
      }
    }
  }

  if (spec.noise_mv > 0.0) {
    Rng noise(derive_seed(spec.seed, "noise"));
    for (auto& x : signal) {
      for (auto& v : x) v += spec.noise_mv * noise.normal();
    }
  }

  std::vector<std::vector<float>> samples(kLeadCount);
  for (std::size_t i = 0; i < kLeadCount; ++i) {
    samples[i].assign(signal[i].begin(), signal[i].end());
  }
  result.record = EcgRecord(spec.id, spec.sampling_rate, std::move(samples));

  // --- consensus truth ---------------------------------------------------------
  auto consensus_peak = [&](const WaveSegment& c) {
    std::vector<long> peaks;
    for (const auto& s : result.truth) {
      if (!s.lead.is_consensus() && s.wave_class == c.wave_class && s.onset == c.onset) {
        peaks.push_back(s.peak);
      }
    }
    std::sort(peaks.begin(), peaks.end());
    return peaks.empty() ? c.midpoint() : peaks[(peaks.size() - 1) / 2];
  };
  for (auto& b : beats) {
    for (auto* seg : {&b.p, &b.qrs, &b.t}) {
      if (*seg) (*seg)->peak = consensus_peak(**seg);
    }
  }
  for (auto& p : free_p) p.peak = consensus_peak(p);

  std::vector<WaveSegment> consensus;
  for (const auto& b : beats) {
    for (const auto* seg : {&b.p, &b.qrs, &b.t}) {
      if (*seg) consensus.push_back(**seg);
    }
  }
  consensus.insert(consensus.end(), free_p.begin(), free_p.end());
  sort_segments(consensus);
  result.truth.insert(result.truth.end(), consensus.begin(), consensus.end());

  // Non-conducted P: not the last P before a QRS, and not after the final QRS.
  {
    std::vector<WaveSegment> ps = of_class(consensus, WaveClass::P);
    std::vector<long> qrs_on;
    for (const auto& b : beats) {
      if (b.qrs) qrs_on.push_back(b.qrs->onset);
    }
    std::vector<bool> conducted(ps.size(), false);
    long prev_end = -1;
    for (std::size_t qi = 0; qi < qrs_on.size(); ++qi) {
      int best = -1;
      for (std::size_t pi = 0; pi < ps.size(); ++pi) {
        if (ps[pi].peak > prev_end && ps[pi].offset < qrs_on[qi]) best = static_cast<int>(pi);
      }
      if (best >= 0) conducted[best] = true;
      for (const auto& b : beats) {
        if (b.qrs && b.qrs->onset == qrs_on[qi]) prev_end = b.qrs->offset;
      }
    }
    const long last_qrs = qrs_on.empty() ? -1 : qrs_on.back();
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
      if (!conducted[pi] && ps[pi].offset < last_qrs) result.nonconducted_p.push_back(ps[pi]);
    }
  }

  // --- expected summary ----------------------------------------------------------
  auto& ex = result.expected;
  ex.pr_ms = spec.pr_ms;
  ex.qrs_ms = spec.qrs_ms;
  ex.qt_ms = spec.qt_ms;
  ex.rr_ms = rr;
  ex.axis_deg = lobe_axis_deg(lobes);
  for (Lead lead : kAllLeads) {
    const auto ov_it = spec.lead_overrides.find(lead);
    ex.st_dev_mv[index_of(lead)] = ov_it != spec.lead_overrides.end() && ov_it->second.st_shift_mv
                                       ? *ov_it->second.st_shift_mv
                                       : spec.st_shift_mv;
  }
  ex.beats = static_cast<int>(std::count_if(beats.begin(), beats.end(),
                                            [](const TruthBeat& b) { return b.qrs.has_value(); }));
  ex.nonconducted_p = static_cast<int>(result.nonconducted_p.size());
  result.beats = std::move(beats);
  return result;
}

}  // namespace ecgbench
